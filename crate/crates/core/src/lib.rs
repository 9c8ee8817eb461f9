//! Nodal counts, magnetic Hessians and Morse indices for Schrödinger
//! operators on finite graphs, plus the Hill-operator analogue on the circle.

// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod campaign;
pub mod error;
pub mod graph;
pub mod hill;
pub mod hodge;
pub mod instance;
pub mod linalg;
pub mod magnetic;
pub mod nodal;
pub mod operator;
pub mod perturbation;
pub mod special_cases;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{Edge, Graph, OneForm};
pub use operator::SchrodingerOperator;
