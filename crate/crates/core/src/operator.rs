//! Schrödinger operators on a graph: real symmetric matrices with strictly
//! negative entries on edges, zeros off the edge set, and a free diagonal.

use std::ops::RangeInclusive;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{check_len, Graph};

pub const DEFAULT_WEIGHT_RANGE: RangeInclusive<f64> = -2.0..=-0.5;
pub const DEFAULT_DIAGONAL_RANGE: RangeInclusive<f64> = -1.0..=1.0;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SchrodingerOperator {
    graph: Graph,
    matrix: DMatrix<f64>,
    potential: DVector<f64>,
}

impl SchrodingerOperator {
    /// Validates `matrix` against the sign pattern of `graph` and symmetrizes
    /// it. Asymmetry up to `1e-12 * (1 + max |m_ij|)` is tolerated.
    pub fn new(graph: Graph, matrix: DMatrix<f64>) -> Result<Self> {
        let n = graph.num_vertices();
        check_len(n, matrix.nrows())?;
        check_len(n, matrix.ncols())?;
        let scale = 1.0 + crate::linalg::max_abs(&matrix);
        for i in 0..n {
            for j in i + 1..n {
                let diff = (matrix[(i, j)] - matrix[(j, i)]).abs();
                if !(diff <= SYMMETRY_TOL * scale) {
                    return Err(Error::NotSymmetric { i, j, diff });
                }
            }
        }
        let matrix = (&matrix + matrix.transpose()) * 0.5;
        for i in 0..n {
            if !matrix[(i, i)].is_finite() {
                return Err(Error::NotInOG(format!("diagonal entry {i} is not finite")));
            }
            for j in i + 1..n {
                let h = matrix[(i, j)];
                match graph.edge_index(i, j) {
                    Some(_) if !(h < 0.0) => {
                        return Err(Error::NotInOG(format!(
                            "h[{i}][{j}] = {h} must be negative on an edge"
                        )))
                    }
                    None if h != 0.0 => {
                        return Err(Error::NotInOG(format!(
                            "h[{i}][{j}] = {h} must vanish off the edge set"
                        )))
                    }
                    _ => {}
                }
            }
        }
        let potential = DVector::from_fn(n, |x, _| {
            matrix[(x, x)] + graph.neighbors(x).iter().map(|&(y, _)| matrix[(x, y)]).sum::<f64>()
        });
        Ok(Self { graph, matrix, potential })
    }

    /// Builds from one (negative) weight per edge, in edge order, plus a diagonal.
    pub fn from_weights(graph: Graph, weights: &[f64], diagonal: &[f64]) -> Result<Self> {
        check_len(graph.num_edges(), weights.len())?;
        check_len(graph.num_vertices(), diagonal.len())?;
        let mut m = DMatrix::from_diagonal(&DVector::from_column_slice(diagonal));
        for (e, &w) in graph.edges().iter().zip(weights) {
            m[(e.tail, e.head)] = w;
            m[(e.head, e.tail)] = w;
        }
        Self::new(graph, m)
    }

    /// The combinatorial Laplacian: `-1` on edges, degrees on the diagonal.
    pub fn laplacian(graph: Graph) -> Self {
        let weights = vec![-1.0; graph.num_edges()];
        let diag: Vec<f64> = (0..graph.num_vertices()).map(|x| graph.degree(x) as f64).collect();
        Self::from_weights(graph, &weights, &diag).expect("Laplacian is in O_G")
    }

    /// Deterministic pseudorandom operator: edge weights uniform in
    /// `weight_range` (which must lie below zero) and diagonal uniform in
    /// `diagonal_range`.
    pub fn random(
        graph: Graph,
        seed: u64,
        weight_range: RangeInclusive<f64>,
        diagonal_range: RangeInclusive<f64>,
    ) -> Result<Self> {
        let (wlo, whi) = (*weight_range.start(), *weight_range.end());
        if !(wlo <= whi && whi < 0.0 && wlo.is_finite()) {
            return Err(Error::InvalidRange {
                lo: wlo,
                hi: whi,
                reason: "edge weights must lie in (-inf, 0)".into(),
            });
        }
        let (dlo, dhi) = (*diagonal_range.start(), *diagonal_range.end());
        if !(dlo <= dhi && dlo.is_finite() && dhi.is_finite()) {
            return Err(Error::InvalidRange { lo: dlo, hi: dhi, reason: "empty diagonal range".into() });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights: Vec<f64> =
            (0..graph.num_edges()).map(|_| rng.gen_range(weight_range.clone())).collect();
        let diag: Vec<f64> =
            (0..graph.num_vertices()).map(|_| rng.gen_range(diagonal_range.clone())).collect();
        Self::from_weights(graph, &weights, &diag)
    }

    pub fn random_default(graph: Graph, seed: u64) -> Self {
        Self::random(graph, seed, DEFAULT_WEIGHT_RANGE, DEFAULT_DIAGONAL_RANGE)
            .expect("default ranges are valid")
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `V_x = h_xx + Σ_{y~x} h_xy`.
    pub fn potential(&self) -> &DVector<f64> {
        &self.potential
    }

    pub fn dim(&self) -> usize {
        self.graph.num_vertices()
    }

    /// Weight `h_xy` of edge `k`.
    pub fn edge_weight(&self, k: usize) -> f64 {
        let e = self.graph.edge(k);
        self.matrix[(e.tail, e.head)]
    }

    /// `H - shift·I`, still in O_G.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut m = self.matrix.clone();
        for i in 0..self.dim() {
            m[(i, i)] -= shift;
        }
        Self::new(self.graph.clone(), m).expect("diagonal shifts stay in O_G")
    }

    /// `q₁(f) = -Σ_E h_xy (f(x) - f(y))² + Σ_x V_x f(x)²`.
    pub fn q1(&self, f: &[f64]) -> Result<f64> {
        check_len(self.dim(), f.len())?;
        let edges: f64 = self
            .graph
            .edges()
            .iter()
            .map(|e| {
                let d = f[e.tail] - f[e.head];
                -self.matrix[(e.tail, e.head)] * d * d
            })
            .sum();
        let pot: f64 = f.iter().zip(self.potential.iter()).map(|(v, p)| p * v * v).sum();
        Ok(edges + pot)
    }

    /// Spectral-norm bound used for relative tolerances (max absolute row sum).
    pub fn norm(&self) -> f64 {
        crate::linalg::norm_inf(&self.matrix)
    }
}
