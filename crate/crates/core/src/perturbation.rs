//! First and second derivatives of a simple eigenvalue along a `C²` curve of
//! Hermitian matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{check_len, OneForm};
use crate::linalg::{cdot, cnorm};
use crate::magnetic::{magnetic_operator, MagneticField};
use crate::operator::SchrodingerOperator;
use crate::spectral::eig_hermitian;

const EIGENVECTOR_TOL: f64 = 1e-8;
const CRITICAL_TOL: f64 = 1e-8;
const RELATIVE_GAP: f64 = 1e-6;

/// `t ↦ A(t)` near `t = 0` with its first two derivatives at `0`.
pub trait MatrixCurve {
    fn evaluate(&self, t: f64) -> DMatrix<Complex64>;
    fn first_derivative(&self) -> DMatrix<Complex64>;
    fn second_derivative(&self) -> DMatrix<Complex64>;
}

/// `A(t) = A₀ + t A₁ + ½ t² A₂`.
#[derive(Debug, Clone)]
pub struct QuadraticCurve {
    pub a0: DMatrix<Complex64>,
    pub a1: DMatrix<Complex64>,
    pub a2: DMatrix<Complex64>,
}

impl MatrixCurve for QuadraticCurve {
    fn evaluate(&self, t: f64) -> DMatrix<Complex64> {
        &self.a0 + self.a1.scale(t) + self.a2.scale(0.5 * t * t)
    }
    fn first_derivative(&self) -> DMatrix<Complex64> {
        self.a1.clone()
    }
    fn second_derivative(&self) -> DMatrix<Complex64> {
        self.a2.clone()
    }
}

/// `A(t) = H_{e^{itα}}` for a fixed 1-form `α`.
#[derive(Debug, Clone)]
pub struct MagneticCurve<'a> {
    pub op: &'a SchrodingerOperator,
    pub alpha: OneForm,
}

impl<'a> MagneticCurve<'a> {
    pub fn new(op: &'a SchrodingerOperator, alpha: OneForm) -> Result<Self> {
        check_len(op.graph().num_edges(), alpha.len())?;
        Ok(Self { op, alpha })
    }

    /// Off-diagonal pattern `c · h_xy γ_xy^p` with the orientation sign.
    fn edge_matrix(&self, f: impl Fn(f64, f64) -> (Complex64, Complex64)) -> DMatrix<Complex64> {
        let g = self.op.graph();
        let mut m = DMatrix::zeros(g.num_vertices(), g.num_vertices());
        for (k, e) in g.edges().iter().enumerate() {
            let (fwd, bwd) = f(self.op.edge_weight(k), self.alpha.0[k]);
            m[(e.tail, e.head)] = fwd;
            m[(e.head, e.tail)] = bwd;
        }
        m
    }
}

impl MatrixCurve for MagneticCurve<'_> {
    fn evaluate(&self, t: f64) -> DMatrix<Complex64> {
        let b = MagneticField::new(self.alpha.scaled(t));
        magnetic_operator(self.op, &b).expect("curve field matches its graph")
    }

    /// `h_xy · i γ_xy` on each oriented edge.
    fn first_derivative(&self) -> DMatrix<Complex64> {
        self.edge_matrix(|h, a| (Complex64::new(0.0, h * a), Complex64::new(0.0, -h * a)))
    }

    /// `-h_xy γ_xy²`, symmetric in the orientation.
    fn second_derivative(&self) -> DMatrix<Complex64> {
        self.edge_matrix(|h, a| {
            let v = Complex64::new(-h * a * a, 0.0);
            (v, v)
        })
    }
}

fn matrix_scale(m: &DMatrix<Complex64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn rayleigh(m: &DMatrix<Complex64>, v: &DVector<Complex64>) -> Complex64 {
    cdot(&(m * v), v) / cdot(v, v)
}

fn check_eigenvector(a0: &DMatrix<Complex64>, phi: &DVector<Complex64>) -> Result<f64> {
    let lambda = rayleigh(a0, phi).re;
    let residual = cnorm(&(a0 * phi - phi.scale(lambda))) / cnorm(phi);
    if !(residual <= EIGENVECTOR_TOL * (1.0 + matrix_scale(a0))) {
        return Err(Error::NotEigenvector(residual));
    }
    Ok(lambda)
}

/// `λ'(0) = ⟨A'(0) φ, φ⟩` for a unit eigenvector `φ` of `A(0)`.
pub fn eigenvalue_first_derivative(curve: &impl MatrixCurve, phi0: &DVector<Complex64>) -> Result<f64> {
    let a0 = curve.evaluate(0.0);
    check_eigenvector(&a0, phi0)?;
    Ok(rayleigh(&curve.first_derivative(), phi0).re)
}

/// `λ''(0) = ⟨A''(0) φ, φ⟩ + 2 ⟨φ', A'(0) φ⟩` where `φ'` solves
/// `(A(0) - λ) φ' = -A'(0) φ` with no component along `φ`. Requires
/// `λ'(0) = 0` and a simple `λ(0)`.
pub fn eigenvalue_second_derivative(curve: &impl MatrixCurve, phi0: &DVector<Complex64>) -> Result<f64> {
    let a0 = curve.evaluate(0.0);
    let lambda = check_eigenvector(&a0, phi0)?;
    let phi = phi0.unscale(cnorm(phi0));
    let a1 = curve.first_derivative();
    let a2 = curve.second_derivative();
    let first = rayleigh(&a1, &phi).re;
    if !(first.abs() <= CRITICAL_TOL * (1.0 + matrix_scale(&a1))) {
        return Err(Error::NotCritical(first));
    }
    let curvature = cdot(&(&a2 * &phi), &phi).re;
    let w = &a1 * &phi;
    if cnorm(&w) == 0.0 {
        return Ok(curvature);
    }

    let pairs = eig_hermitian(&a0)?;
    let k = pairs
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1.value - lambda).abs().total_cmp(&(b.1.value - lambda).abs()))
        .map(|(k, _)| k)
        .expect("non-empty spectrum");
    let gap = pairs
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, p)| (p.value - lambda).abs())
        .fold(f64::INFINITY, f64::min);
    let scale = 1.0 + matrix_scale(&a0);
    if !(gap >= RELATIVE_GAP * scale) {
        return Err(Error::SolveFailure(format!("eigenvalue gap {gap:e} below {:e}", RELATIVE_GAP * scale)));
    }
    let mut dphi = DVector::<Complex64>::zeros(phi.len());
    for (j, p) in pairs.iter().enumerate() {
        if j != k {
            let c = cdot(&w, &p.vector) / (p.value - lambda);
            dphi -= p.vector.scale(1.0) * c;
        }
    }
    Ok(curvature + 2.0 * cdot(&dphi, &w).re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn two_by_two() -> QuadraticCurve {
        // A(t) = [[0, t], [t, 1]]; λ₁(t) = (1 - √(1 + 4t²)) / 2.
        QuadraticCurve {
            a0: DMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)]),
            a1: DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
            a2: DMatrix::zeros(2, 2),
        }
    }

    #[test]
    fn closed_form_two_by_two() {
        let e1 = DVector::from_vec(vec![c(1.0), c(0.0)]);
        let curve = two_by_two();
        assert_eq!(eigenvalue_first_derivative(&curve, &e1).unwrap(), 0.0);
        let d2 = eigenvalue_second_derivative(&curve, &e1).unwrap();
        assert!((d2 + 2.0).abs() < 1e-10, "{d2}");
    }

    #[test]
    fn identity_shift_has_unit_slope() {
        let mut curve = two_by_two();
        curve.a1 = DMatrix::identity(2, 2);
        let e1 = DVector::from_vec(vec![c(1.0), c(0.0)]);
        assert!((eigenvalue_first_derivative(&curve, &e1).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(eigenvalue_second_derivative(&curve, &e1), Err(Error::NotCritical(_))));
    }

    #[test]
    fn pure_second_order_curve() {
        let curve = QuadraticCurve {
            a0: DMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.0)]),
            a1: DMatrix::zeros(2, 2),
            a2: DMatrix::identity(2, 2) * c(2.0),
        };
        let e1 = DVector::from_vec(vec![c(1.0), c(0.0)]);
        assert_eq!(eigenvalue_second_derivative(&curve, &e1).unwrap(), 2.0);
    }

    #[test]
    fn wrong_vector_is_rejected() {
        let v = DVector::from_vec(vec![c(1.0), c(1.0)]);
        assert!(matches!(eigenvalue_first_derivative(&two_by_two(), &v), Err(Error::NotEigenvector(_))));
    }

    #[test]
    fn degenerate_eigenvalue_cannot_be_solved() {
        let curve = QuadraticCurve {
            a0: DMatrix::identity(2, 2),
            a1: DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
            a2: DMatrix::zeros(2, 2),
        };
        let e1 = DVector::from_vec(vec![c(1.0), c(0.0)]);
        assert!(matches!(eigenvalue_second_derivative(&curve, &e1), Err(Error::SolveFailure(_))));
    }
}
