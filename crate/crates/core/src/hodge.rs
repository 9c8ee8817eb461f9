//! The quadratic form `Q(ω) = Σ_E a_e ω(e)²` with `a_xy = -h_xy φ(x) φ(y)`,
//! its adjoint differential `d★`, the `Q`-orthogonal splitting
//! `Ω¹ = dR^X ⊕ ker d★`, and the analytic magnetic Hessian.
//!
//! All routines expect the operator shifted so that the eigenvalue under
//! study sits at zero (`H φ = 0`).
//!
//! Scale convention: `Q` is summed once per unoriented edge. Along a curve
//! `t ↦ e^{itα}` the second derivative of `λ_n` is `2 Q(α)`, so the Hessian
//! matrix of `Λ_n` (second partial derivatives) in a basis `K` of `ker d★` is
//! `2 Kᵀ diag(a) K`. Indices and nullities do not depend on the factor.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{check_len, Graph, OneForm};
use crate::linalg::{nullspace, orthonormalize, rank, solve};
use crate::magnetic::{spectral_norm, FdHessian, FluxHessians, DEFAULT_FD_STEP};
use crate::nodal::{nodal_report_for, NodalReport};
use crate::operator::SchrodingerOperator;
use crate::spectral::{check_index, eig_symmetric, eigenvalues_symmetric, HypothesisReport, VANISH_THRESHOLD};

const SHIFT_TOL: f64 = 1e-8;
const NULLSPACE_TOL: f64 = 1e-10;
/// Relative tolerance for signatures of restrictions of `Q`: a small multiple
/// of rounding error. Near-degenerate splittings produce genuine restricted
/// eigenvalues far below `1e-9`, so anything looser miscounts them.
pub const Q_INDEX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct QForm {
    graph: Graph,
    /// `a_e = -h_e φ(tail) φ(head)` per edge.
    a: Vec<f64>,
}

impl QForm {
    /// Builds `Q` from a shifted operator and its kernel vector `φ`.
    pub fn new(op: &SchrodingerOperator, phi: &[f64]) -> Result<Self> {
        let g = op.graph();
        check_len(g.num_vertices(), phi.len())?;
        let vmax = phi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if let Some(x) = phi.iter().position(|v| v.abs() <= VANISH_THRESHOLD * vmax) {
            return Err(Error::VanishingVertex(x));
        }
        let v = DVector::from_column_slice(phi);
        let residual = (op.matrix() * &v).norm() / v.norm();
        if !(residual <= SHIFT_TOL) {
            return Err(Error::NotShifted(residual));
        }
        Ok(Self::from_coefficients(op, phi))
    }

    /// Builds `Q` without checking `H φ = 0` or nonvanishing.
    pub fn from_coefficients(op: &SchrodingerOperator, phi: &[f64]) -> Self {
        let g = op.graph();
        let a = (0..g.num_edges())
            .map(|k| {
                let e = g.edge(k);
                -op.edge_weight(k) * phi[e.tail] * phi[e.head]
            })
            .collect();
        Self { graph: g.clone(), a }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.a
    }

    /// Diagonal Gram matrix of `Q̂` in the canonical edge basis.
    pub fn gram(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.a))
    }

    pub fn value(&self, w: &OneForm) -> f64 {
        w.0.iter().zip(&self.a).map(|(x, a)| a * x * x).sum()
    }

    pub fn bilinear(&self, u: &OneForm, v: &OneForm) -> f64 {
        u.0.iter().zip(&v.0).zip(&self.a).map(|((x, y), a)| a * x * y).sum()
    }

    /// Number of negative coefficients, i.e. the index of `Q` on all of `Ω¹`.
    pub fn negative_count(&self) -> usize {
        self.a.iter().filter(|&&a| a < 0.0).count()
    }

    /// The `#X × #E` matrix of `d★`, adjoint of `d` for `Q̂`:
    /// `d★ω(x) = Σ_{y~x} a_xy ω([y, x])`. Column `e = [tail, head]` holds
    /// `+a_e` in row `head` and `-a_e` in row `tail`.
    pub fn dstar(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.graph.num_vertices(), self.graph.num_edges());
        for (k, e) in self.graph.edges().iter().enumerate() {
            m[(e.head, k)] = self.a[k];
            m[(e.tail, k)] = -self.a[k];
        }
        m
    }

    /// Signature of `Q` restricted to the column span of `basis`. The basis is
    /// orthonormalized first; the spectrum of `Bᵀ diag(a) B` is then counted
    /// with tolerance `Q_INDEX_TOL · (1 + max |a|)`.
    pub fn index_on_subspace(&self, basis: &DMatrix<f64>) -> Result<(usize, usize)> {
        check_len(self.graph.num_edges(), basis.nrows())?;
        if basis.ncols() == 0 {
            return Ok((0, 0));
        }
        let (q, r) = orthonormalize(basis, 1e-10);
        if r < basis.ncols() {
            return Err(Error::RankDeficientBasis { rank: r, cols: basis.ncols() });
        }
        let restricted = q.transpose() * self.gram() * &q;
        let scale = self.a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = Q_INDEX_TOL * (1.0 + scale);
        let values = eigenvalues_symmetric(&restricted)?;
        Ok((
            values.iter().filter(|&&v| v < -tol).count(),
            values.iter().filter(|&&v| v.abs() <= tol).count(),
        ))
    }

    /// The `Q`-orthogonal splitting `Ω¹ = dR^X ⊕ ker d★`.
    pub fn hodge_split(&self) -> Result<HodgeSplit> {
        let g = &self.graph;
        let grad_basis = g.gradient_subspace_basis();
        let dstar_matrix = self.dstar();
        let kernel_basis = nullspace(&dstar_matrix, NULLSPACE_TOL);
        let beta = g.cycle_dimension();
        if kernel_basis.ncols() != beta {
            return Err(Error::SplitFailure(format!(
                "dim ker d★ = {} but β = {beta}",
                kernel_basis.ncols()
            )));
        }
        let joint = DMatrix::from_fn(g.num_edges(), g.num_edges(), |i, j| {
            if j < grad_basis.ncols() {
                grad_basis[(i, j)]
            } else {
                kernel_basis[(i, j - grad_basis.ncols())]
            }
        });
        let joint_rank = if joint.is_empty() { 0 } else { rank(&joint, NULLSPACE_TOL) };
        if joint_rank < g.num_edges() {
            return Err(Error::SplitFailure(format!(
                "dR^X ∩ ker d★ is nontrivial (joint rank {joint_rank} < {})",
                g.num_edges()
            )));
        }
        Ok(HodgeSplit { grad_basis, kernel_basis, dstar_matrix })
    }

    /// Projects each chord indicator onto `ker d★` along `dR^X`. Column `j`
    /// of the result is `χ_j - d f_j` with `d★(χ_j - d f_j) = 0`.
    pub fn projected_chords(&self) -> Result<DMatrix<f64>> {
        let g = &self.graph;
        let grad = g.gradient_subspace_basis();
        let gram = self.gram();
        let mut chords = DMatrix::zeros(g.num_edges(), g.cycle_dimension());
        for (j, &k) in g.chords().iter().enumerate() {
            chords[(k, j)] = 1.0;
        }
        if chords.ncols() == 0 {
            return Ok(chords);
        }
        // Gram matrix of Q on dR^X; invertible exactly when the split exists.
        let grad_gram = grad.transpose() * &gram * &grad;
        let rhs = grad.transpose() * &gram * &chords;
        let coeffs = if grad.ncols() == 0 {
            DMatrix::zeros(0, chords.ncols())
        } else {
            solve(&grad_gram, &rhs).ok_or_else(|| {
                Error::SplitFailure("Q restricted to dR^X is singular".into())
            })?
        };
        Ok(&chords - &grad * coeffs)
    }

    /// Analytic Hessian of `Λ_n` at `B ≡ 1` in flux coordinates:
    /// `2 Kᵀ diag(a) K` with `K` the projected chord indicators.
    pub fn analytic_flux_hessian(&self) -> Result<DMatrix<f64>> {
        let k = self.projected_chords()?;
        let h = k.transpose() * self.gram() * &k * 2.0;
        Ok((&h + h.transpose()) * 0.5)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HodgeSplit {
    /// `#E × (#X - 1)`, columns `d e_1, …, d e_{#X-1}`.
    pub grad_basis: DMatrix<f64>,
    /// `#E × β`, orthonormal columns spanning `ker d★`.
    pub kernel_basis: DMatrix<f64>,
    /// `#X × #E`.
    pub dstar_matrix: DMatrix<f64>,
}

/// `q̃₁(f) = q₁(φ f)` with the pointwise product.
pub fn tilde_q1(op: &SchrodingerOperator, phi: &[f64], f: &[f64]) -> Result<f64> {
    check_len(phi.len(), f.len())?;
    let prod: Vec<f64> = phi.iter().zip(f).map(|(p, v)| p * v).collect();
    op.q1(&prod)
}

/// Matrix of `γ ↦ (Σ_{y~x} h_xy φ(y) γ_xy)_x`, the first-order magnetic
/// perturbation `Ḣ φ` divided by `i`.
pub fn magnetic_first_order(op: &SchrodingerOperator, phi: &[f64]) -> Result<DMatrix<f64>> {
    let g = op.graph();
    check_len(g.num_vertices(), phi.len())?;
    let mut m = DMatrix::zeros(g.num_vertices(), g.num_edges());
    for (k, e) in g.edges().iter().enumerate() {
        let h = op.edge_weight(k);
        // γ_{tail,head} = γ_k and γ_{head,tail} = -γ_k.
        m[(e.tail, k)] = h * phi[e.head];
        m[(e.head, k)] = -h * phi[e.tail];
    }
    Ok(m)
}

/// Everything the analytic side produces for one eigenvalue.
#[derive(Debug, Clone)]
pub struct AnalyticReport {
    pub n: usize,
    pub lambda: f64,
    /// Unit eigenvector of the unshifted operator.
    pub phi: DVector<f64>,
    pub qform: QForm,
    pub split: HodgeSplit,
    pub index_full: (usize, usize),
    pub index_grad: (usize, usize),
    pub index_kernel: (usize, usize),
    pub nodal: NodalReport,
    pub flux_hessian: DMatrix<f64>,
}

/// Runs the analytic pipeline for `λ_n`: hypotheses, shift, `Q`, splitting
/// and the three restricted signatures.
pub fn analyze(op: &SchrodingerOperator, n: usize) -> Result<AnalyticReport> {
    check_index(n, op.dim())?;
    let pairs = eig_symmetric(op.matrix())?;
    analyze_pair(op, &pairs[n - 1])
}

pub(crate) fn analyze_pair(
    op: &SchrodingerOperator,
    pair: &crate::spectral::Eigenpair<f64>,
) -> Result<AnalyticReport> {
    let n = pair.n;
    let hyp = HypothesisReport::from_pair(pair);
    if !hyp.simple {
        return Err(Error::HypothesesViolated { n, reason: format!("gap {:e}", hyp.gap) });
    }
    if !hyp.nonvanishing {
        return Err(Error::HypothesesViolated {
            n,
            reason: format!("eigenvector vanishes at {:?}", hyp.vanishing_vertices),
        });
    }
    let shifted = op.shifted(pair.value);
    let phi = pair.vector.as_slice();
    let qform = QForm::new(&shifted, phi)?;
    let split = qform.hodge_split()?;
    let full = DMatrix::identity(op.graph().num_edges(), op.graph().num_edges());
    let index_full = qform.index_on_subspace(&full)?;
    let index_grad = qform.index_on_subspace(&split.grad_basis)?;
    let index_kernel = qform.index_on_subspace(&split.kernel_basis)?;
    let nodal = nodal_report_for(op.graph(), n, phi)?;
    let flux_hessian = qform.analytic_flux_hessian()?;
    Ok(AnalyticReport {
        n,
        lambda: pair.value,
        phi: pair.vector.clone(),
        qform,
        split,
        index_full,
        index_grad,
        index_kernel,
        nodal,
        flux_hessian,
    })
}

/// Analytic versus finite-difference Hessian of `Λ_n` in flux coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct HessianComparison {
    pub n: usize,
    pub beta: usize,
    pub analytic_index: usize,
    pub analytic_nullity: usize,
    pub fd_index: usize,
    pub fd_nullity: usize,
    /// `max_ij |A_ij - F_ij|` with `F` the Richardson-extrapolated FD Hessian.
    pub max_abs_discrepancy: f64,
    /// `max_ij |A_ij - F_ij| / max_ij |A_ij|`.
    pub relative_discrepancy: f64,
    /// Step-`h` versus step-`2h` FD discrepancy.
    pub fd_step_discrepancy: f64,
}

impl HessianComparison {
    pub fn build(n: usize, analytic: &DMatrix<f64>, fd: &FdHessian) -> Result<Self> {
        let beta = analytic.nrows();
        let a_scale = spectral_norm(analytic)?;
        let tol = Q_INDEX_TOL * (1.0 + a_scale);
        let (analytic_index, analytic_nullity) = crate::magnetic::morse_index_of_matrix(analytic, tol)?;
        let (fd_index, fd_nullity) = fd.signature()?;
        let max_abs_discrepancy =
            if beta == 0 { 0.0 } else { (analytic - &fd.extrapolated).amax() };
        let amax = if beta == 0 { 0.0 } else { analytic.amax() };
        let relative_discrepancy =
            if max_abs_discrepancy == 0.0 { 0.0 } else { max_abs_discrepancy / amax };
        Ok(Self {
            n,
            beta,
            analytic_index,
            analytic_nullity,
            fd_index,
            fd_nullity,
            max_abs_discrepancy,
            relative_discrepancy,
            fd_step_discrepancy: fd.discrepancy,
        })
    }
}

/// Compares the analytic Hessian `2 Kᵀ diag(a) K` with the FD Hessian of
/// `Λ_n` for one eigenvalue.
pub fn analytic_vs_fd_hessian(op: &SchrodingerOperator, n: usize) -> Result<HessianComparison> {
    let analytic = analyze(op, n)?;
    let fd = FluxHessians::evaluate(op, DEFAULT_FD_STEP)?.lambda_hessian(n)?;
    HessianComparison::build(n, &analytic.flux_hessian, &fd)
}
