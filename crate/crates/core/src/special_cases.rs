//! Vanishing eigenvectors and Hessian nullity, bipartite graphs, and the
//! determinant of the magnetic operator.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Graph, OneForm};
use crate::magnetic::{
    magnetic_operator, spectral_norm, FluxHessians, MagneticField, DEFAULT_FD_STEP,
};
use crate::nodal::sign_changes;
use crate::operator::{SchrodingerOperator, DEFAULT_DIAGONAL_RANGE, DEFAULT_WEIGHT_RANGE};
use crate::spectral::{
    check_index, eig_symmetric, eigenvalues_hermitian, eigenvalues_symmetric, HypothesisReport,
};

/// Two triangles `{0,1,2}` and `{2,3,4}` glued at vertex 2.
pub const TWO_TRIANGLES_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)];

/// An operator on the two-triangle graph whose fourth eigenvalue is `0`,
/// simple, with eigenvector `(1, -1, 0, -1, 1)` vanishing at the shared vertex.
pub fn two_triangles_matrix() -> DMatrix<f64> {
    -DMatrix::from_row_slice(
        5,
        5,
        &[
            1.0, 1.0, 1.0, 0.0, 0.0, //
            1.0, 1.0, 2.0, 0.0, 0.0, //
            1.0, 2.0, 1.0, 1.0, 2.0, //
            0.0, 0.0, 1.0, 1.0, 1.0, //
            0.0, 0.0, 2.0, 1.0, 1.0,
        ],
    )
}

pub fn two_triangles_operator() -> SchrodingerOperator {
    let g = Graph::new(5, &TWO_TRIANGLES_EDGES).expect("valid graph");
    SchrodingerOperator::new(g, two_triangles_matrix()).expect("matrix lies in O_G")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VanishingReport {
    pub n: usize,
    pub lambda: f64,
    pub x0: usize,
    /// Neighbours `y ~ x0` with `φ(y) > 0`.
    pub n_plus: usize,
    /// Neighbours `y ~ x0` with `φ(y) < 0`.
    pub n_minus: usize,
    pub beta: usize,
    /// `|n₊ - n₋|`.
    pub nullity_bound: usize,
    pub fd_index: usize,
    pub fd_nullity: usize,
    pub fd_hessian_norm: f64,
    pub fd_hessian: Vec<Vec<f64>>,
}

impl VanishingReport {
    /// `|n₊ - n₋| ≤ nullity ≤ β`.
    pub fn bound_holds(&self) -> bool {
        self.nullity_bound <= self.fd_nullity && self.fd_nullity <= self.beta
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Counts the signs of `φ_n` around its unique zero and measures the
/// nullity of the finite-difference Hessian of `Λ_n`.
pub fn vanishing_analysis(op: &SchrodingerOperator, n: usize) -> Result<VanishingReport> {
    check_index(n, op.dim())?;
    let pairs = eig_symmetric(op.matrix())?;
    let pair = &pairs[n - 1];
    if !pair.simple {
        return Err(Error::DegenerateEigenvalue { n, gap: pair.gap });
    }
    let hyp = HypothesisReport::from_pair(pair);
    let x0 = match hyp.vanishing_vertices.as_slice() {
        [x0] => *x0,
        [] => return Err(Error::NotSingleVanishing("eigenvector vanishes nowhere".into())),
        many => {
            return Err(Error::NotSingleVanishing(format!("eigenvector vanishes at {many:?}")))
        }
    };
    let g = op.graph();
    let phi = &pair.vector;
    let (mut n_plus, mut n_minus) = (0, 0);
    for &(y, _) in g.neighbors(x0) {
        if phi[y] > 0.0 {
            n_plus += 1;
        } else {
            n_minus += 1;
        }
    }
    let fd = FluxHessians::evaluate(op, DEFAULT_FD_STEP)?.lambda_hessian(n)?;
    let (fd_index, fd_nullity) = fd.signature()?;
    Ok(VanishingReport {
        n,
        lambda: pair.value,
        x0,
        n_plus,
        n_minus,
        beta: g.cycle_dimension(),
        nullity_bound: n_plus.abs_diff(n_minus),
        fd_index,
        fd_nullity,
        fd_hessian_norm: spectral_norm(&fd.extrapolated)?,
        fd_hessian: rows(&fd.extrapolated),
    })
}

/// An operator on `g` with a zero eigenvalue whose eigenvector vanishes at
/// `x0` and nowhere else.
///
/// Edge weights are drawn at random; `φ` is random on the other vertices
/// subject to `Σ_{y~x0} h_{x0 y} φ(y) = 0`, and the diagonal is then chosen
/// so that `H φ = 0`. Whether `0` is simple is left to the spectrum. Returns
/// the operator together with `φ`, or `None` when `x0` has fewer than two
/// neighbours.
pub fn vanishing_instance(
    g: &Graph,
    x0: usize,
    seed: u64,
) -> Result<Option<(SchrodingerOperator, Vec<f64>)>> {
    check_index(x0 + 1, g.num_vertices())?;
    let nbrs: Vec<usize> = g.neighbors(x0).iter().map(|&(y, _)| y).collect();
    if nbrs.len() < 2 {
        return Ok(None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..g.num_edges()).map(|_| rng.gen_range(DEFAULT_WEIGHT_RANGE)).collect();
    let h = |x: usize, y: usize| weights[g.edge_index(x, y).expect("adjacent")];
    let phi = loop {
        let mut phi: Vec<f64> = (0..g.num_vertices())
            .map(|_| {
                let m = rng.gen_range(0.2..=1.0);
                if rng.gen_bool(0.5) { m } else { -m }
            })
            .collect();
        phi[x0] = 0.0;
        let (&last, rest) = nbrs.split_last().expect("two neighbours");
        let partial: f64 = rest.iter().map(|&y| h(x0, y) * phi[y]).sum();
        phi[last] = -partial / h(x0, last);
        if phi[last].abs() >= 0.1 {
            break phi;
        }
    };
    let mut diag = vec![0.0; g.num_vertices()];
    for x in 0..g.num_vertices() {
        diag[x] = if x == x0 {
            rng.gen_range(DEFAULT_DIAGONAL_RANGE)
        } else {
            -g.neighbors(x).iter().map(|&(y, k)| weights[k] * phi[y]).sum::<f64>() / phi[x]
        };
    }
    let op = SchrodingerOperator::from_weights(g.clone(), &weights, &diag)?;
    Ok(Some((op, phi)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BipartiteReport {
    pub num_vertices: usize,
    pub num_edges: usize,
    pub beta: usize,
    /// `-U H U` passed the sign-pattern validation.
    pub conjugate_in_og: bool,
    /// `max |λ_k(H_B) + λ_{|V|+1-k}(-U H_B U)|` over the sampled fields.
    pub spectrum_mismatch: f64,
    /// Index and nullity of the FD Hessian of the top eigenvalue.
    pub top_index: usize,
    pub top_nullity: usize,
    /// Sign changes of `φ_{|V|}`.
    pub top_sign_changes: usize,
    /// `(|V| - 1) + β == |E|`.
    pub euler_identity: bool,
}

impl BipartiteReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.conjugate_in_og
            && self.spectrum_mismatch <= tol
            && self.top_index == self.beta
            && self.top_nullity == 0
            && self.top_sign_changes == self.num_edges
            && self.num_vertices - 1 + self.top_index == self.top_sign_changes
            && self.euler_identity
    }
}

const BIPARTITE_FIELDS: usize = 4;

/// Checks the involution `H ↦ -U H U` on a bipartite graph and its
/// consequences for the top eigenvalue.
pub fn bipartite_check(op: &SchrodingerOperator) -> Result<BipartiteReport> {
    let g = op.graph();
    let colour = g.bipartition()?;
    let u: Vec<f64> = colour.iter().map(|&c| if c == 0 { 1.0 } else { -1.0 }).collect();
    let u_mat = DMatrix::from_diagonal(&DVector::from_vec(u.clone()));
    let conjugate = SchrodingerOperator::new(g.clone(), -(&u_mat * op.matrix() * &u_mat));
    let conjugate_in_og = conjugate.is_ok();
    let conjugate = conjugate?;

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut spectrum_mismatch = 0.0f64;
    for _ in 0..BIPARTITE_FIELDS {
        let alpha: Vec<f64> = (0..g.num_edges())
            .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect();
        let b = MagneticField::new(OneForm(alpha));
        let s = eigenvalues_hermitian(&magnetic_operator(op, &b)?)?;
        let t = eigenvalues_hermitian(&magnetic_operator(&conjugate, &b)?)?;
        for (a, c) in s.iter().zip(t.iter().rev()) {
            spectrum_mismatch = spectrum_mismatch.max((a + c).abs());
        }
    }

    let top = op.dim();
    let fd = FluxHessians::evaluate(op, DEFAULT_FD_STEP)?.lambda_hessian(top)?;
    let (top_index, top_nullity) = fd.signature()?;
    let pairs = eig_symmetric(op.matrix())?;
    let top_sign_changes = sign_changes(g, pairs[top - 1].vector.as_slice(), None)?;
    let beta = g.cycle_dimension();
    Ok(BipartiteReport {
        num_vertices: g.num_vertices(),
        num_edges: g.num_edges(),
        beta,
        conjugate_in_og,
        spectrum_mismatch,
        top_index,
        top_nullity,
        top_sign_changes,
        euler_identity: g.num_vertices() - 1 + beta == g.num_edges(),
    })
}

/// `det` of a Hermitian matrix as the product of its eigenvalues.
pub fn hermitian_determinant(m: &DMatrix<num_complex::Complex64>) -> Result<f64> {
    Ok(eigenvalues_hermitian(m)?.iter().product())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeterminantReport {
    pub n: usize,
    pub beta: usize,
    /// `(-1)^{n-1} Π_{j≠n} λ_j` at `θ = 0`.
    pub signed_reduced_determinant: f64,
    pub lambda_index: usize,
    pub lambda_nullity: usize,
    pub det_index: usize,
    pub det_nullity: usize,
    /// Largest relative gap between `det(H_θ) / Λ_n(θ)` (complex LU) and
    /// `Π_{j≠n} λ_j(θ)` at the axis points `θ = ±h e_j`, `h = 1e-2`.
    pub factorization_discrepancy: f64,
}

impl DeterminantReport {
    pub fn holds(&self) -> bool {
        self.signed_reduced_determinant > 0.0
            && self.det_index == self.lambda_index
            && self.det_nullity == self.lambda_nullity
    }
}

/// Axis step for the factorization check. `Λ_n(θ)` is `O(h²)` there and the
/// LU determinant is divided by it, so a step much below this turns rounding
/// error in `det` into the reported discrepancy.
const FACTORIZATION_STEP: f64 = 1e-2;

fn reduced_product(spectrum: &[f64], n: usize) -> f64 {
    spectrum.iter().enumerate().filter(|&(j, _)| j != n - 1).map(|(_, v)| v).product()
}

/// Compares the Morse index of `θ ↦ (-1)^{n-1} det(H_θ)` with that of `Λ_n`
/// after shifting `λ_n` to zero.
pub fn determinant_index_check(op: &SchrodingerOperator, n: usize) -> Result<DeterminantReport> {
    check_index(n, op.dim())?;
    let pairs = eig_symmetric(op.matrix())?;
    let hyp = HypothesisReport::from_pair(&pairs[n - 1]);
    if !hyp.holds() {
        return Err(Error::HypothesesViolated {
            n,
            reason: if hyp.simple {
                format!("eigenvector vanishes at {:?}", hyp.vanishing_vertices)
            } else {
                format!("gap {:e}", hyp.gap)
            },
        });
    }
    let shifted = op.shifted(pairs[n - 1].value);
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let stencils = FluxHessians::evaluate(&shifted, DEFAULT_FD_STEP)?;
    let lambda = stencils.lambda_hessian(n)?;
    let det = stencils.functional_hessian(|s| sign * s.iter().product::<f64>())?;
    let (lambda_index, lambda_nullity) = lambda.signature()?;
    let (det_index, det_nullity) = det.signature()?;

    let g = shifted.graph();
    let beta = g.cycle_dimension();
    let mut factorization_discrepancy = 0.0f64;
    for j in 0..beta {
        for s in [FACTORIZATION_STEP, -FACTORIZATION_STEP] {
            let mut theta = vec![0.0; beta];
            theta[j] = s;
            let alpha = crate::magnetic::FluxCoordinates { theta }.to_one_form(g);
            let m = magnetic_operator(&shifted, &MagneticField::new(alpha))?;
            let spectrum = eigenvalues_hermitian(&m)?;
            let lu = m.determinant();
            let want = reduced_product(&spectrum, n);
            let got = lu.re / spectrum[n - 1];
            factorization_discrepancy =
                factorization_discrepancy.max((got - want).abs() / want.abs());
        }
    }
    let centre = eigenvalues_symmetric(shifted.matrix())?;
    Ok(DeterminantReport {
        n,
        beta,
        signed_reduced_determinant: sign * reduced_product(&centre, n),
        lambda_index,
        lambda_nullity,
        det_index,
        det_nullity,
        factorization_discrepancy,
    })
}
