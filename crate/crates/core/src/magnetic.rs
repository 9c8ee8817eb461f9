//! Magnetic Schrödinger operators `H_B`, gauge transforms, flux coordinates
//! and finite-difference derivatives of `Λ_n : θ ↦ λ_n(H_θ)` at `θ = 0`.
//!
//! Flux coordinates put one angle on each chord of the BFS spanning tree and
//! zero on tree edges; every field is gauge equivalent to exactly one such
//! configuration (modulo 2π), so they are coordinates on the gauge quotient.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{check_len, Graph, OneForm};
use crate::operator::SchrodingerOperator;
use crate::linalg::{cdot, to_complex_vec};
use crate::spectral::{
    check_index, eig_hermitian, eig_symmetric, eigenvalues_hermitian, eigenvalues_symmetric, Eigenpair, GAP_THRESHOLD,
};

/// Default finite-difference step in flux coordinates.
pub const DEFAULT_FD_STEP: f64 = 1e-3;
const RICHARDSON_TOL: f64 = 1e-4;

/// A magnetic field `B([x,y]) = e^{iγ_xy}` given by its angle 1-form.
#[derive(Debug, Clone, PartialEq)]
pub struct MagneticField {
    pub alpha: OneForm,
}

impl MagneticField {
    pub fn new(alpha: OneForm) -> Self {
        Self { alpha }
    }

    pub fn trivial(g: &Graph) -> Self {
        Self { alpha: OneForm::zeros(g) }
    }

    /// `B` on the oriented edge `[x, y]`.
    pub fn phase(&self, g: &Graph, x: usize, y: usize) -> Option<Complex64> {
        self.alpha.on(g, x, y).map(|a| Complex64::from_polar(1.0, a))
    }

    /// The field with angle `γ + df`.
    pub fn gauge_transform(&self, g: &Graph, f: &[f64]) -> Result<Self> {
        check_len(g.num_edges(), self.alpha.len())?;
        let df = g.differential(f)?;
        Ok(Self { alpha: self.alpha.add(&df) })
    }
}

/// `U = diag(e^{i f(x)})`. With it, `H_{γ+df} = U* H_γ U`.
pub fn gauge_matrix(f: &[f64]) -> DMatrix<Complex64> {
    DMatrix::from_diagonal(&DVector::from_iterator(
        f.len(),
        f.iter().map(|&a| Complex64::from_polar(1.0, a)),
    ))
}

/// One angle per chord of the spanning tree.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxCoordinates {
    pub theta: Vec<f64>,
}

impl FluxCoordinates {
    pub fn zero(g: &Graph) -> Self {
        Self { theta: vec![0.0; g.cycle_dimension()] }
    }

    pub fn new(g: &Graph, theta: Vec<f64>) -> Result<Self> {
        check_len(g.cycle_dimension(), theta.len())?;
        Ok(Self { theta })
    }

    /// The 1-form equal to `theta` on chords and zero on tree edges.
    pub fn to_one_form(&self, g: &Graph) -> OneForm {
        let mut alpha = OneForm::zeros(g);
        for (&k, &t) in g.chords().iter().zip(&self.theta) {
            alpha.0[k] = t;
        }
        alpha
    }

    /// Gauge-reduces an arbitrary 1-form: returns `f` with `γ + df = 0` on
    /// every tree edge, together with the resulting chord angles.
    pub fn reduce(g: &Graph, gamma: &OneForm) -> Result<(Vec<f64>, Self)> {
        check_len(g.num_edges(), gamma.len())?;
        let mut f = vec![0.0; g.num_vertices()];
        for &x in g.bfs_order() {
            if let Some((p, k)) = g.bfs_parent(x) {
                // (γ + df)[tail, head] = γ_k + f(head) - f(tail) = 0.
                let e = g.edge(k);
                f[x] = if e.tail == p { f[p] - gamma.0[k] } else { f[p] + gamma.0[k] };
            }
        }
        let reduced = gamma.add(&g.differential(&f)?);
        let theta = g.chords().iter().map(|&k| reduced.0[k]).collect();
        Ok((f, Self { theta }))
    }
}

/// `(H_B)_xx = h_xx`, `(H_B)_xy = h_xy e^{iγ_xy}` on edges.
pub fn magnetic_operator(op: &SchrodingerOperator, b: &MagneticField) -> Result<DMatrix<Complex64>> {
    let g = op.graph();
    if b.alpha.len() != g.num_edges() {
        return Err(Error::GraphMismatch);
    }
    let h = op.matrix();
    let mut m = h.map(|v| Complex64::new(v, 0.0));
    for (k, e) in g.edges().iter().enumerate() {
        let z = Complex64::from_polar(h[(e.tail, e.head)], b.alpha.0[k]);
        m[(e.tail, e.head)] = z;
        m[(e.head, e.tail)] = z.conj();
    }
    Ok(m)
}

/// Sorted spectrum of `H_θ` for flux coordinates `theta`.
pub fn magnetic_spectrum(op: &SchrodingerOperator, theta: &[f64]) -> Result<Vec<f64>> {
    let g = op.graph();
    check_len(g.cycle_dimension(), theta.len())?;
    if theta.iter().all(|&t| t == 0.0) {
        return eigenvalues_symmetric(op.matrix());
    }
    let alpha = FluxCoordinates { theta: theta.to_vec() }.to_one_form(g);
    eigenvalues_hermitian(&magnetic_operator(op, &MagneticField::new(alpha))?)
}

/// `Λ_n(θ)`, the n-th eigenvalue (1-based) of the magnetic operator.
pub fn lambda_n(op: &SchrodingerOperator, n: usize, theta: &FluxCoordinates) -> Result<f64> {
    check_index(n, op.dim())?;
    Ok(magnetic_spectrum(op, &theta.theta)?[n - 1])
}

fn gap_at(spectrum: &[f64], n: usize) -> f64 {
    let i = n - 1;
    let below = if i > 0 { spectrum[i] - spectrum[i - 1] } else { f64::INFINITY };
    let above = if i + 1 < spectrum.len() { spectrum[i + 1] - spectrum[i] } else { f64::INFINITY };
    below.min(above)
}

fn gap_threshold(spectrum: &[f64]) -> f64 {
    GAP_THRESHOLD * (1.0 + spectrum.iter().fold(0.0f64, |a, v| a.max(v.abs())))
}

/// `H_θ - H_0` applied to `v`; only chords carry flux.
fn flux_increment(op: &SchrodingerOperator, theta: &[f64], v: &DVector<Complex64>) -> DVector<Complex64> {
    let g = op.graph();
    let mut out = DVector::zeros(v.len());
    for (&k, &t) in g.chords().iter().zip(theta) {
        if t == 0.0 {
            continue;
        }
        let e = g.edge(k);
        // e^{it} - 1 without cancellation.
        let s = (0.5 * t).sin();
        let z = Complex64::new(-2.0 * s * s, t.sin()) * op.edge_weight(k);
        out[e.tail] += z * v[e.head];
        out[e.head] += z.conj() * v[e.tail];
    }
    out
}

/// Eigenpairs of the field-free operator, as complex vectors.
fn base_pairs(op: &SchrodingerOperator) -> Result<Vec<Eigenpair<Complex64>>> {
    Ok(eig_symmetric(op.matrix())?
        .into_iter()
        .map(|p| Eigenpair { n: p.n, value: p.value, vector: to_complex_vec(&p.vector), gap: p.gap, simple: p.simple })
        .collect())
}

/// One stencil point: the spectrum of `H_θ` and the shifts `λ_k(θ) - λ_k(0)`.
///
/// A shift is computed as `⟨(H_θ - H_0) ψ_k(θ), ψ_k(0)⟩ / ⟨ψ_k(θ), ψ_k(0)⟩`,
/// which is exact for exact eigenvectors and whose rounding error scales with
/// `‖H_θ - H_0‖` rather than `‖H‖`. When the overlap is too small the plain
/// difference is used instead.
#[derive(Debug, Clone)]
struct StencilPoint {
    spectrum: Vec<f64>,
    shift: Vec<f64>,
}

impl StencilPoint {
    fn evaluate(op: &SchrodingerOperator, theta: &[f64], base: &[Eigenpair<Complex64>]) -> Result<Self> {
        if theta.iter().all(|&t| t == 0.0) {
            let spectrum: Vec<f64> = base.iter().map(|p| p.value).collect();
            return Ok(Self { shift: vec![0.0; spectrum.len()], spectrum });
        }
        let alpha = FluxCoordinates { theta: theta.to_vec() }.to_one_form(op.graph());
        let pairs = eig_hermitian(&magnetic_operator(op, &MagneticField::new(alpha))?)?;
        let shift = pairs
            .iter()
            .zip(base)
            .map(|(p, b)| {
                let overlap = cdot(&p.vector, &b.vector);
                if overlap.norm() >= 0.5 {
                    (cdot(&flux_increment(op, theta, &p.vector), &b.vector) / overlap).re
                } else {
                    p.value - b.value
                }
            })
            .collect();
        Ok(Self { spectrum: pairs.iter().map(|p| p.value).collect(), shift })
    }
}

/// Spectra of `H_θ` on the central-difference stencil around `θ = 0`: the
/// centre, `±h e_i`, and `±h e_i ± h e_j` for `i < j`. Each point is an
/// independent eigen-decomposition.
#[derive(Debug, Clone)]
pub struct SpectralStencil {
    pub beta: usize,
    pub h: f64,
    center: StencilPoint,
    axis: Vec<[StencilPoint; 2]>,
    /// Keyed by `(i, j)` with `i < j`, in row-major order: `[++, +-, -+, --]`.
    mixed: Vec<[StencilPoint; 4]>,
}

impl SpectralStencil {
    pub fn evaluate(op: &SchrodingerOperator, h: f64) -> Result<Self> {
        let base = base_pairs(op)?;
        Self::with_base(op, h, &base)
    }

    fn with_base(op: &SchrodingerOperator, h: f64, base: &[Eigenpair<Complex64>]) -> Result<Self> {
        let beta = op.graph().cycle_dimension();
        let at = |pairs: &[(usize, f64)]| -> Result<StencilPoint> {
            let mut theta = vec![0.0; beta];
            for &(i, s) in pairs {
                theta[i] += s;
            }
            StencilPoint::evaluate(op, &theta, base)
        };
        let center = at(&[])?;
        let axis = (0..beta)
            .map(|i| Ok([at(&[(i, h)])?, at(&[(i, -h)])?]))
            .collect::<Result<Vec<_>>>()?;
        let mut mixed = Vec::new();
        for i in 0..beta {
            for j in i + 1..beta {
                mixed.push([
                    at(&[(i, h), (j, h)])?,
                    at(&[(i, h), (j, -h)])?,
                    at(&[(i, -h), (j, h)])?,
                    at(&[(i, -h), (j, -h)])?,
                ]);
            }
        }
        Ok(Self { beta, h, center, axis, mixed })
    }

    pub fn center(&self) -> &[f64] {
        &self.center.spectrum
    }

    fn points(&self) -> impl Iterator<Item = &StencilPoint> {
        std::iter::once(&self.center)
            .chain(self.axis.iter().flatten())
            .chain(self.mixed.iter().flatten())
    }

    /// Fails unless `λ_n` stays simple at every stencil point.
    pub fn check_simple(&self, n: usize) -> Result<()> {
        let c = self.center();
        check_index(n, c.len())?;
        let gap0 = gap_at(c, n);
        if gap0 <= gap_threshold(c) {
            return Err(Error::DegenerateEigenvalue { n, gap: gap0 });
        }
        for p in self.points() {
            let gap = gap_at(&p.spectrum, n);
            if gap <= gap_threshold(&p.spectrum) {
                return Err(Error::SimplicityLost { n, gap });
            }
        }
        Ok(())
    }

    /// Central-difference gradient of a scalar functional of the spectrum.
    pub fn gradient(&self, f: impl Fn(&[f64]) -> f64) -> DVector<f64> {
        DVector::from_iterator(
            self.beta,
            self.axis.iter().map(|[p, m]| (f(&p.spectrum) - f(&m.spectrum)) / (2.0 * self.h)),
        )
    }

    /// Central-difference Hessian of a scalar functional of the spectrum.
    pub fn hessian(&self, f: impl Fn(&[f64]) -> f64) -> DMatrix<f64> {
        let f0 = f(self.center());
        self.stencil_hessian(|p| f(&p.spectrum) - f0)
    }

    /// Central-difference Hessian of `λ_n` built from the stable shifts.
    pub fn eigenvalue_hessian(&self, n: usize) -> DMatrix<f64> {
        self.stencil_hessian(|p| p.shift[n - 1])
    }

    /// `d(p)` is the increment of the functional from the centre to `p`.
    fn stencil_hessian(&self, d: impl Fn(&StencilPoint) -> f64) -> DMatrix<f64> {
        let h2 = self.h * self.h;
        let mut hess = DMatrix::zeros(self.beta, self.beta);
        for (i, [p, m]) in self.axis.iter().enumerate() {
            hess[(i, i)] = (d(p) + d(m)) / h2;
        }
        let mut k = 0;
        for i in 0..self.beta {
            for j in i + 1..self.beta {
                let [pp, pm, mp, mm] = &self.mixed[k];
                let v = ((d(pp) + d(mm)) - (d(pm) + d(mp))) / (4.0 * h2);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
                k += 1;
            }
        }
        hess
    }
}

/// Central-difference gradient of `Λ_n` at `θ = 0`.
pub fn fd_gradient(op: &SchrodingerOperator, n: usize, h: f64) -> Result<DVector<f64>> {
    let stencil = SpectralStencil::evaluate(op, h)?;
    stencil.check_simple(n)?;
    Ok(stencil.gradient(|s| s[n - 1]))
}

/// The finite-difference ladder runs over `h · 2^k` for
/// `k = -FINER_LEVELS ..= COARSER_LEVELS + 1`.
const FINER_LEVELS: usize = 4;
const COARSER_LEVELS: usize = 2;
/// Eigenvalues of an FD Hessian within `INDEX_SAFETY` times its error
/// estimate, or within `INDEX_FLOOR · (1 + ‖H‖)`, count as zero.
const INDEX_SAFETY: f64 = 10.0;
const INDEX_FLOOR: f64 = 1e-8;

/// A finite-difference Hessian at step `h`, cross-checked against step `2h`,
/// plus the best Richardson estimate along a ladder of doubling steps.
#[derive(Debug, Clone, PartialEq)]
pub struct FdHessian {
    /// Hessian at step `h`.
    pub matrix: DMatrix<f64>,
    /// Hessian at step `2h`.
    pub coarse: DMatrix<f64>,
    /// `max |H_h - H_2h|`.
    pub discrepancy: f64,
    /// Richardson combination `(4 H_s - H_2s) / 3` at the step `s` whose
    /// estimated error is smallest.
    pub extrapolated: DMatrix<f64>,
    pub extrapolation_step: f64,
    /// `max |E_s - E_2s|`, used as the error of `extrapolated`.
    pub error_estimate: f64,
}

impl FdHessian {
    /// `ladder[k]` is the Hessian at step `first · 2^k`; `ladder[anchor]`
    /// and `ladder[anchor + 1]` are the steps `h` and `2h`.
    pub(crate) fn from_ladder(ladder: Vec<DMatrix<f64>>, first: f64, anchor: usize) -> Result<Self> {
        let fine = &ladder[anchor];
        let coarse = &ladder[anchor + 1];
        let discrepancy = if fine.is_empty() { 0.0 } else { (fine - coarse).amax() };
        let scale = 1.0 + spectral_norm(fine)?;
        if !(discrepancy <= RICHARDSON_TOL * scale) {
            return Err(Error::IllConditioned { discrepancy });
        }
        let rich: Vec<DMatrix<f64>> =
            ladder.windows(2).map(|w| (&w[0] * 4.0 - &w[1]) / 3.0).collect();
        let mut best = (0, discrepancy);
        for k in 0..rich.len().saturating_sub(1) {
            let err = if fine.is_empty() { 0.0 } else { (&rich[k] - &rich[k + 1]).amax() };
            if k == 0 || err < best.1 {
                best = (k, err);
            }
        }
        Ok(Self {
            matrix: fine.clone(),
            coarse: coarse.clone(),
            discrepancy,
            extrapolated: rich[best.0].clone(),
            extrapolation_step: first * (1u64 << best.0) as f64,
            error_estimate: best.1,
        })
    }

    /// Zero tolerance for eigenvalues of `extrapolated`.
    pub fn index_tolerance(&self) -> Result<f64> {
        let floor = INDEX_FLOOR * (1.0 + spectral_norm(&self.extrapolated)?);
        Ok((INDEX_SAFETY * self.error_estimate).max(floor))
    }

    /// `(index, nullity)` of the extrapolated Hessian.
    pub fn signature(&self) -> Result<(usize, usize)> {
        morse_index_of_matrix(&self.extrapolated, self.index_tolerance()?)
    }
}

/// Stencils on the step ladder around `h`, shared by every functional of
/// the spectrum.
#[derive(Debug, Clone)]
pub struct FluxHessians {
    pub h: f64,
    /// `levels[k]` has step `h · 2^(k - FINER_LEVELS)`.
    pub levels: Vec<SpectralStencil>,
}

impl FluxHessians {
    pub fn evaluate(op: &SchrodingerOperator, h: f64) -> Result<Self> {
        let base = base_pairs(op)?;
        let first = h / (1u64 << FINER_LEVELS) as f64;
        let levels = (0..=FINER_LEVELS + COARSER_LEVELS + 1)
            .map(|k| SpectralStencil::with_base(op, first * (1u64 << k) as f64, &base))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { h, levels })
    }

    fn first_step(&self) -> f64 {
        self.levels[0].h
    }

    /// Hessian of `Λ_n`. Simplicity must hold up to the `2h` stencil; the
    /// ladder stops at the first larger step where it fails.
    pub fn lambda_hessian(&self, n: usize) -> Result<FdHessian> {
        let must = FINER_LEVELS + 2;
        for s in &self.levels[..must] {
            s.check_simple(n)?;
        }
        let usable = must + self.levels[must..].iter().take_while(|s| s.check_simple(n).is_ok()).count();
        let ladder = self.levels[..usable].iter().map(|s| s.eigenvalue_hessian(n)).collect();
        FdHessian::from_ladder(ladder, self.first_step(), FINER_LEVELS)
    }

    /// Hessian of an arbitrary functional of the spectrum, from plain
    /// differences.
    pub fn functional_hessian(&self, f: impl Fn(&[f64]) -> f64) -> Result<FdHessian> {
        let ladder = self.levels.iter().map(|s| s.hessian(&f)).collect();
        FdHessian::from_ladder(ladder, self.first_step(), FINER_LEVELS)
    }
}

/// Symmetrized central-difference Hessian of `Λ_n` at `θ = 0` in flux
/// coordinates.
pub fn fd_hessian(op: &SchrodingerOperator, n: usize, h: f64) -> Result<FdHessian> {
    check_index(n, op.dim())?;
    FluxHessians::evaluate(op, h)?.lambda_hessian(n)
}

pub fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(eigenvalues_symmetric(m)?.iter().fold(0.0f64, |a, v| a.max(v.abs())))
}

/// Number of eigenvalues below `-tol` and within `[-tol, tol]`.
pub fn morse_index_of_matrix(m: &DMatrix<f64>, tol: f64) -> Result<(usize, usize)> {
    if m.is_empty() {
        return Ok((0, 0));
    }
    let values = eigenvalues_symmetric(&((m + m.transpose()) * 0.5))?;
    let index = values.iter().filter(|&&v| v < -tol).count();
    let nullity = values.iter().filter(|&&v| v.abs() <= tol).count();
    Ok((index, nullity))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cycle(n: usize) -> Graph {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::new(n, &edges).unwrap()
    }

    #[test]
    fn trivial_field_reproduces_base_operator() {
        let op = SchrodingerOperator::random_default(cycle(5), 3);
        let m = magnetic_operator(&op, &MagneticField::trivial(op.graph())).unwrap();
        assert_eq!(m, op.matrix().map(|v| Complex64::new(v, 0.0)));
    }

    #[test]
    fn field_on_wrong_graph_is_rejected() {
        let op = SchrodingerOperator::laplacian(cycle(4));
        let b = MagneticField::new(OneForm(vec![0.0; 3]));
        assert_eq!(magnetic_operator(&op, &b), Err(Error::GraphMismatch));
    }

    #[test]
    fn magnetic_cycle_matches_circulant() {
        // C4 Laplacian with total flux a: eigenvalues 2 - 2 cos((2πk + a)/4).
        let op = SchrodingerOperator::laplacian(cycle(4));
        for a in [0.3, 1.0, -2.5] {
            let spectrum = magnetic_spectrum(&op, &[a]).unwrap();
            let mut want: Vec<f64> =
                (0..4).map(|k| 2.0 - 2.0 * ((2.0 * PI * k as f64 + a) / 4.0).cos()).collect();
            want.sort_by(f64::total_cmp);
            for (s, w) in spectrum.iter().zip(&want) {
                assert!((s - w).abs() < 1e-12, "{s} vs {w}");
            }
        }
        let l1 = lambda_n(&op, 1, &FluxCoordinates { theta: vec![1.2] }).unwrap();
        assert!((l1 - (2.0 - 2.0 * (1.2f64 / 4.0).cos())).abs() < 1e-12);
    }

    #[test]
    fn gauge_transform_is_unitary_conjugation() {
        let op = SchrodingerOperator::random_default(cycle(4), 11);
        let g = op.graph();
        let b = MagneticField::new(OneForm(vec![0.2, -0.7, 1.1, 0.4]));
        let f = [0.3, -1.0, 2.0, 0.5];
        let b2 = b.gauge_transform(g, &f).unwrap();
        let u = gauge_matrix(&f);
        let lhs = magnetic_operator(&op, &b2).unwrap();
        let rhs = u.adjoint() * magnetic_operator(&op, &b).unwrap() * u;
        assert!((lhs - rhs).norm() < 1e-13);
    }

    #[test]
    fn reduction_zeroes_tree_edges() {
        let g = Graph::new(5, &[(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)]).unwrap();
        let gamma = OneForm(vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
        let (f, theta) = FluxCoordinates::reduce(&g, &gamma).unwrap();
        let reduced = gamma.add(&g.differential(&f).unwrap());
        for &k in g.spanning_tree() {
            assert!(reduced.0[k].abs() < 1e-15);
        }
        // Holonomy of triangle 0-1-2 is γ01 + γ12 - γ02.
        assert!((theta.theta[0] - (0.1 + 0.3 - 0.2)).abs() < 1e-15);
    }

    #[test]
    fn morse_index_examples() {
        let d = |v: &[f64]| DMatrix::from_diagonal(&DVector::from_column_slice(v));
        assert_eq!(morse_index_of_matrix(&d(&[1.0, -2.0, 3.0]), 1e-8).unwrap(), (1, 0));
        assert_eq!(morse_index_of_matrix(&DMatrix::zeros(2, 2), 1e-8).unwrap(), (0, 2));
        assert_eq!(morse_index_of_matrix(&d(&[-1.0, -1.0, 0.0]), 1e-8).unwrap(), (2, 1));
        assert_eq!(morse_index_of_matrix(&DMatrix::zeros(0, 0), 1e-8).unwrap(), (0, 0));
    }

    #[test]
    fn tree_has_empty_derivatives() {
        let op = SchrodingerOperator::random_default(Graph::new(3, &[(0, 1), (1, 2)]).unwrap(), 2);
        assert_eq!(fd_gradient(&op, 2, DEFAULT_FD_STEP).unwrap().len(), 0);
        let hess = fd_hessian(&op, 2, DEFAULT_FD_STEP).unwrap();
        assert_eq!(hess.matrix.shape(), (0, 0));
        assert_eq!(hess.signature().unwrap(), (0, 0));
    }

    #[test]
    fn degenerate_eigenvalue_is_refused() {
        // C4 Laplacian: eigenvalue 2 is double.
        let op = SchrodingerOperator::laplacian(cycle(4));
        assert!(matches!(fd_hessian(&op, 2, 1e-3), Err(Error::DegenerateEigenvalue { .. })));
    }
}
