//! Dense eigensolvers.
//!
//! Real symmetric matrices are diagonalized by cyclic Jacobi rotations.
//! Complex Hermitian matrices `A + iB` go through the real embedding
//! `[[A, -B], [B, A]]`, whose spectrum is the Hermitian spectrum with every
//! eigenvalue doubled; pairs are matched back up and the complex vectors
//! reassembled from the real ones.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{cdot, cnorm};
use crate::operator::SchrodingerOperator;

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;
/// Relative gap below which an eigenvalue is reported as degenerate.
pub const GAP_THRESHOLD: f64 = 1e-8;
/// Entries below this fraction of `‖φ‖∞` count as vanishing.
pub const VANISH_THRESHOLD: f64 = 1e-8;
const PAIRING_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair<T> {
    /// 1-based position in the ascending spectrum.
    pub n: usize,
    pub value: f64,
    /// Unit vector, phase fixed so its first large entry is real positive.
    pub vector: DVector<T>,
    /// Distance to the nearest other eigenvalue (`inf` for a 1×1 matrix).
    pub gap: f64,
    pub simple: bool,
}

/// Entries that can be rotated to make a chosen coordinate real and positive.
pub trait Phase: nalgebra::Scalar + Copy {
    fn modulus(&self) -> f64;
    /// Multiplier that maps `self` onto the positive real axis.
    fn unphase(&self) -> Self;
    fn mul(self, other: Self) -> Self;
}

impl Phase for f64 {
    fn modulus(&self) -> f64 {
        self.abs()
    }
    fn unphase(&self) -> Self {
        self.signum()
    }
    fn mul(self, other: Self) -> Self {
        self * other
    }
}

impl Phase for Complex64 {
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn unphase(&self) -> Self {
        self.conj() / self.norm()
    }
    fn mul(self, other: Self) -> Self {
        self * other
    }
}

/// Rotates `v` so that at `x₀`, the smallest index with `|v(x₀)| ≥ ½‖v‖∞`,
/// the entry is real and positive. Returns `x₀`.
pub fn fix_phase<T: Phase>(v: &mut DVector<T>) -> usize {
    let vmax = v.iter().map(Phase::modulus).fold(0.0, f64::max);
    let Some(x0) = v.iter().position(|z| z.modulus() >= 0.5 * vmax) else {
        return 0;
    };
    if vmax > 0.0 {
        let u = v[x0].unphase();
        for z in v.iter_mut() {
            *z = z.mul(u);
        }
    }
    x0
}

/// Cyclic Jacobi on a symmetric matrix. Returns unsorted eigenvalues and, if
/// requested, the matrix of eigenvectors (as columns).
fn jacobi(m: &DMatrix<f64>, want_vectors: bool) -> Result<(Vec<f64>, Option<DMatrix<f64>>)> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut v = want_vectors.then(|| DMatrix::<f64>::identity(n, n));
    let total = a.norm();
    let off = |a: &DMatrix<f64>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)] * a[(i, j)];
                }
            }
        }
        s.sqrt()
    };
    let target = JACOBI_TOL * total;
    let mut sweeps = 0;
    let mut current = off(&a);
    while current > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off: current });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let (arp, arq) = (a[(r, p)], a[(r, q)]);
                    a[(r, p)] = c * arp - s * arq;
                    a[(r, q)] = s * arp + c * arq;
                }
                for r in 0..n {
                    let (apr, aqr) = (a[(p, r)], a[(q, r)]);
                    a[(p, r)] = c * apr - s * aqr;
                    a[(q, r)] = s * apr + c * aqr;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                if let Some(v) = v.as_mut() {
                    for r in 0..n {
                        let (vrp, vrq) = (v[(r, p)], v[(r, q)]);
                        v[(r, p)] = c * vrp - s * vrq;
                        v[(r, q)] = s * vrp + c * vrq;
                    }
                }
            }
        }
        current = off(&a);
    }
    Ok(((0..n).map(|i| a[(i, i)]).collect(), v))
}

fn gaps(values: &[f64]) -> Vec<f64> {
    (0..values.len())
        .map(|i| {
            let below = if i > 0 { values[i] - values[i - 1] } else { f64::INFINITY };
            let above = if i + 1 < values.len() { values[i + 1] - values[i] } else { f64::INFINITY };
            below.min(above)
        })
        .collect()
}

fn spectral_scale(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Sorted eigenvalues of a real symmetric matrix.
pub fn eigenvalues_symmetric(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let (mut values, _) = jacobi(m, false)?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Full sorted eigendecomposition of a real symmetric matrix.
pub fn eig_symmetric(m: &DMatrix<f64>) -> Result<Vec<Eigenpair<f64>>> {
    let (values, vectors) = jacobi(m, true)?;
    let vectors = vectors.expect("vectors requested");
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let threshold = GAP_THRESHOLD * (1.0 + spectral_scale(&sorted));
    Ok(order
        .iter()
        .zip(gaps(&sorted))
        .enumerate()
        .map(|(k, (&i, gap))| {
            let mut vector = vectors.column(i).into_owned();
            vector /= vector.norm();
            fix_phase(&mut vector);
            Eigenpair { n: k + 1, value: values[i], vector, gap, simple: gap > threshold }
        })
        .collect())
}

fn embedding(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut e = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            e[(i, j)] = z.re;
            e[(i + n, j + n)] = z.re;
            e[(i, j + n)] = -z.im;
            e[(i + n, j)] = z.im;
        }
    }
    e
}

fn pair_up(sorted: &[f64], scale: f64) -> Result<Vec<f64>> {
    let tol = PAIRING_TOL * (1.0 + scale);
    sorted
        .chunks(2)
        .map(|p| {
            if (p[1] - p[0]).abs() <= tol {
                Ok(0.5 * (p[0] + p[1]))
            } else {
                Err(Error::EmbeddingPairingFailure(format!(
                    "eigenvalues {} and {} differ by more than {tol:e}",
                    p[0], p[1]
                )))
            }
        })
        .collect()
}

/// Sorted eigenvalues of a complex Hermitian matrix.
pub fn eigenvalues_hermitian(m: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let values = eigenvalues_symmetric(&embedding(m))?;
    pair_up(&values, spectral_scale(&values))
}

/// Full sorted eigendecomposition of a complex Hermitian matrix.
pub fn eig_hermitian(m: &DMatrix<Complex64>) -> Result<Vec<Eigenpair<Complex64>>> {
    let n = m.nrows();
    let real = eig_symmetric(&embedding(m))?;
    let doubled: Vec<f64> = real.iter().map(|p| p.value).collect();
    let scale = spectral_scale(&doubled);
    let values = pair_up(&doubled, scale)?;
    let tol = PAIRING_TOL * (1.0 + scale);

    // Group pairs into clusters of numerically equal eigenvalues; a cluster
    // of k pairs spans a k-dimensional complex eigenspace.
    let mut vectors: Vec<DVector<Complex64>> = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= tol {
            end += 1;
        }
        let mut candidates: Vec<DVector<Complex64>> = real[2 * start..2 * end]
            .iter()
            .map(|p| {
                DVector::from_fn(n, |i, _| Complex64::new(p.vector[i], p.vector[i + n]))
            })
            .collect();
        let mut chosen: Vec<DVector<Complex64>> = Vec::new();
        for _ in start..end {
            for c in candidates.iter_mut() {
                for q in &chosen {
                    let proj = cdot(c, q);
                    *c -= q * proj;
                }
            }
            let (best, norm) = candidates
                .iter()
                .enumerate()
                .map(|(i, c)| (i, cnorm(c)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("cluster is non-empty");
            if norm < 1e-6 {
                return Err(Error::EmbeddingPairingFailure(
                    "could not extract independent complex eigenvectors".into(),
                ));
            }
            let v = candidates.swap_remove(best).unscale(norm);
            chosen.push(v);
        }
        vectors.extend(chosen);
        start = end;
    }

    let threshold = GAP_THRESHOLD * (1.0 + spectral_scale(&values));
    Ok(values
        .iter()
        .zip(vectors)
        .zip(gaps(&values))
        .enumerate()
        .map(|(k, ((&value, mut vector), gap))| {
            fix_phase(&mut vector);
            Eigenpair { n: k + 1, value, vector, gap, simple: gap > threshold }
        })
        .collect())
}

/// Whether `λ_n` is simple and `φ_n` vanishes nowhere.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct HypothesisReport {
    pub n: usize,
    pub value: f64,
    pub gap: f64,
    pub simple: bool,
    pub nonvanishing: bool,
    pub min_abs_entry: f64,
    /// Vertices where `|φ_n(x)| ≤ VANISH_THRESHOLD · ‖φ_n‖∞`.
    pub vanishing_vertices: Vec<usize>,
}

impl HypothesisReport {
    pub fn holds(&self) -> bool {
        self.simple && self.nonvanishing
    }

    pub(crate) fn from_pair(pair: &Eigenpair<f64>) -> Self {
        let vmax = pair.vector.amax();
        let vanishing_vertices: Vec<usize> = pair
            .vector
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() <= VANISH_THRESHOLD * vmax)
            .map(|(x, _)| x)
            .collect();
        Self {
            n: pair.n,
            value: pair.value,
            gap: pair.gap,
            simple: pair.simple,
            nonvanishing: vanishing_vertices.is_empty(),
            min_abs_entry: pair.vector.iter().fold(f64::INFINITY, |a, v| a.min(v.abs())),
            vanishing_vertices,
        }
    }
}

pub(crate) fn check_index(n: usize, size: usize) -> Result<()> {
    if n == 0 || n > size {
        Err(Error::IndexOutOfRange { n, size })
    } else {
        Ok(())
    }
}

/// Checks the two hypotheses under which the nodal defect equals the
/// magnetic Morse index.
pub fn check_hypotheses(op: &SchrodingerOperator, n: usize) -> Result<HypothesisReport> {
    check_index(n, op.dim())?;
    let pairs = eig_symmetric(op.matrix())?;
    Ok(HypothesisReport::from_pair(&pairs[n - 1]))
}
