//! Hill operators `-d²/dx² + q(x)` with 1-periodic `q`: monodromy,
//! discriminant, band edges and the Floquet eigenvalues `Λ_n(α)`.
//!
//! For even potentials (`q(x) = q(-x)`) the half-period monodromy
//! `[[a, b], [c, d]]` factors the discriminant exactly:
//! `Δ - 2 = 4 b c` and `Δ + 2 = 4 a d`. Each factor has only simple roots, so
//! band edges are located as roots of the factors. This resolves edges whose
//! gap is far below what `Δ ∓ 2` itself can separate in double precision.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix2;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_STEPS: usize = 4096;
pub const DEFAULT_SCAN_STEP: f64 = 0.05;
const BISECTION_TOL: f64 = 1e-10;
const DERIVATIVE_STEP: f64 = 1e-5;
/// Two factor roots closer than this (relative) form a double edge.
const COINCIDENCE_TOL: f64 = 1e-12;
const TANGENCY_TOL: f64 = 1e-8;
const INTERLACING_TOL: f64 = 1e-9;
const EVENNESS_TOL: f64 = 1e-12;
const EDGE_RESIDUAL_TOL: f64 = 1e-9;

type PotentialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    /// `c + Σ_k a_k cos(2πkx) + b_k sin(2πkx)`.
    Fourier { constant: f64, cos: Vec<f64>, sin: Vec<f64> },
    Function(PotentialFn),
}

/// A real 1-periodic potential.
#[derive(Clone)]
pub struct Potential(Repr);

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Fourier { constant, cos, sin } => f
                .debug_struct("Potential")
                .field("constant", constant)
                .field("cos", cos)
                .field("sin", sin)
                .finish(),
            Repr::Function(_) => f.write_str("Potential(<function>)"),
        }
    }
}

impl Potential {
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::fourier(c, &[])
    }

    /// `a cos(2πx)`.
    pub fn cosine(a: f64) -> Self {
        Self::fourier(0.0, &[(a, 0.0)])
    }

    /// `constant + Σ_k a_k cos(2πkx) + b_k sin(2πkx)` with `terms[k-1] = (a_k, b_k)`.
    pub fn fourier(constant: f64, terms: &[(f64, f64)]) -> Self {
        Self(Repr::Fourier {
            constant,
            cos: terms.iter().map(|t| t.0).collect(),
            sin: terms.iter().map(|t| t.1).collect(),
        })
    }

    /// Any function; it is evaluated at `x mod 1`.
    pub fn from_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self(Repr::Function(Arc::new(f)))
    }

    /// Trigonometric interpolation of uniform samples `q(k / M)`.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let m = samples.len();
        if m == 0 {
            return Err(Error::PotentialSpec("no samples".into()));
        }
        let constant = samples.iter().sum::<f64>() / m as f64;
        let mut terms = Vec::new();
        for k in 1..=(m - 1) / 2 {
            let (mut a, mut b) = (0.0, 0.0);
            for (j, &s) in samples.iter().enumerate() {
                let t = 2.0 * PI * (k * j) as f64 / m as f64;
                a += s * t.cos();
                b += s * t.sin();
            }
            terms.push((2.0 * a / m as f64, 2.0 * b / m as f64));
        }
        if m.is_multiple_of(2) {
            let k = m / 2;
            let a = samples
                .iter()
                .enumerate()
                .map(|(j, &s)| if j % 2 == 0 { s } else { -s })
                .sum::<f64>()
                / m as f64;
            terms.resize(k, (0.0, 0.0));
            terms[k - 1] = (a, 0.0);
        }
        Ok(Self::fourier(constant, &terms))
    }

    /// Parses `zero`, `const:c`, `cos:a` or `fourier:a1,b1,a2,b2,…`.
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |msg: String| Error::PotentialSpec(format!("{spec:?}: {msg}"));
        let number = |s: &str| -> Result<f64> {
            let v: f64 = s.trim().parse().map_err(|_| bad(format!("{s:?} is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad(format!("{s:?} is not finite")))
            }
        };
        let spec_trim = spec.trim();
        if spec_trim == "zero" {
            return Ok(Self::zero());
        }
        let (head, tail) = spec_trim
            .split_once(':')
            .ok_or_else(|| bad("expected zero, const:c, cos:a or fourier:a1,b1,…".into()))?;
        match head {
            "const" => Ok(Self::constant(number(tail)?)),
            "cos" => Ok(Self::cosine(number(tail)?)),
            "fourier" => {
                let values = tail.split(',').map(number).collect::<Result<Vec<_>>>()?;
                if values.len() % 2 != 0 {
                    return Err(bad("fourier coefficients come in (a_k, b_k) pairs".into()));
                }
                let terms: Vec<(f64, f64)> = values.chunks(2).map(|c| (c[0], c[1])).collect();
                Ok(Self::fourier(0.0, &terms))
            }
            other => Err(bad(format!("unknown potential kind {other:?}"))),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.rem_euclid(1.0);
        match &self.0 {
            Repr::Fourier { constant, cos, sin } => {
                let mut v = *constant;
                for (k, (a, b)) in cos.iter().zip(sin).enumerate() {
                    let t = 2.0 * PI * (k + 1) as f64 * x;
                    v += a * t.cos() + b * t.sin();
                }
                v
            }
            Repr::Function(f) => f(x),
        }
    }

    /// `q(x) = q(-x)`: exact for Fourier data, sampled for functions.
    pub fn is_even(&self) -> bool {
        match &self.0 {
            Repr::Fourier { constant, cos, sin } => {
                let scale = constant.abs() + cos.iter().chain(sin).map(|c| c.abs()).sum::<f64>();
                sin.iter().all(|&b| b.abs() <= EVENNESS_TOL * (1.0 + scale))
            }
            Repr::Function(_) => {
                let xs: Vec<f64> = (0..=256).map(|j| j as f64 / 512.0).collect();
                let scale = 1.0 + xs.iter().map(|&x| self.eval(x).abs()).fold(0.0, f64::max);
                xs.iter().all(|&x| (self.eval(x) - self.eval(1.0 - x)).abs() <= EVENNESS_TOL * scale)
            }
        }
    }
}

/// Band-edge type: `Δ = 2` (periodic) or `Δ = -2` (antiperiodic).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Periodic,
    Antiperiodic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandEdge {
    pub n: usize,
    pub kind: EdgeKind,
    pub lambda: f64,
    pub delta_prime: f64,
    pub simple: bool,
}

/// A root of `Δ ∓ 2` (counted with multiplicity by repetition).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Root {
    lambda: f64,
    delta_prime: f64,
    simple: bool,
}

#[derive(Debug, Clone)]
pub struct HillOperator {
    potential: Potential,
    steps: usize,
    /// `q` at multiples of half a step, `2 steps + 1` values.
    samples: Vec<f64>,
    even: bool,
}

impl HillOperator {
    /// `steps` RK4 steps per period; must be even and positive.
    pub fn new(potential: Potential, steps: usize) -> Result<Self> {
        if steps == 0 || !steps.is_multiple_of(2) {
            return Err(Error::InvalidRange {
                lo: steps as f64,
                hi: steps as f64,
                reason: "step count must be even and positive".into(),
            });
        }
        let samples = (0..=2 * steps).map(|j| potential.eval(j as f64 / (2 * steps) as f64)).collect();
        let even = potential.is_even();
        Ok(Self { potential, steps, samples, even })
    }

    pub fn with_default_steps(potential: Potential) -> Self {
        Self::new(potential, DEFAULT_STEPS).expect("default step count is valid")
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    pub fn min_potential(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_potential(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `[[y₁, y₂], [y₁', y₂']]` at `x = steps_taken / steps`.
    fn propagate(&self, lambda: f64, steps_taken: usize) -> Matrix2<f64> {
        let h = 1.0 / self.steps as f64;
        // Columns are (y, y') for the two solutions.
        let mut y = [1.0, 0.0];
        let mut p = [0.0, 1.0];
        for k in 0..steps_taken {
            let w0 = self.samples[2 * k] - lambda;
            let w1 = self.samples[2 * k + 1] - lambda;
            let w2 = self.samples[2 * k + 2] - lambda;
            for s in 0..2 {
                let (y0, p0) = (y[s], p[s]);
                let k1y = p0;
                let k1p = w0 * y0;
                let k2y = p0 + 0.5 * h * k1p;
                let k2p = w1 * (y0 + 0.5 * h * k1y);
                let k3y = p0 + 0.5 * h * k2p;
                let k3p = w1 * (y0 + 0.5 * h * k2y);
                let k4y = p0 + h * k3p;
                let k4p = w2 * (y0 + h * k3y);
                y[s] = y0 + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
                p[s] = p0 + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            }
        }
        Matrix2::new(y[0], y[1], p[0], p[1])
    }

    /// Monodromy over one period for `y'' = (q - λ) y`.
    pub fn monodromy(&self, lambda: f64) -> Matrix2<f64> {
        self.propagate(lambda, self.steps)
    }

    /// Monodromy over half a period.
    pub fn half_monodromy(&self, lambda: f64) -> Matrix2<f64> {
        self.propagate(lambda, self.steps / 2)
    }

    /// `Δ(λ) = y₁(1) + y₂'(1)`.
    pub fn discriminant(&self, lambda: f64) -> f64 {
        if self.even {
            let m = self.half_monodromy(lambda);
            2.0 * (m[(0, 0)] * m[(1, 1)] + m[(0, 1)] * m[(1, 0)])
        } else {
            self.monodromy(lambda).trace()
        }
    }

    /// Functions whose roots, with multiplicity, are the roots of `Δ ∓ 2`,
    /// and whose product times 4 is `Δ ∓ 2` (a single factor `Δ ∓ 2` when
    /// `q` is not even).
    fn factors(&self, kind: EdgeKind, lambda: f64) -> Vec<f64> {
        if self.even {
            let m = self.half_monodromy(lambda);
            match kind {
                EdgeKind::Periodic => vec![m[(0, 1)], m[(1, 0)]],
                EdgeKind::Antiperiodic => vec![m[(0, 0)], m[(1, 1)]],
            }
        } else {
            let d = self.monodromy(lambda).trace();
            match kind {
                EdgeKind::Periodic => vec![(d - 2.0) / 4.0],
                EdgeKind::Antiperiodic => vec![(d + 2.0) / 4.0],
            }
        }
    }

    /// `Δ(λ) - 2 cos α`, evaluated through the factors.
    fn floquet_residual(&self, lambda: f64, alpha: f64) -> f64 {
        let s = (alpha / 2.0).sin();
        let c = (alpha / 2.0).cos();
        if c * c >= 0.5 {
            4.0 * self.factors(EdgeKind::Periodic, lambda).iter().product::<f64>() + 4.0 * s * s
        } else {
            4.0 * self.factors(EdgeKind::Antiperiodic, lambda).iter().product::<f64>() - 4.0 * c * c
        }
    }

    fn derivative_step(lambda: f64) -> f64 {
        DERIVATIVE_STEP * (1.0 + lambda.abs())
    }

    /// `Δ'(λ)` by central differences.
    pub fn discriminant_derivative(&self, lambda: f64) -> f64 {
        let s = Self::derivative_step(lambda);
        (self.discriminant(lambda + s) - self.discriminant(lambda - s)) / (2.0 * s)
    }

    /// `Δ'` at a root of factor `i`: the product rule leaves one term.
    fn delta_prime_at_factor_root(&self, kind: EdgeKind, i: usize, lambda: f64) -> f64 {
        let s = Self::derivative_step(lambda);
        let fp = self.factors(kind, lambda + s);
        let fm = self.factors(kind, lambda - s);
        let f0 = self.factors(kind, lambda);
        let mut d = 4.0 * (fp[i] - fm[i]) / (2.0 * s);
        for (j, v) in f0.iter().enumerate() {
            if j != i {
                d *= v;
            }
        }
        d
    }

    #[allow(clippy::needless_range_loop)]
    fn roots(&self, kind: EdgeKind, lo: f64, hi: f64, step: f64) -> Vec<Root> {
        let count = ((hi - lo) / step).ceil() as usize;
        let grid: Vec<f64> = (0..=count).map(|k| lo + k as f64 * step).collect();
        let values: Vec<Vec<f64>> = grid.iter().map(|&l| self.factors(kind, l)).collect();
        let nf = values[0].len();
        let mut found: Vec<(f64, usize)> = Vec::new();
        for i in 0..nf {
            let f = |l: f64| self.factors(kind, l)[i];
            for k in 0..count {
                let (fa, fb) = (values[k][i], values[k + 1][i]);
                if fa == 0.0 {
                    found.push((grid[k], i));
                } else if fa * fb < 0.0 {
                    found.push((bisect(&f, grid[k], grid[k + 1], fa), i));
                } else if nf == 1 && k > 0 {
                    // Tangency of Δ with ±2: a local minimum of |f| that touches zero.
                    let fprev = values[k - 1][i];
                    if fprev * fa > 0.0 && fa * fb > 0.0 && fa.abs() < fprev.abs() && fa.abs() <= fb.abs() {
                        let s = fa.signum();
                        let (m, v) = minimize(&|l: f64| s * f(l), grid[k - 1], grid[k + 1]);
                        if v < 0.0 {
                            // Dips through zero between grid points: a narrow gap.
                            found.push((bisect(&f, grid[k - 1], m, fprev), i));
                            found.push((bisect(&f, m, grid[k + 1], s * v), i));
                        } else if v <= TANGENCY_TOL {
                            found.push((m, usize::MAX));
                        }
                    }
                }
            }
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut roots = Vec::new();
        for (j, &(lambda, i)) in found.iter().enumerate() {
            if i == usize::MAX {
                let r = Root { lambda, delta_prime: 0.0, simple: false };
                roots.push(r);
                roots.push(r);
                continue;
            }
            let tol = COINCIDENCE_TOL * (1.0 + lambda.abs());
            let close = |o: Option<&(f64, usize)>| o.is_some_and(|&(l, k)| k != i && (l - lambda).abs() <= tol);
            let double = close(j.checked_sub(1).and_then(|p| found.get(p))) || close(found.get(j + 1));
            let delta_prime = if self.even {
                self.delta_prime_at_factor_root(kind, i, lambda)
            } else {
                self.discriminant_derivative(lambda)
            };
            roots.push(Root { lambda, delta_prime: if double { 0.0 } else { delta_prime }, simple: !double });
        }
        roots
    }

    /// Band edges of bands `1..=n_max`, found by scanning `[lo, lambda_max]`
    /// with `scan_step` and bisecting each sign change.
    pub fn bands_in(&self, lo: f64, lambda_max: f64, scan_step: f64, n_max: usize) -> Result<Bands> {
        if !(lo < lambda_max && scan_step > 0.0) {
            return Err(Error::InvalidRange { lo, hi: lambda_max, reason: "empty scan window".into() });
        }
        let periodic = self.roots(EdgeKind::Periodic, lo, lambda_max, scan_step);
        let antiperiodic = self.roots(EdgeKind::Antiperiodic, lo, lambda_max, scan_step);
        check_interlacing(&periodic, &antiperiodic)?;
        let mut edges = Vec::new();
        for n in 1..=n_max {
            let (Some(p), Some(a)) = (periodic.get(n - 1), antiperiodic.get(n - 1)) else {
                return Err(Error::BandNotFound(n));
            };
            let pe = BandEdge {
                n,
                kind: EdgeKind::Periodic,
                lambda: p.lambda,
                delta_prime: p.delta_prime,
                simple: p.simple,
            };
            let ae = BandEdge {
                n,
                kind: EdgeKind::Antiperiodic,
                lambda: a.lambda,
                delta_prime: a.delta_prime,
                simple: a.simple,
            };
            if n % 2 == 1 {
                edges.extend([pe, ae]);
            } else {
                edges.extend([ae, pe]);
            }
        }
        Ok(Bands { n_max, edges })
    }

    /// Band edges of bands `1..=n_max` scanning from `min q - 1`.
    pub fn band_edges(&self, lambda_max: f64, n_max: usize) -> Result<Vec<BandEdge>> {
        Ok(self.bands_in(self.min_potential() - 1.0, lambda_max, DEFAULT_SCAN_STEP, n_max)?.edges)
    }

    /// Bands `1..=n_max` with a window wide enough to contain them.
    pub fn bands(&self, n_max: usize) -> Result<Bands> {
        let lambda_max = self.max_potential() + ((n_max + 1) as f64 * PI).powi(2) + 1.0;
        self.bands_in(self.min_potential() - 1.0, lambda_max, DEFAULT_SCAN_STEP, n_max)
    }

    /// `Λ_n(α)` for `α ∈ (-π, π]`.
    pub fn floquet_eigenvalue(&self, n: usize, alpha: f64) -> Result<f64> {
        self.bands(n)?.floquet_eigenvalue(self, n, alpha)
    }

    /// Compares the second derivative of `Λ_n` at `α = 0` with `-2 / Δ'(λ_n⁺)`.
    pub fn hessian_identity_check(&self, n: usize) -> Result<HillHessianReport> {
        let bands = self.bands(n)?;
        bands.hessian_identity_check(self, n)
    }
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b || b - a <= BISECTION_TOL * 1e-6 * (1.0 + m.abs()) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Golden-section search for the minimum of `f` on `[a, b]`.
fn minimize(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > BISECTION_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    (m, f(m))
}

/// `λ₁⁺ < λ₁⁻ ≤ λ₂⁻ < λ₂⁺ ≤ λ₃⁺ < λ₃⁻ ≤ …` on the edges found.
fn check_interlacing(periodic: &[Root], antiperiodic: &[Root]) -> Result<()> {
    let mut seq = Vec::new();
    for n in 1.. {
        let (p, a) = (periodic.get(n - 1), antiperiodic.get(n - 1));
        let pair = if n % 2 == 1 { [p, a] } else { [a, p] };
        match pair {
            [Some(x), Some(y)] => seq.extend([x.lambda, y.lambda]),
            [Some(x), None] => {
                seq.push(x.lambda);
                break;
            }
            _ => break,
        }
    }
    for (i, w) in seq.windows(2).enumerate() {
        let tol = INTERLACING_TOL * (1.0 + w[0].abs());
        let ok = if i % 2 == 0 { w[1] - w[0] > tol } else { w[0] <= w[1] + tol };
        if !ok {
            return Err(Error::ScanTooCoarse(format!(
                "interlacing fails between {} and {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// Band edges for bands `1..=n_max`, two per band in increasing order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bands {
    pub n_max: usize,
    pub edges: Vec<BandEdge>,
}

impl Bands {
    pub fn band(&self, n: usize) -> Result<(&BandEdge, &BandEdge)> {
        if n == 0 || n > self.n_max {
            return Err(Error::BandNotFound(n));
        }
        Ok((&self.edges[2 * n - 2], &self.edges[2 * n - 1]))
    }

    /// The periodic edge `λ_n⁺`.
    pub fn periodic_edge(&self, n: usize) -> Result<&BandEdge> {
        let (a, b) = self.band(n)?;
        Ok(if a.kind == EdgeKind::Periodic { a } else { b })
    }

    /// Solves `Δ(λ) = 2 cos α` inside band `n`.
    pub fn floquet_eigenvalue(&self, op: &HillOperator, n: usize, alpha: f64) -> Result<f64> {
        let (lo, hi) = self.band(n)?;
        let periodic = self.periodic_edge(n)?;
        if alpha == 0.0 {
            return Ok(periodic.lambda);
        }
        let alpha = alpha.rem_euclid(2.0 * PI);
        let alpha = if alpha > PI { alpha - 2.0 * PI } else { alpha };
        let (a, b) = (lo.lambda, hi.lambda);
        if !(b > a) {
            return Err(Error::NonMonotone(n));
        }
        if alpha.abs() == PI {
            return Ok(if n % 2 == 1 { b } else { a });
        }
        let f = |l: f64| op.floquet_residual(l, alpha);
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 {
            return Ok(b);
        }
        if fa * fb > 0.0 {
            // An edge residual that is pure rounding error.
            let tiny = EDGE_RESIDUAL_TOL;
            return match (fa.abs() <= tiny, fb.abs() <= tiny) {
                (true, false) => Ok(a),
                (false, true) => Ok(b),
                _ => Err(Error::NonMonotone(n)),
            };
        }
        Ok(bisect(&f, a, b, fa))
    }

    pub fn hessian_identity_check(&self, op: &HillOperator, n: usize) -> Result<HillHessianReport> {
        let edge = self.periodic_edge(n)?.clone();
        if !edge.simple || edge.delta_prime == 0.0 {
            return Err(Error::DegenerateEdge(n));
        }
        let predicted = -2.0 / edge.delta_prime;
        let lambda0 = edge.lambda;
        let second = |s: f64| -> Result<f64> {
            let up = self.floquet_eigenvalue(op, n, s)?;
            let down = self.floquet_eigenvalue(op, n, -s)?;
            Ok((up + down - 2.0 * lambda0) / (s * s))
        };
        // Richardson estimates on a halving sequence of steps, stopping once
        // two successive estimates agree.
        let mut step = 0.2;
        let mut coarse = second(step)?;
        let mut prev_estimate = f64::NAN;
        let mut best = (f64::INFINITY, f64::NAN, step);
        for _ in 0..48 {
            let fine = second(step / 2.0)?;
            let estimate = (4.0 * fine - coarse) / 3.0;
            let change = (estimate - prev_estimate).abs() / estimate.abs();
            if change < best.0 {
                best = (change, estimate, step);
            }
            if change <= 1e-6 {
                break;
            }
            prev_estimate = estimate;
            coarse = fine;
            step /= 2.0;
        }
        let (_, fd, fd_step) = best;
        let morse_index = usize::from(fd < 0.0);
        Ok(HillHessianReport {
            n,
            lambda_plus: lambda0,
            delta_prime: edge.delta_prime,
            predicted,
            fd_second_derivative: fd,
            fd_step,
            relative_discrepancy: (fd - predicted).abs() / predicted.abs(),
            delta_prime_sign_ok: edge.delta_prime.signum() == if n.is_multiple_of(2) { 1.0 } else { -1.0 },
            morse_index,
            expected_index: usize::from(n.is_multiple_of(2)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HillHessianReport {
    pub n: usize,
    pub lambda_plus: f64,
    pub delta_prime: f64,
    /// `-2 / Δ'(λ_n⁺)`.
    pub predicted: f64,
    /// Extrapolated finite-difference `Λ̈_n(0)`.
    pub fd_second_derivative: f64,
    pub fd_step: f64,
    pub relative_discrepancy: f64,
    /// `sign Δ'(λ_n⁺) = (-1)^n`.
    pub delta_prime_sign_ok: bool,
    /// 1 when `α = 0` is a maximum of `Λ_n`, 0 when a minimum.
    pub morse_index: usize,
    pub expected_index: usize,
}

impl HillHessianReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.relative_discrepancy <= tol && self.delta_prime_sign_ok && self.morse_index == self.expected_index
    }
}
