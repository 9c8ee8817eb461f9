//! Single-instance analysis and seeded verification campaigns over random
//! graphs.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hill::{BandEdge, HillHessianReport, HillOperator, Potential};
use crate::hodge::{analyze_pair, HessianComparison};
use crate::magnetic::{FluxHessians, DEFAULT_FD_STEP};
use crate::instance::InstanceFile;
use crate::operator::SchrodingerOperator;
use crate::special_cases::{vanishing_analysis, VanishingReport};
use crate::spectral::{check_index, eig_symmetric, Eigenpair, HypothesisReport};

/// Largest relative entrywise gap allowed between the analytic and the
/// finite-difference Hessian.
pub const AGREEMENT_TOL: f64 = 1e-4;
const GRAPH_RETRIES: usize = 100;

/// Outcome of checking one `(instance, n)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRecord {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub lambda_n: f64,
    pub nu: usize,
    pub mu: usize,
    pub beta: usize,
    pub defect: i64,
    #[serde(rename = "index_Q_grad")]
    pub index_q_grad: usize,
    #[serde(rename = "index_Q_kernel")]
    pub index_q_kernel: usize,
    pub fd_index: usize,
    pub fd_nullity: usize,
    pub bounds_ok: bool,
    pub agreement: bool,
    pub relative_discrepancy: f64,
    /// Every identity that failed; empty on success.
    pub violations: Vec<String>,
}

impl PairRecord {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Why a pair was not tested.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipKind {
    /// `λ_n` degenerate or `φ_n` vanishing somewhere.
    Hypotheses,
    /// The finite-difference Hessian could not be trusted (gap collapsing
    /// inside the stencil, or the `h` and `2h` estimates disagreeing).
    IllConditioned,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkipRecord {
    pub trial: usize,
    pub n: usize,
    pub kind: SkipKind,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureRecord {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub violations: Vec<String>,
    pub instance: InstanceFile,
}

enum PairOutcome {
    Tested(PairRecord),
    Skipped(SkipKind, String),
}

fn skip_kind(e: &Error) -> Option<SkipKind> {
    match e {
        Error::HypothesesViolated { .. } | Error::DegenerateEigenvalue { .. } | Error::VanishingVertex(_) => {
            Some(SkipKind::Hypotheses)
        }
        Error::SimplicityLost { .. } | Error::IllConditioned { .. } => Some(SkipKind::IllConditioned),
        _ => None,
    }
}

/// Runs the analytic and finite-difference pipelines for one eigenpair and
/// checks every identity.
fn check_pair(
    op: &SchrodingerOperator,
    pair: &Eigenpair<f64>,
    stencils: &FluxHessians,
    trial: usize,
    seed: u64,
) -> Result<PairOutcome> {
    let n = pair.n;
    let hyp = HypothesisReport::from_pair(pair);
    if !hyp.holds() {
        let reason = if hyp.simple {
            format!("eigenvector vanishes at {:?}", hyp.vanishing_vertices)
        } else {
            format!("eigenvalue gap {:e}", hyp.gap)
        };
        return Ok(PairOutcome::Skipped(SkipKind::Hypotheses, reason));
    }
    let analytic = match analyze_pair(op, pair) {
        Ok(a) => a,
        Err(e) => match skip_kind(&e) {
            Some(k) => return Ok(PairOutcome::Skipped(k, e.to_string())),
            None => return Err(e),
        },
    };
    let fd = match stencils.lambda_hessian(n) {
        Ok(fd) => fd,
        Err(e) => match skip_kind(&e) {
            Some(k) => return Ok(PairOutcome::Skipped(k, e.to_string())),
            None => return Err(e),
        },
    };
    let cmp = HessianComparison::build(n, &analytic.flux_hessian, &fd)?;
    let nodal = &analytic.nodal;
    let mut violations = Vec::new();
    let defect = nodal.defect;
    if analytic.index_kernel != (defect.max(0) as usize, 0) || defect < 0 {
        violations.push(format!("index(Q|ker d★) = {:?} but defect = {defect}", analytic.index_kernel));
    }
    if analytic.index_grad != (n - 1, 0) {
        violations.push(format!("index(Q|dR^X) = {:?} but n - 1 = {}", analytic.index_grad, n - 1));
    }
    let (g, k) = (analytic.index_grad, analytic.index_kernel);
    if g.1 == 0 && k.1 == 0 && analytic.index_full.0 != g.0 + k.0 {
        violations.push(format!("inertia not additive: {} != {} + {}", analytic.index_full.0, g.0, k.0));
    }
    if cmp.analytic_index as i64 != defect || cmp.analytic_nullity != 0 {
        violations.push(format!(
            "analytic Hessian signature ({}, {}) but defect = {defect}",
            cmp.analytic_index, cmp.analytic_nullity
        ));
    }
    if cmp.fd_index as i64 != defect {
        violations.push(format!("FD Morse index {} but defect = {defect}", cmp.fd_index));
    }
    if cmp.fd_nullity != 0 {
        violations.push(format!("FD nullity {}", cmp.fd_nullity));
    }
    if !nodal.nu_bounds_ok {
        violations.push(format!("nu = {} outside [{}, {}]", nodal.nu, n - 1, n - 1 + nodal.beta));
    }
    if !nodal.mu_bounds_ok {
        violations.push(format!("mu = {} outside [{}, {n}]", nodal.mu, n as i64 - nodal.beta as i64));
    }
    let agreement = cmp.relative_discrepancy <= AGREEMENT_TOL;
    if !agreement {
        violations.push(format!("Hessian relative discrepancy {:e}", cmp.relative_discrepancy));
    }
    Ok(PairOutcome::Tested(PairRecord {
        trial,
        seed,
        n,
        lambda_n: pair.value,
        nu: nodal.nu,
        mu: nodal.mu,
        beta: nodal.beta,
        defect,
        index_q_grad: analytic.index_grad.0,
        index_q_kernel: analytic.index_kernel.0,
        fd_index: cmp.fd_index,
        fd_nullity: cmp.fd_nullity,
        bounds_ok: nodal.bounds_ok(),
        agreement,
        relative_discrepancy: cmp.relative_discrepancy,
        violations,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisStatus {
    Passed,
    /// A theorem identity failed.
    Failed,
    HypothesesViolated,
}

/// Result of analysing one eigenvalue of one operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisOutput {
    pub status: AnalysisStatus,
    pub hypotheses: HypothesisReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record: Option<PairRecord>,
    /// Present when `φ_n` vanishes at exactly one vertex.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vanishing: Option<VanishingReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Full pipeline for `λ_n`; routes hypothesis violations with a single
/// vanishing vertex to [`vanishing_analysis`].
pub fn analyze_instance(op: &SchrodingerOperator, n: usize) -> Result<AnalysisOutput> {
    check_index(n, op.dim())?;
    let pairs = eig_symmetric(op.matrix())?;
    let pair = &pairs[n - 1];
    let hypotheses = HypothesisReport::from_pair(pair);
    if !hypotheses.holds() {
        let (vanishing, note) = match vanishing_analysis(op, n) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        return Ok(AnalysisOutput {
            status: AnalysisStatus::HypothesesViolated,
            hypotheses,
            record: None,
            vanishing,
            note,
        });
    }
    let stencils = FluxHessians::evaluate(op, DEFAULT_FD_STEP)?;
    match check_pair(op, pair, &stencils, 0, 0)? {
        PairOutcome::Tested(record) => Ok(AnalysisOutput {
            status: if record.passed() { AnalysisStatus::Passed } else { AnalysisStatus::Failed },
            hypotheses,
            record: Some(record),
            vanishing: None,
            note: None,
        }),
        PairOutcome::Skipped(_, reason) => Ok(AnalysisOutput {
            status: AnalysisStatus::HypothesesViolated,
            hypotheses,
            record: None,
            vanishing: None,
            note: Some(reason),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CampaignParams {
    pub trials: usize,
    pub max_vertices: usize,
    pub max_extra_edges: usize,
    pub seed: u64,
}

impl CampaignParams {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.max_vertices == 0 {
            return Err(Error::InvalidRange {
                lo: self.trials as f64,
                hi: self.max_vertices as f64,
                reason: "trials and max_vertices must be positive".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignSummary {
    /// Random instances generated.
    pub trials: usize,
    /// `(instance, n)` pairs examined; equals
    /// `passed + skipped_hypotheses + skipped_ill_conditioned + failures`.
    pub pairs: usize,
    pub passed: usize,
    pub skipped_hypotheses: usize,
    pub skipped_ill_conditioned: usize,
    pub failures: usize,
    pub max_relative_discrepancy: f64,
    pub max_beta: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub params: CampaignParams,
    pub records: Vec<PairRecord>,
    pub skipped: Vec<SkipRecord>,
    pub failures: Vec<FailureRecord>,
    pub summary: CampaignSummary,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.summary.failures == 0
    }
}

/// A random spanning tree with `extra` additional random edges.
fn tree_plus_edges(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges: Vec<(usize, usize)> =
        (1..n).map(|i| (order[rng.gen_range(0..i)], order[i])).collect();
    let mut free: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| !edges.iter().any(|&(a, b)| (a.min(b), a.max(b)) == (u, v)))
        .collect();
    free.shuffle(rng);
    edges.extend(free.into_iter().take(extra));
    Graph::new(n, &edges).expect("tree plus chords is connected")
}

/// Erdős–Rényi `G(n, p)` with `p` aimed at `n - 1 + β` edges, retried until
/// connected with `β ≤ max_extra`; after `GRAPH_RETRIES` failures a random
/// tree with `β` extra edges is used.
pub fn random_connected_graph(rng: &mut ChaCha8Rng, n: usize, max_extra: usize) -> Graph {
    if n <= 1 {
        return Graph::new(1, &[]).expect("single vertex");
    }
    let pairs = n * (n - 1) / 2;
    let beta = rng.gen_range(0..=max_extra.min(pairs - (n - 1)));
    let p = ((n - 1 + beta) as f64 / pairs as f64).min(1.0);
    for _ in 0..GRAPH_RETRIES {
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|_| rng.gen_bool(p))
            .collect();
        if let Ok(g) = Graph::new(n, &edges) {
            if g.cycle_dimension() <= max_extra {
                return g;
            }
        }
    }
    tree_plus_edges(rng, n, beta)
}

/// Instance `trial` of a campaign: the graph and a random operator on it,
/// with the operator's seed.
pub fn campaign_instance(params: &CampaignParams, trial: usize) -> (SchrodingerOperator, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(trial as u64);
    let lo = params.max_vertices.min(2);
    let n = rng.gen_range(lo..=params.max_vertices);
    let g = random_connected_graph(&mut rng, n, params.max_extra_edges);
    let op_seed: u64 = rng.gen();
    (SchrodingerOperator::random_default(g, op_seed), op_seed)
}

struct TrialResult {
    tested: Vec<PairRecord>,
    skipped: Vec<SkipRecord>,
    failures: Vec<FailureRecord>,
    beta: usize,
}

fn run_trial(params: &CampaignParams, trial: usize) -> Result<TrialResult> {
    let (op, seed) = campaign_instance(params, trial);
    let pairs = eig_symmetric(op.matrix())?;
    let stencils = FluxHessians::evaluate(&op, DEFAULT_FD_STEP)?;
    let mut out = TrialResult {
        tested: Vec::new(),
        skipped: Vec::new(),
        failures: Vec::new(),
        beta: op.graph().cycle_dimension(),
    };
    for pair in &pairs {
        match check_pair(&op, pair, &stencils, trial, seed)? {
            PairOutcome::Tested(r) => {
                if !r.passed() {
                    out.failures.push(FailureRecord {
                        trial,
                        seed,
                        n: r.n,
                        violations: r.violations.clone(),
                        instance: InstanceFile::from_operator(&op),
                    });
                }
                out.tested.push(r);
            }
            PairOutcome::Skipped(kind, reason) => {
                out.skipped.push(SkipRecord { trial, n: pair.n, kind, reason })
            }
        }
    }
    Ok(out)
}

/// Runs a campaign on `threads` workers. The report depends only on
/// `params`, not on scheduling.
pub fn run_campaign(params: &CampaignParams, threads: usize) -> Result<VerificationReport> {
    params.validate()?;
    let slots: Vec<Mutex<Option<Result<TrialResult>>>> =
        (0..params.trials).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let work = || loop {
        let t = next.fetch_add(1, Ordering::Relaxed);
        if t >= params.trials {
            break;
        }
        let r = run_trial(params, t);
        *slots[t].lock().expect("unpoisoned") = Some(r);
    };
    let threads = threads.clamp(1, params.trials);
    if threads == 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..threads {
                s.spawn(work);
            }
        });
    }

    let mut records = Vec::new();
    let mut skipped = Vec::new();
    let mut failures = Vec::new();
    let mut max_beta = 0;
    for slot in slots {
        let r = slot.into_inner().expect("unpoisoned").expect("every trial ran")?;
        max_beta = max_beta.max(r.beta);
        records.extend(r.tested);
        skipped.extend(r.skipped);
        failures.extend(r.failures);
    }
    let count = |k: SkipKind| skipped.iter().filter(|s| s.kind == k).count();
    let summary = CampaignSummary {
        trials: params.trials,
        pairs: records.len() + skipped.len(),
        passed: records.iter().filter(|r| r.passed()).count(),
        skipped_hypotheses: count(SkipKind::Hypotheses),
        skipped_ill_conditioned: count(SkipKind::IllConditioned),
        failures: failures.len(),
        max_relative_discrepancy: records.iter().map(|r| r.relative_discrepancy).fold(0.0, f64::max),
        max_beta,
    };
    Ok(VerificationReport { params: *params, records, skipped, failures, summary })
}

/// Band edges, samples of `Λ_n(α)` and the Hessian identity for one band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HillSweep {
    pub band: usize,
    pub edges: Vec<BandEdge>,
    /// `(α, Λ_n(α))` for `samples` equally spaced `α ∈ [-π, π]`.
    pub samples: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hessian: Option<HillHessianReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hessian_error: Option<String>,
}

pub fn hill_sweep(potential: Potential, band: usize, samples: usize) -> Result<HillSweep> {
    if band == 0 {
        return Err(Error::BandNotFound(0));
    }
    let op = HillOperator::with_default_steps(potential);
    let bands = op.bands(band)?;
    let alphas: Vec<f64> = match samples {
        0 => Vec::new(),
        1 => vec![0.0],
        k => (0..k).map(|j| -PI + 2.0 * PI * j as f64 / (k - 1) as f64).collect(),
    };
    let samples = alphas
        .into_iter()
        .map(|a| Ok((a, bands.floquet_eigenvalue(&op, band, a)?)))
        .collect::<Result<Vec<_>>>()?;
    let (hessian, hessian_error) = match bands.hessian_identity_check(&op, band) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let (a, b) = bands.band(band)?;
    Ok(HillSweep { band, edges: vec![a.clone(), b.clone()], samples, hessian, hessian_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_cases::two_triangles_operator;

    #[test]
    fn path_top_eigenvalue_passes() {
        let op = SchrodingerOperator::laplacian(Graph::new(3, &[(0, 1), (1, 2)]).unwrap());
        let out = analyze_instance(&op, 3).unwrap();
        assert_eq!(out.status, AnalysisStatus::Passed);
        let r = out.record.unwrap();
        assert_eq!((r.nu, r.mu, r.defect, r.beta), (2, 3, 0, 0));
    }

    #[test]
    fn two_triangles_routes_to_vanishing() {
        let out = analyze_instance(&two_triangles_operator(), 4).unwrap();
        assert_eq!(out.status, AnalysisStatus::HypothesesViolated);
        assert_eq!(out.vanishing.unwrap().fd_nullity, 2);
    }

    #[test]
    fn small_campaign_is_deterministic() {
        let params = CampaignParams { trials: 12, max_vertices: 7, max_extra_edges: 3, seed: 5 };
        let a = run_campaign(&params, 1).unwrap();
        let b = run_campaign(&params, 3).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.all_passed(), "{:?}", a.failures);
        let s = &a.summary;
        assert_eq!(s.pairs, s.passed + s.skipped_hypotheses + s.skipped_ill_conditioned + s.failures);
    }

    #[test]
    fn trees_only() {
        let params = CampaignParams { trials: 10, max_vertices: 3, max_extra_edges: 0, seed: 1 };
        let r = run_campaign(&params, 1).unwrap();
        assert!(r.records.iter().all(|p| p.beta == 0 && p.defect == 0));
        assert!(r.all_passed());
    }

    #[test]
    fn random_graphs_respect_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for n in 1..10 {
            for extra in 0..5 {
                let g = random_connected_graph(&mut rng, n, extra);
                assert_eq!(g.num_vertices(), n);
                assert!(g.cycle_dimension() <= extra);
            }
        }
    }
}
