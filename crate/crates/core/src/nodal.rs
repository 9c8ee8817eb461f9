//! Sign changes, nodal domains and the nodal defect `δ_n = ν - (n - 1)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{check_len, Graph};
use crate::operator::SchrodingerOperator;
use crate::spectral::{check_index, eig_symmetric, HypothesisReport, VANISH_THRESHOLD};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodalReport {
    pub n: usize,
    /// Edges along which the eigenvector changes sign.
    pub nu: usize,
    /// Nodal domains.
    pub mu: usize,
    pub beta: usize,
    /// `ν - (n - 1)`.
    pub defect: i64,
    /// `n - 1 ≤ ν ≤ n - 1 + β`.
    pub nu_bounds_ok: bool,
    /// `n - β ≤ μ ≤ n`.
    pub mu_bounds_ok: bool,
}

impl NodalReport {
    pub fn bounds_ok(&self) -> bool {
        self.nu_bounds_ok && self.mu_bounds_ok
    }
}

fn check_nonvanishing(phi: &[f64]) -> Result<()> {
    let vmax = phi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    match phi.iter().position(|v| v.abs() <= VANISH_THRESHOLD * vmax) {
        Some(x) => Err(Error::VanishingVertex(x)),
        None => Ok(()),
    }
}

/// Number of edges `{x, y}` with `B_xy φ(x) φ(y) < 0`, where the optional
/// `signature` gives `B_xy = ±1` per edge (default all `+1`).
pub fn sign_changes(g: &Graph, phi: &[f64], signature: Option<&[i8]>) -> Result<usize> {
    check_len(g.num_vertices(), phi.len())?;
    check_nonvanishing(phi)?;
    if let Some(s) = signature {
        check_len(g.num_edges(), s.len())?;
        if let Some(k) = s.iter().position(|&b| b != 1 && b != -1) {
            let e = g.edge(k);
            return Err(Error::InvalidEdge {
                u: e.tail,
                v: e.head,
                reason: format!("signature entry {} is not ±1", s[k]),
            });
        }
    }
    Ok(g.edges()
        .iter()
        .enumerate()
        .filter(|&(k, e)| {
            let b = signature.map_or(1.0, |s| f64::from(s[k]));
            b * phi[e.tail] * phi[e.head] < 0.0
        })
        .count())
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true if the two sets were distinct.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Connected components left after deleting every sign-change edge.
pub fn nodal_domains(g: &Graph, phi: &[f64]) -> Result<usize> {
    check_len(g.num_vertices(), phi.len())?;
    check_nonvanishing(phi)?;
    let mut sets = DisjointSets::new(g.num_vertices());
    let mut components = g.num_vertices();
    for e in g.edges() {
        if phi[e.tail] * phi[e.head] > 0.0 && sets.union(e.tail, e.head) {
            components -= 1;
        }
    }
    Ok(components)
}

/// Nodal statistics of `φ_n`, refusing inputs outside the theorem's hypotheses.
pub fn nodal_report(op: &SchrodingerOperator, n: usize) -> Result<NodalReport> {
    check_index(n, op.dim())?;
    let pairs = eig_symmetric(op.matrix())?;
    let pair = &pairs[n - 1];
    let hyp = HypothesisReport::from_pair(pair);
    if !hyp.holds() {
        let reason = if !hyp.simple {
            format!("eigenvalue is not simple (gap {:e})", hyp.gap)
        } else {
            format!("eigenvector vanishes at {:?}", hyp.vanishing_vertices)
        };
        return Err(Error::HypothesesViolated { n, reason });
    }
    nodal_report_for(op.graph(), n, pair.vector.as_slice())
}

/// Nodal statistics of a given nonvanishing eigenvector `φ_n`.
pub fn nodal_report_for(g: &Graph, n: usize, phi: &[f64]) -> Result<NodalReport> {
    let nu = sign_changes(g, phi, None)?;
    let mu = nodal_domains(g, phi)?;
    let beta = g.cycle_dimension();
    let defect = nu as i64 - (n as i64 - 1);
    Ok(NodalReport {
        n,
        nu,
        mu,
        beta,
        defect,
        nu_bounds_ok: n - 1 <= nu && nu <= n - 1 + beta,
        mu_bounds_ok: n as i64 - beta as i64 <= mu as i64 && mu <= n,
    })
}
