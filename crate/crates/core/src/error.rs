use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("graph is disconnected: vertex {0} is unreachable from vertex 0")]
    DisconnectedGraph(usize),
    #[error("invalid edge {{{u}, {v}}}: {reason}")]
    InvalidEdge { u: usize, v: usize, reason: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is not in O_G: {0}")]
    NotInOG(String),
    #[error("matrix is not symmetric: |m[{i}][{j}] - m[{j}][{i}]| = {diff:e}")]
    NotSymmetric { i: usize, j: usize, diff: f64 },
    #[error("invalid range [{lo}, {hi}]: {reason}")]
    InvalidRange { lo: f64, hi: f64, reason: String },
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("could not pair doubled eigenvalues of the real embedding: {0}")]
    EmbeddingPairingFailure(String),
    #[error("magnetic field does not live on the operator's graph")]
    GraphMismatch,
    #[error("eigenvalue index {n} out of range 1..={size}")]
    IndexOutOfRange { n: usize, size: usize },
    #[error("eigenvalue {n} is degenerate (gap {gap:e})")]
    DegenerateEigenvalue { n: usize, gap: f64 },
    #[error("eigenvalue {n} lost simplicity inside the finite-difference stencil (gap {gap:e})")]
    SimplicityLost { n: usize, gap: f64 },
    #[error("finite-difference Hessian is ill-conditioned: |H(h) - H(2h)| = {discrepancy:e}")]
    IllConditioned { discrepancy: f64 },
    #[error("eigenvector vanishes at vertex {0}")]
    VanishingVertex(usize),
    #[error("hypotheses violated for n = {n}: {reason}")]
    HypothesesViolated { n: usize, reason: String },
    #[error("operator is not shifted to put the eigenvalue at zero: |H phi| = {0:e}")]
    NotShifted(f64),
    #[error("Hodge splitting failed: {0}")]
    SplitFailure(String),
    #[error("basis is rank deficient: rank {rank} < {cols} columns")]
    RankDeficientBasis { rank: usize, cols: usize },
    #[error("vector is not an eigenvector: residual {0:e}")]
    NotEigenvector(f64),
    #[error("eigenvalue is not critical along the curve: first derivative {0:e}")]
    NotCritical(f64),
    #[error("cannot solve for the eigenvector derivative: {0}")]
    SolveFailure(String),
    #[error("band {0} not found in the scanned window")]
    BandNotFound(usize),
    #[error("discriminant is not monotone across band {0}")]
    NonMonotone(usize),
    #[error("band scan too coarse: {0}")]
    ScanTooCoarse(String),
    #[error("band edge {0} is degenerate")]
    DegenerateEdge(usize),
    #[error("eigenvector does not vanish at exactly one vertex: {0}")]
    NotSingleVanishing(String),
    #[error("graph is not bipartite: odd cycle through edge {{{0}, {1}}}")]
    NotBipartite(usize, usize),
    #[error("potential spec parse error: {0}")]
    PotentialSpec(String),
    #[error("instance file error: {0}")]
    InstanceFormat(String),
}

pub type Result<T> = std::result::Result<T, Error>;
