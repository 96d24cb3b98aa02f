use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("reaction is not bistable: {0}")]
    NotBistable(String),

    #[error("shifted reaction fails domination at u = {u}: margin {margin:e}")]
    DominationFailed { u: f64, margin: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("standing wave potential is not a balanced double well: W({s}) = {w:e}")]
    UnbalancedWell { s: f64, w: f64 },

    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    #[error("time step produced a non-finite field at t = {time}; reduce dt")]
    Unstable { time: f64 },

    #[error("initial data violates its invariants: {0}")]
    InvalidInitialData(String),

    #[error("projection onto the standing-wave manifold is not unique (minima {first:e} and {second:e})")]
    NonUniqueProjection { first: f64, second: f64 },

    #[error("ODE flow left the window |Y| <= {bound} (Y = {value})")]
    FlowEscaped { value: f64, bound: f64 },

    #[error("barrier construction rejected: {0}")]
    BarrierRejected(String),

    #[error("linearized operator inconsistent: {0}")]
    InconsistentOperator(String),

    #[error("odd-symmetry check failed: |G00| = {0:e}")]
    SymmetryViolated(f64),

    #[error("near-singular eigenvalue pair ({j}, {k}): lambda_j + lambda_k = {sum:e}")]
    NearSingularPair { j: usize, k: usize, sum: f64 },

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("ensembles are recorded on different time lattices")]
    LatticeMismatch,

    #[error("config validation failed: {0}")]
    Config(String),

    #[error("{failed} of {total} paths failed mechanically")]
    TooManyFailures { failed: usize, total: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
