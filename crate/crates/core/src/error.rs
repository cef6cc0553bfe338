use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),

    #[error("time stepping did not converge after {halvings} step halvings (defect {defect:e})")]
    NonConvergence { halvings: usize, defect: f64 },

    #[error("norm drifted by {0:e} during unitary evolution")]
    NormDrift(f64),

    #[error("binning mismatch: {0}")]
    BinningMismatch(String),

    #[error("bin width {requested} is not an integer multiple of {native}")]
    NonCommensurate { requested: f64, native: f64 },

    #[error("finite-difference grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("normal equations are not positive definite")]
    IndefiniteNormalEquations,

    #[error("all fit weights are zero")]
    ZeroWeights,

    #[error("empty retained measurement sequence")]
    EmptySequence,

    #[error("maximum-likelihood iteration stalled at step {iteration}")]
    LikelihoodStall { iteration: usize, trace: Vec<f64> },

    #[error("root finder did not converge: {0}")]
    RootNotFound(String),

    #[error("integrator step size underflow at t = {0}")]
    StepUnderflow(f64),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
