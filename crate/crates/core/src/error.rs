//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by operators, calculators, solvers, and parsers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("power iteration did not converge after {iters} iterations (last estimate {estimate:e})")]
    PowerIterationStalled { iters: usize, estimate: f64 },

    #[error("no admissible stepsize: L*rho = {lrho:e} exceeds the threshold {threshold:e}")]
    NoAdmissibleStepsize { lrho: f64, threshold: f64 },

    #[error("stepsize {eta:e} violates the bound {bound:e} ({constraint})")]
    StepsizeOutOfRange {
        eta: f64,
        bound: f64,
        constraint: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("direction history not initialized; call reset first")]
    UninitializedHistory,

    #[error("singular matrix in direct solve (pivot {pivot:e} at column {col})")]
    SingularMatrix { col: usize, pivot: f64 },

    #[error("iterates diverged at iteration {iter}")]
    Diverged { iter: usize },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("block layout invalid: {0}")]
    BadBlockLayout(String),

    #[error("certificate violated: {0}")]
    CertificateViolation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
