use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error(
        "symmetric eigensolver did not converge for a matrix of order {order} \
         (off-diagonal residual {residual:e})"
    )]
    NoConvergence { order: usize, residual: f64 },

    #[error("matrix is not positive definite: pivot {pivot:e} at index {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("singular rank-one update: denominator {denominator:e}")]
    SingularUpdate { denominator: f64 },

    #[error("frame operator has no eigenvalue above the rank tolerance")]
    ZeroFrame,

    /// A proven per-step invariant failed numerically.
    #[error("invariant violated at step {step}: {detail}")]
    InvariantViolation { step: usize, detail: String },

    /// The selection rule found no admissible candidate even though one is
    /// guaranteed to exist in exact arithmetic.
    #[error("no admissible candidate at step {step} ({rule}); best margin {margin:e}")]
    NoFeasibleCandidate {
        step: usize,
        rule: &'static str,
        margin: f64,
    },

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invariant(step: usize, detail: impl Into<String>) -> Self {
        Error::InvariantViolation {
            step,
            detail: detail.into(),
        }
    }
}
