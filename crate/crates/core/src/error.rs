use thiserror::Error;

#[derive(Debug, Error)]
pub enum HertaError {
    #[error("graph has no valid edge lines")]
    EmptyGraph,

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("regularization lambda must be positive, got {0}")]
    NonPositiveLambda(f64),

    #[error("invalid sampling distribution: {0}")]
    BadDistribution(String),

    #[error("matrix is not positive definite (smallest eigenvalue {min_eig:e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("leverage scores sum to {0}, cannot sample")]
    DegenerateScores(f64),

    #[error("labels are not one-hot (row {row})")]
    NotOneHot { row: usize },

    #[error("dense oracle refused: n = {n} exceeds limit {limit}")]
    TooLargeForDense { n: usize, limit: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, HertaError>;

pub(crate) fn dim_mismatch(expected: impl ToString, got: impl ToString) -> HertaError {
    HertaError::DimensionMismatch {
        expected: expected.to_string(),
        got: got.to_string(),
    }
}
