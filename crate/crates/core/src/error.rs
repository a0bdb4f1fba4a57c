use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PrcError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("length mismatch: expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("query bound exceeded: declared {bound}, made {made}")]
    QueryBoundExceeded { bound: usize, made: usize },

    #[error("step bound {bound} exceeded")]
    StepBoundExceeded { bound: u64 },

    #[error("enumeration limit exceeded: {0}")]
    EnumerationLimit(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("divergence is infinite (support of the first argument is not contained in the second)")]
    InfiniteDivergence,

    #[error("conflicting entry for query {0}")]
    ConflictingQuery(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("scheme contract violated: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, PrcError>;
