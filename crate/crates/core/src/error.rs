use thiserror::Error;

pub type Result<T> = std::result::Result<T, MeterError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeterError {
    /// An input lies outside the mathematical domain of an operation
    /// (negative weight, non-PSD density matrix, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The Fock truncation could not be certified below the tolerance.
    #[error("truncation tail {tail:.3e} exceeds tolerance {tolerance:.3e} (cutoff {cutoff})")]
    Truncation {
        tail: f64,
        tolerance: f64,
        cutoff: usize,
    },

    #[error("index ({row}, {col}) out of range for dimension {dim}")]
    IndexOutOfRange { row: usize, col: usize, dim: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A link of the information hierarchy is violated beyond the slack.
    #[error("information hierarchy violated at {link}: {lhs} < {rhs}")]
    Hierarchy { link: String, lhs: f64, rhs: f64 },
}

impl MeterError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        MeterError::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        MeterError::InvalidParameter(msg.into())
    }
}
