//! Crate-wide error type.

/// Errors produced by domain construction, estimators and evaluators.
#[derive(Debug, thiserror::Error)]
#[non_exhaustive]
pub enum Error {
    /// A numeric or structural argument was outside its allowed range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Two objects that must share a domain (grid or metric) do not.
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    /// A distance matrix failed validation (symmetry, diagonal, triangle inequality).
    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    /// Two node functions or distributions refer to different trees.
    #[error("tree mismatch: {0}")]
    TreeMismatch(String),

    /// An exact solver was asked for an instance above its size limit.
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),

    /// An operation requiring samples was given none.
    #[error("empty dataset")]
    EmptyDataset,

    /// A data or config file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
