use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BellError {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, BellError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(BellError::Domain(msg.into()))
}
