use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum HyperqError {
    /// Input failed a structural check (shape, hermiticity, length).
    #[error("validation error: {0}")]
    Validation(String),
    /// A parameter lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An iterative kernel did not converge within its cap.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// The operation is not justified for this input (e.g. PSD restriction on a non-CP map).
    #[error("refused: {0}")]
    Refused(String),
}

pub type Result<T> = std::result::Result<T, HyperqError>;

pub(crate) fn validation<T>(msg: impl Into<String>) -> Result<T> {
    Err(HyperqError::Validation(msg.into()))
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(HyperqError::Domain(msg.into()))
}

pub(crate) fn refused<T>(msg: impl Into<String>) -> Result<T> {
    Err(HyperqError::Refused(msg.into()))
}
