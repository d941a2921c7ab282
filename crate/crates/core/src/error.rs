use thiserror::Error;

/// Errors produced by the ordinal-entropy toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrdError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("insufficient data: need at least {required} samples, got {actual}")]
    InsufficientData { required: usize, actual: usize },

    #[error("unsupported system: {0}")]
    UnsupportedSystem(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, OrdError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(OrdError::InvalidInput(msg.into()))
}
