use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("grid mismatch: expected grid {expected:#018x}, found {found:#018x}")]
    GridMismatch { expected: u64, found: u64 },
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("invalid diffusivity: {0}")]
    InvalidDiffusivity(String),
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("insufficient truncation: {0}")]
    Truncation(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("undefined quantity: {0}")]
    Undefined(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
