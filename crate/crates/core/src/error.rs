//! Error type shared by every module.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed instance or argument.
    #[error("input error: {0}")]
    Input(String),
    /// Matrix or vector shapes do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// An element expected to be divisible by hbar has a nonzero hbar^0 part.
    #[error("not divisible by hbar: {context}: {witness}")]
    Divisibility { context: String, witness: String },
    /// The induced differential on cohomology is nonzero.
    #[error("anomaly: {0}")]
    Anomaly(String),
    /// An identity that must hold exactly failed.
    #[error("identity failed: {name}: {witness}")]
    Identity { name: String, witness: String },
    /// The instance is outside the regime an operation requires.
    #[error("not semi-classical: {0}")]
    NotSemiClassical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn identity(name: impl Into<String>, witness: impl Into<String>) -> Self {
        Error::Identity { name: name.into(), witness: witness.into() }
    }
}
