//! Error type shared by every stage of the pipeline.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration or hyperparameter.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed input file (missing column, bad schema).
    #[error("format error: {0}")]
    Format(String),

    /// A single record could not be parsed.
    #[error("line {line}: {message}")]
    Row { line: usize, message: String },

    /// Corpus-level consistency violation (duplicate ids, empty text).
    #[error("integrity error: {0}")]
    Integrity(String),

    /// A requested split or fold cannot be realized.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// Matrix width or length does not match the fitted model.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Mismatch { expected: usize, got: usize },

    /// Training produced a non-finite loss.
    #[error("numerical divergence in {stage} at epoch {epoch}")]
    Divergence { stage: &'static str, epoch: usize },

    /// Serialized model carries an unsupported format version.
    #[error("unsupported model format version {found} (supported: {supported})")]
    Version { found: u32, supported: u32 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub fn integrity(msg: impl Into<String>) -> Self {
        Error::Integrity(msg.into())
    }

    pub fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }
}
