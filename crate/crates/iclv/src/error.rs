//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Model configuration problems: unknown names, dimension mismatches,
    /// references that do not resolve against the model spec.
    #[error("configuration error: {0}")]
    Config(String),

    /// Parameter values outside their valid region (non-monotone thresholds,
    /// non-positive scales, ...).
    #[error("invalid parameters: {0}")]
    InvalidParameter(String),

    /// Inputs outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Identification rule violations detected when building the free
    /// parameter map.
    #[error("identification error: {0}")]
    Identification(String),

    /// A computation produced a non-finite value; the message names the
    /// offending individual or coordinate.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Schema violation in an input file, with a line reference when known.
    #[error("schema error in {file}{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Schema {
        file: String,
        line: Option<u64>,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn schema(file: impl Into<String>, line: Option<u64>, message: impl Into<String>) -> Self {
        Error::Schema {
            file: file.into(),
            line,
            message: message.into(),
        }
    }

    /// True for errors caused by malformed input files rather than by the
    /// model configuration. The CLI maps these to exit code 2.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Schema { .. } | Error::Io(_) | Error::Csv(_) | Error::Json(_)
        )
    }
}
