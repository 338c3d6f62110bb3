use std::path::PathBuf;

use thiserror::Error;

use crate::types::ValidationReport;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("value {value} is outside the support {{1, ..., {max}}}")]
    OutOfSupport { value: usize, max: usize },

    #[error("dataset failed validation: {0}")]
    Validation(ValidationReport),

    #[error("graph is disconnected; the epidemic cannot reach every node")]
    Disconnected,

    #[error("exact likelihood guard: {count} new edges at one step exceeds the enumeration limit of {limit}")]
    EnumerationLimit { count: usize, limit: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
