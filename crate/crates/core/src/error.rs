use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Arguments outside the domain of an operation (bad shape, point out of bounds, ...).
    #[error("{0}")]
    Domain(String),

    /// A volume file that does not match its header or dtype.
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },

    /// A call sequence the API does not support, e.g. recording a data-dependent loop on a tape.
    #[error("{0}")]
    Contract(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag for the error class. The `Display` text
    /// carries only the detail, so callers usually print both.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Format { .. } => "format",
            Error::Contract(_) => "contract",
            Error::Io { .. } => "io",
        }
    }
}
