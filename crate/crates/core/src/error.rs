use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed binary payload; `offset` is the byte where decoding failed.
    #[error("{path}: format error at byte {offset}: {reason}")]
    Format { path: PathBuf, offset: u64, reason: String },

    /// Malformed or inconsistent text input (CSV, manifest, descriptors).
    #[error("{path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    #[error("unsupported format: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("checkpoint config mismatch: {0}")]
    ConfigMismatch(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("non-finite gradient in layer {layer}")]
    NonFiniteGradient { layer: usize },

    #[error("non-finite loss at iteration {iteration}")]
    NonFiniteLoss { iteration: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
