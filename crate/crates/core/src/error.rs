use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum SopError {
    #[error("length error: {0}")]
    Length(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("capacity error: {0}")]
    Capacity(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("file error for {path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, SopError>;

impl SopError {
    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SopError::File {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn shape_err(msg: impl Into<String>) -> SopError {
    SopError::Shape(msg.into())
}

pub(crate) fn domain_err(msg: impl Into<String>) -> SopError {
    SopError::Domain(msg.into())
}
