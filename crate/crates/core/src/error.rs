//! Error type shared across the pipeline.
//!
//! Errors carry a category that maps onto the CLI exit codes:
//! configuration problems (2), data problems (3), external-service
//! problems (4).

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid or conflicting configuration; nothing was run.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed or inconsistent input data.
    #[error("data error: {0}")]
    Data(String),

    /// Malformed data at a known line of a known file.
    #[error("{}:{line}: {message}", path.display())]
    DataAt {
        path: PathBuf,
        line: u64,
        message: String,
    },

    /// An external service (LLM, reranker, NLI server) failed.
    #[error("service error ({backend}): {message}")]
    Service { backend: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn data_at(path: impl Into<PathBuf>, line: u64, msg: impl Into<String>) -> Self {
        Error::DataAt {
            path: path.into(),
            line,
            message: msg.into(),
        }
    }

    pub fn service(backend: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Service {
            backend: backend.into(),
            message: msg.into(),
        }
    }

    /// Process exit code for the CLI: 2 config, 3 data, 4 service.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Data(_) | Error::DataAt { .. } | Error::Io(_) => 3,
            Error::Service { .. } => 4,
        }
    }
}
