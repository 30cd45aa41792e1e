use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised anywhere in the pipeline.
///
/// Each variant maps onto one process exit code through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("malformed CSV at line {line}: {message}")]
    Malformed { line: u64, message: String },

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn estimation(msg: impl Into<String>) -> Self {
        Error::Estimation(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with a human-readable tag, keeping the exit code of the cause.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code: 2 validation, 3 I/O, 4 numerical, 5 capacity.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Malformed { .. } => 2,
            Error::Io { .. } => 3,
            Error::Estimation(_) | Error::Numerical(_) => 4,
            Error::Capacity(_) => 5,
            Error::Context { source, .. } => source.exit_code(),
        }
    }

    /// The innermost error, skipping context wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        let line = err.position().map(|p| p.line()).unwrap_or(0);
        match err.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: PathBuf::from("<csv>"),
                source,
            },
            other => Error::Malformed {
                line,
                message: format!("{other:?}"),
            },
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Malformed {
            line: err.line() as u64,
            message: err.to_string(),
        }
    }
}
