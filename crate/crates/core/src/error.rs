use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("{what} = {value} lies outside the table range (limit {limit})")]
    OutOfRange { what: &'static str, value: u64, limit: u64 },

    /// An approximation could not be certified within its budget. `best` is
    /// the estimate that was reached and `bound` its error bound.
    #[error("accuracy error: {message} (best estimate {best:e}, error bound {bound:e})")]
    Accuracy { message: String, best: f64, bound: f64 },

    #[error("window error: {0}")]
    Window(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("record {label:?} has no coefficient at prime {prime}")]
    Coverage { label: String, prime: u64 },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse grouping of errors, used by the command-line driver to pick an exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorCategory {
    Usage,
    Data,
    Accuracy,
    Window,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Domain(_) | Error::Size(_) | Error::OutOfRange { .. } => ErrorCategory::Usage,
            Error::Parse { .. } | Error::Validation(_) | Error::Coverage { .. } | Error::Io { .. } => {
                ErrorCategory::Data
            }
            Error::Accuracy { .. } => ErrorCategory::Accuracy,
            Error::Window(_) => ErrorCategory::Window,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn window(msg: impl Into<String>) -> Self {
        Error::Window(msg.into())
    }
}
