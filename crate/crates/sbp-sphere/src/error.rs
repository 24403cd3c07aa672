//! Error type shared across the crate.
//!
//! Numerical failures carry the module name, the operation, and the first
//! offending index so that every failure is attributable to a concrete
//! grid point, eigenvalue, or time step.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument or configuration detected before any computation.
    #[error("{module}.{operation}: {message}")]
    InvalidInput {
        module: &'static str,
        operation: &'static str,
        message: String,
    },

    /// A numerical check failed; `index` is the first offending entry
    /// (grid point, eigenvalue position, or time-step number).
    #[error("{module}.{operation}: {message} (first offending index {index})")]
    Numerical {
        module: &'static str,
        operation: &'static str,
        index: usize,
        message: String,
    },

    /// File input/output failure.
    #[error("{module}.{operation}: {path}: {source}")]
    Io {
        module: &'static str,
        operation: &'static str,
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(
        module: &'static str,
        operation: &'static str,
        message: impl Into<String>,
    ) -> Self {
        Error::InvalidInput {
            module,
            operation,
            message: message.into(),
        }
    }

    pub fn numerical(
        module: &'static str,
        operation: &'static str,
        index: usize,
        message: impl Into<String>,
    ) -> Self {
        Error::Numerical {
            module,
            operation,
            index,
            message: message.into(),
        }
    }

    pub fn io(
        module: &'static str,
        operation: &'static str,
        path: impl Into<String>,
        source: std::io::Error,
    ) -> Self {
        Error::Io {
            module,
            operation,
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
