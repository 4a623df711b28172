use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator.
///
/// Variants fall into three families that the command-line front end maps to
/// distinct exit codes: input/validation problems, I/O problems, and numerical
/// failures during integration.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("invalid {field}: {message}")]
    Invalid { field: String, message: String },

    #[error("numerical failure at t = {t} s: {message}")]
    Numerical { t: f64, message: String },
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for failures of the integrator rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
