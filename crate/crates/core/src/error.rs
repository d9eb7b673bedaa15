use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by validation and numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("operator is not Hermitian: symmetry residual {residual:.3e} exceeds {limit:.3e}")]
    NotHermitian { residual: f64, limit: f64 },

    #[error("operator is not positive semidefinite: eigenvalue {eigenvalue:.3e} below -{cutoff:.3e}")]
    NotPositive { eigenvalue: f64, cutoff: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("operator must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension {dim} exceeds configured maximum {max}")]
    TooLarge { dim: usize, max: usize },

    #[error("non-finite entry in operator")]
    NonFinite,

    #[error("{0}")]
    Domain(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid measurement: {0}")]
    InvalidPovm(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numerical routine failed: {0}")]
    Numerical(String),

    #[error("failed to parse {what}: {message}")]
    Parse { what: &'static str, message: String },

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
