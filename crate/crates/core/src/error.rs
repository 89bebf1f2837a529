use thiserror::Error;

/// Errors raised by the analytic and verification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("virtual value is not monotone near theta = {witness}")]
    NotRegular { witness: f64 },

    #[error("distribution {name} is not strongly regular")]
    NotStronglyRegular { name: String },

    #[error("allocation rule is not nondecreasing: {0}")]
    NotMonotone(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("couplings have different marginals (gap {gap:.3e} at {at})")]
    MarginalMismatch { gap: f64, at: f64 },

    #[error("percentile grids differ")]
    GridMismatch,

    #[error("mean rent is not positive ({0})")]
    ZeroMean(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("integral does not converge: {0}")]
    NonIntegrable(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
