use thiserror::Error;

/// Errors raised across the crate.
///
/// Variants up to [`Error::Io`] are caller errors (bad input, bad
/// parameters); [`Error::Io`] and [`Error::Internal`] are environment or
/// programming failures. [`Error::is_input_error`] draws that line for the
/// command-line exit code.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pool size: {0} (must be at least 1)")]
    InvalidPoolSize(usize),
    #[error("invalid size {size}: must lie in 1..={max}")]
    InvalidSize { size: usize, max: usize },
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("value {value} outside the range [{low}, {high}]")]
    OutOfRange { value: f64, low: f64, high: f64 },
    #[error("prior is not invertible: {0}")]
    NonInvertible(String),
    #[error("dimension mismatch: {what} has length {got}, pool has {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("pool of {m} hypotheses is too large for exhaustive enumeration (max {max})")]
    TooLarge { m: usize, max: usize },
    #[error("pool carries no null mask (ground truth required)")]
    MissingGroundTruth,
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("invalid correlation {rho}: must lie in [{min}, 1)")]
    InvalidCorrelation { rho: f64, min: f64 },
    #[error("density does not sum to one (sum = {sum})")]
    InvalidDensity { sum: f64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("hypothesis {id}: {msg}")]
    Validation { id: String, msg: String },
    #[error("duplicate hypothesis id {0:?}")]
    DuplicateId(String),
    #[error("input contains no hypotheses")]
    EmptyPool,
    #[error("cannot read {path}: {source}")]
    InputFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Internal(_))
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
