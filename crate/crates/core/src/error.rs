use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid run profile m={m} r1={r1} r2={r2}: {reason}")]
    InvalidProfile {
        m: usize,
        r1: usize,
        r2: usize,
        reason: &'static str,
    },

    #[error("string {0} is not a member of S (must start and end with 1 and use only 1- and 2-runs)")]
    NotInS(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("construction guard: {candidates} candidates exceeds the limit of {limit} (use --force to override)")]
    TooManyCandidates { candidates: u128, limit: u128 },

    #[error("symbol {symbol} out of range for alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },

    #[error("message has length {got}, expected {expected}")]
    MessageLength { got: usize, expected: usize },

    #[error("outer code candidate pool exhausted: found {achieved} of {needed} codewords")]
    PoolExhausted { achieved: usize, needed: usize },

    #[error("inner codebook has {available} codewords but the outer alphabet needs {needed}")]
    InnerTooSmall { available: usize, needed: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
