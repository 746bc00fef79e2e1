use thiserror::Error;

/// Errors raised by channels, fixtures, constructions and games.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid history: {0}")]
    InvalidHistory(String),

    #[error("channel has no exact probability mass function")]
    NoExactPmf,

    #[error("ml must be a power of two (got {0})")]
    NotPowerOfTwo(usize),

    #[error("length mismatch: {what} expected {expected} bits, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("wrong document count: expected {expected}, got {actual}")]
    WrongDocumentCount { expected: usize, actual: usize },

    #[error("unsupported signature kind: {0}")]
    UnsupportedKind(String),

    #[error("schedule lengths sum to {actual}, expected {expected}")]
    ScheduleMismatch { expected: usize, actual: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed encoding: {0}")]
    Malformed(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
