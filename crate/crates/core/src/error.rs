use thiserror::Error;

/// Errors raised by the library operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("variable index {index} out of range for {n} variables")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("variable index {0} repeated within a tuple")]
    DuplicateIndex(usize),

    #[error("need at least {needed} variables, have {n}")]
    TooFewVariables { n: usize, needed: usize },

    #[error("brute force refused: {what} = {value} exceeds cap {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("rejection sampling gave up after {attempts} attempts")]
    RejectionExhausted { attempts: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed instance: {0}")]
    Malformed(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("learner failed: {0}")]
    Learner(String),

    #[error(transparent)]
    Parse(#[from] crate::io::ParseError),
}

pub type Result<T> = std::result::Result<T, Error>;
