use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("continued fraction exhausted: need {required} quotients, {available} available")]
    InsufficientQuotients { required: usize, available: usize },

    #[error("shift must have nonzero imaginary part (got {0})")]
    RealShift(f64),

    #[error("zero matrix has no log scale")]
    ZeroMatrix,

    #[error("eigensolver failed to converge at index {0}")]
    NoConvergence(usize),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error(
        "band search in parent [{lo:.15}, {hi:.15}] (level {level}, {kind}): found {found}, expected {expected}"
    )]
    ChildCount {
        lo: f64,
        hi: f64,
        level: usize,
        kind: String,
        found: usize,
        expected: usize,
    },

    #[error("hypothesis not met: {0}")]
    Hypothesis(String),

    #[error("index {index} out of range (available {available})")]
    OutOfRange { index: i64, available: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
