//! Error type shared by every module of the crate.

use alloc::string::String;

/// Errors raised by constructors and pipelines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("unknown loss `{0}`")]
    UnknownLoss(String),
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("weight {value} at index {index} is not allowed here: {reason}")]
    InvalidWeight {
        index: usize,
        value: f64,
        reason: &'static str,
    },
    #[error("loss `{name}` lacks a property required by this algorithm: {missing}")]
    UnsupportedLoss { name: String, missing: &'static str },
    #[error("instance generation failed: {0}")]
    Generation(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter { name, value, reason }
}
