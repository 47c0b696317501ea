//! Error type shared by all operations in this crate.

use core::fmt;

/// Errors produced by sign, estimator, and sampler operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument violates its documented domain (non-finite entry,
    /// out-of-range parameter, inconsistent dimensions, ...).
    InvalidInput(&'static str),
    /// The operation needs more observations than the input provides.
    InsufficientSample { needed: usize, got: usize },
    /// The input is formally valid but numerically degenerate for this
    /// operation (e.g. zero total variance, constant statistic sample).
    DegenerateInput(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::InsufficientSample { needed, got } => {
                write!(f, "requires n >= {needed} observations (got {got})")
            }
            Error::DegenerateInput(msg) => write!(f, "degenerate input: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
