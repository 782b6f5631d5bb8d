use thiserror::Error;

/// Errors raised by the simulator and the algorithm suite.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A gate, permutation, oracle table or state failed validation.
    #[error("validation error: {0}")]
    Validation(String),
    /// The request exceeds the configured simulation capacity.
    #[error("capacity error: {0}")]
    Capacity(String),
    /// A probabilistic procedure exhausted its retry budget.
    #[error("failure: {0}")]
    Failure(String),
    /// An internal consistency check did not hold.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

macro_rules! domain {
    ($($arg:tt)*) => { $crate::error::Error::Domain(format!($($arg)*)) };
}

macro_rules! validation {
    ($($arg:tt)*) => { $crate::error::Error::Validation(format!($($arg)*)) };
}

pub(crate) use domain;
pub(crate) use validation;
