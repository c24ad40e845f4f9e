use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A series or expansion is too short for the requested operation.
    #[error("insufficient precision: {what} needs {needed} coefficients, have {available}")]
    InsufficientPrecision {
        what: String,
        needed: usize,
        available: usize,
    },

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural identity that must hold by construction failed.
    #[error("internal consistency failure: {0}")]
    Consistency(String),

    /// A series was expected to lie in a form space but does not.
    #[error("{0}")]
    NotInSpace(String),

    /// Evaluation at a pole of the gamma function.
    #[error("gamma function pole at s = {0}")]
    Pole(String),

    /// An iterative numerical method failed to converge.
    #[error("no convergence: {0}")]
    Convergence(String),

    /// Simultaneous eigenbasis could not be separated with the available primes.
    #[error("eigenspaces not split: {0}")]
    Unsplit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
