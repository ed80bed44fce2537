//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A distribution parameter is outside its domain (e.g. `sigma <= 0`).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A function argument is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Too few blocks remain to carry out the requested fit.
    #[error("insufficient data: {available} blocks available, at least {required} required")]
    InsufficientData { available: usize, required: usize },

    /// A fit did not converge where a converged fit is a precondition.
    #[error("fit did not converge: {0}")]
    NotConverged(String),

    /// The estimated information matrix is singular or not positive definite.
    #[error("singular information matrix")]
    SingularInformation,

    /// Malformed input data, reported with a 1-based line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// An invalid run configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
