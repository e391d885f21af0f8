use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("argument {t} lies beyond the horizon validity radius {limit}")]
    OutOfHorizon { t: f64, limit: f64 },
    #[error("divergent: {0}")]
    Divergent(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
