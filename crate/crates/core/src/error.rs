use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("input size mismatch: expected {expected}, got {actual}")]
    InputSize { expected: usize, actual: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("channel matrix is singular or not square")]
    SingularMatrix,
    #[error("no power-of-two constellation reaches {0} b/s/Hz")]
    NoSolution(f64),
    #[error("numerical degeneracy: {0}")]
    Numerical(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
