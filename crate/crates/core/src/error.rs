use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Degenerate critical points and failed verifications are reported as data,
/// not as errors; these variants cover malformed input and numerical breakdown.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("integration failure: {0}")]
    Integration(String),

    #[error("outside the domain: {0}")]
    Domain(String),

    #[error("chart error: {0}")]
    Chart(String),

    #[error("no integer vector within tolerance for direction {0:?}")]
    NoIntegerDirection(Vec<f64>),

    #[error("value cloud is not a graph: h-spread {spread:.3e} at t = {at:?}")]
    NotAGraph { spread: f64, at: Vec<f64> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid Williamson type: {0}")]
    InvalidType(String),

    #[error("unknown system: {0}")]
    UnknownSystem(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
