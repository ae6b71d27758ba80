use thiserror::Error;

/// Errors raised by the cancellation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch: expected {expected}, got {got} ({what})")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value:e}, dimension {dim})")]
    NotPositiveDefinite { pivot: usize, value: f64, dim: usize },

    #[error("degenerate transform: {0}")]
    DegenerateTransform(String),

    #[error("canceller state machine: expected phase {expected:?}, found {found:?}")]
    Phase {
        expected: crate::kalman::Phase,
        found: crate::kalman::Phase,
    },

    #[error("metric undefined: {0}")]
    Metric(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Shape {
            what,
            expected,
            got,
        })
    }
}
