use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("set is not a cone: {0}")]
    NotACone(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("power iteration collapsed to the zero vector after {restarts} restarts")]
    PowerIterationCollapse { restarts: usize },

    /// Carries the best iterate so callers can decide whether it is usable.
    #[error("Dykstra projection did not converge in {iterations} iterations (residual {residual:e})")]
    DykstraNotConverged {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },

    #[error("non-finite value in {component} at iteration {iteration}")]
    NonFinite {
        component: &'static str,
        iteration: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
