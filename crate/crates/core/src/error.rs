use thiserror::Error;

/// Errors surfaced by the solvers, the Monte Carlo oracle and the file readers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid input: bad dimensions, out-of-range scalars, violated assumptions.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A computation produced something it should not have (indefinite matrix,
    /// non-positive determinant, quadrature disagreement, ...).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// An iterative solver ran out of iterations.
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
        /// Last iterate, in the solver's own component order.
        last: Vec<f64>,
    },

    /// Should be unreachable; indicates a bug rather than bad input.
    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

pub(crate) fn numerical<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Numerical(msg.into()))
}
