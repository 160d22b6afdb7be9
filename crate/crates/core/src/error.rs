use thiserror::Error;

use crate::quadrature::QuadError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unknown or malformed catalog entry: {0}")]
    Catalog(String),

    #[error(transparent)]
    Quadrature(#[from] QuadError),

    /// The integrator stopped before meeting its tolerance.
    #[error("quadrature did not converge for {context}: estimate {estimate:e}, error {error_estimate:e} after {subdivisions} subdivisions")]
    NotConverged {
        context: String,
        estimate: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("function value is not finite at x = {x}: {value}")]
    NonFiniteValue { x: f64, value: f64 },

    #[error("invalid JSON spec: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
