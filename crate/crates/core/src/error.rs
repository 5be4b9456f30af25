use thiserror::Error;

/// Errors raised by the toolkit, solver, harness and runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The growth function (or a derived quantity) violates the structural
    /// assumptions on the sampled domain.
    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("value out of representable range: {0}")]
    Range(String),

    #[error("conjugate diverges: {0}")]
    Divergence(String),

    #[error("no convergence at t={time:e} after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        time: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("numerical blow-up: {0}")]
    NumericalBlowup(String),

    #[error("region outside the solved domain: {0}")]
    OutOfDomain(String),

    #[error("configuration error at {pointer}: {message}")]
    Config { pointer: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
