use thiserror::Error;

use crate::params::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the requested function.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(ValidationReport),

    /// Malformed configuration document or command-line value.
    #[error("configuration error: {0}")]
    Config(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("integration on [{lo}, {hi}] stopped at estimated error {error:.3e} (tolerance {tolerance:.1e})")]
    Integration {
        lo: f64,
        hi: f64,
        error: f64,
        tolerance: f64,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
