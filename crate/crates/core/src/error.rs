use thiserror::Error;

/// Errors raised by the geometry and verification routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("polar domain error: {0}")]
    PolarDomain(String),
    #[error("quadrature failed after maximal refinement (best estimate {estimate}, error {error})")]
    QuadratureFailure { estimate: f64, error: f64 },
    #[error("non-finite evaluation at {point:?}")]
    Evaluation { point: Vec<f64> },
    #[error("precision error: {0}")]
    Precision(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn hypothesis(msg: impl Into<String>) -> Self {
        Error::Hypothesis(msg.into())
    }
}
