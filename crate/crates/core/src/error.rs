use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("enumeration cap exceeded: {requested} > {cap}")]
    CapExceeded { requested: u128, cap: u128 },

    #[error("integer overflow in exact arithmetic ({0})")]
    Overflow(&'static str),

    #[error("rho = {rho:e} is outside the asymptotic regime (requires rho > {threshold:e})")]
    OutOfRegime { rho: f64, threshold: f64 },

    #[error("bounds not claimed for this error vector: {0}")]
    AssumptionViolated(String),

    #[error("quadrature did not converge: relative error {achieved:e} > {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("power fairness violated: mean optical power {found} != 1")]
    PowerFairness { found: f64 },

    #[error("insufficient points: need {needed}, have {found}")]
    InsufficientPoints { needed: usize, found: usize },

    #[error("config: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
