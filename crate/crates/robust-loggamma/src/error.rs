use thiserror::Error;

/// Errors surfaced by the estimation and inference routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the domain of the loggamma family.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A function argument lies outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested moment does not exist for these parameters.
    #[error("moment undefined: {0}")]
    MomentUndefined(String),

    /// An estimator failed to produce a usable fit.
    #[error("estimation failure: {0}")]
    EstimationFailure(String),

    /// A matrix required by the computation is singular or ill-conditioned.
    #[error("singular matrix: {0}")]
    Singular(String),

    /// Inconsistent arguments to a public entry point.
    #[error("usage error: {0}")]
    Usage(String),

    /// Problems reading or parsing input data.
    #[error("input error: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
