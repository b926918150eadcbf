use thiserror::Error;

/// Errors surfaced by the numerical and modeling layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operator is not Hermitian (max deviation {deviation:.3e} > {tolerance:.3e})")]
    NotHermitian { deviation: f64, tolerance: f64 },
    #[error("operator is not a valid density operator: {0}")]
    InvalidDensity(String),
    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid access structure: {0}")]
    InvalidAccessStructure(String),
    #[error("support violation: {0}")]
    SupportViolation(String),
    #[error("iteration did not converge after {iterations} steps (best bracket [{lower}, {upper}])")]
    NonConvergence {
        iterations: usize,
        lower: f64,
        upper: f64,
    },
    #[error("epsilon budget violation: {0}")]
    BudgetViolation(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("invalid channel description: {0}")]
    InvalidChannel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
