use thiserror::Error;

/// Errors raised by the solver, the coupling layer and the estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid does not align with the domain: {0}")]
    DomainMisaligned(&'static str),
    #[error("invalid model parameters: {0}")]
    InvalidModel(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("tridiagonal solve broke down at row {row}")]
    SolverFailure { row: usize },
    #[error("invalid level ({l1}, {l2})")]
    InvalidLevel { l1: u32, l2: u32 },
    #[error("target accuracy must be positive, got {0}")]
    InvalidAccuracy(f64),
    #[error("no pilot statistics for level ({l1}, {l2})")]
    MissingPilot { l1: u32, l2: u32 },
    #[error("rho = {rho} exceeds the mean-square stability limit 1/sqrt(2)")]
    StabilityViolation { rho: f64 },
    #[error("projected work {projected:.3e} exceeds the budget {ceiling:.3e}")]
    BudgetExceeded { projected: f64, ceiling: f64 },
    #[error("theta did not converge (last estimate {last} at N = {n})")]
    NoConvergence { last: f64, n: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
