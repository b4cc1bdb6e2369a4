use std::io;
use std::path::PathBuf;

use thiserror::Error;
use zakai_mimc_core::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// Process exit status: 2 bad configuration, 3 unstable correlation, 4 over budget.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                CoreError::StabilityViolation { .. } => 3,
                CoreError::BudgetExceeded { .. } => 4,
                CoreError::InvalidModel(_)
                | CoreError::InvalidArgument(_)
                | CoreError::InvalidAccuracy(_)
                | CoreError::DomainMisaligned(_) => 2,
                _ => 1,
            },
            CliError::Io { .. } | CliError::Csv(_) => 1,
        }
    }
}
