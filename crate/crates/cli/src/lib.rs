//! Experiment runner for `zakai-mimc-core`: TOML configuration, rayon-parallel sampling and CSV
//! output for the rate tables, theta curve, estimator runs, complexity sweeps and profit grids.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod parallel;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
pub use parallel::ParallelSampler;
