//! Configuration and orchestration behind the `pcs` command.

pub mod config;
pub mod experiment;

pub use config::{load_config, validate_config, ConfigError, Experiment, ExperimentConfig, Mode};
pub use experiment::{run_experiment, Outcome, Results};

/// Exit status for configuration and usage problems.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status for failures while simulating or writing results.
pub const EXIT_RUN: u8 = 1;
