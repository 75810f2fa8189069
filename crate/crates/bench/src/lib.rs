//! Experiment driver for `npqn-core`: configuration, seeded multi-trial
//! campaigns, tensor files and result outputs.

pub mod config;
pub mod files;
pub mod output;
pub mod runner;

pub use config::{ConfigError, ExperimentConfig};
pub use output::emit_outputs;
pub use runner::{run_experiment, run_trials, Campaign, Summary, TrialResult};
