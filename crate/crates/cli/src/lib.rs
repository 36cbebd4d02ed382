//! Config-driven experiment runner for `bohmsim-core`.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{parse_config, ConfigError, Experiment, ExperimentConfig};
pub use experiments::{run, Contract, ExperimentReport, Table};
pub use output::write_outputs;
