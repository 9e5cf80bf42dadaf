//! Configuration and drivers behind the `gmfg` binary.

pub mod config;
pub mod run;

pub use config::{load_config, parse_config, ConfigError, ExperimentConfig};
pub use run::{run_experiment, Command};
