//! Experiment harness for the `fairfed` simulator: TOML experiment files,
//! built-in recipes, the `run` / `sweep-alpha` / `compare` / `oracle`
//! commands, and summary tables.

pub mod commands;
pub mod config;
mod error;
mod output;
pub mod recipes;
pub mod summary;

pub use commands::{cmd_compare, cmd_oracle, cmd_run, cmd_sweep_alpha};
pub use config::ExperimentSpec;
pub use error::{CliError, Result};
pub use output::write_atomic;
