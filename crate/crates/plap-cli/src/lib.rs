//! Configuration parsing and command dispatch for the `plap` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, RunConfig};
pub use run::{run, RunError};
