//! Configuration files, CSV formats and subcommands around `katolab-core`.

pub mod commands;
pub mod config;
pub mod report;
pub mod table;

pub use config::{ConfigError, Overrides, RunConfig};
