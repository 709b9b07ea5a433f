//! Configuration, pipeline and acceptance suite behind the `conesolve` binary.

pub mod commands;
pub mod config;
pub mod pipeline;
pub mod verify;

pub use commands::CliError;
pub use config::{Config, ConfigError};
