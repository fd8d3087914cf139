//! Library behind the `l0pen` binary: configuration, commands and
//! performance profiles.

pub mod commands;
pub mod config;
pub mod error;
pub mod profile;

pub use error::{CliError, CliResult};
