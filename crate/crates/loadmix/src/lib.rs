//! Command-line companion of `loadmix-core`: JSON configuration, CSV and JSON
//! file formats, provenance stamping and the `loadmix` subcommands.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod provenance;

pub use cli::run;
pub use error::{CliError, CliResult};
