//! Library side of the `rdrestore` command-line tool: run configuration,
//! subcommands and their error/exit-code mapping.

pub mod commands;
pub mod config;
pub mod error;

pub use config::RunConfig;
pub use error::CliError;
