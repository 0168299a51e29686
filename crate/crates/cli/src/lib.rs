//! Library side of the `mdheston` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

pub use error::CliError;
