//! Library side of the `abfactor` command-line tool.

pub mod commands;
pub mod format;

pub use commands::{CliError, Outcome};
