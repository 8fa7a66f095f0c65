//! Library side of the `emrank` binary: commands, records, cache and output.

pub mod cache;
pub mod commands;
pub mod output;
pub mod record;

pub use commands::{CliError, Context, EXIT_INVALID, EXIT_MISMATCH, EXIT_OK, EXIT_RESOURCE};
