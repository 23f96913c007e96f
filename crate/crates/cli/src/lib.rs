//! Command-line front end: every table is emitted as CSV or JSON with a
//! provenance header.

pub mod commands;
pub mod error;
pub mod grid;
pub mod output;

pub use commands::{run, Cli};
pub use error::CliError;
