//! Command-line front end: configuration, CSV ingestion, model archives and
//! network exports.

pub mod archive;
pub mod commands;
pub mod config;
pub mod error;
pub mod export;
pub mod io;

pub use commands::run;
pub use error::{CliError, CliResult};
