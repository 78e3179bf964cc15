//! Config parsing, dispatch, tables and run manifests for the `dilute`
//! binary.

pub mod config;
pub mod error;
pub mod manifest;
pub mod run;
pub mod table;

pub use config::{RunConfig, Subcommand};
pub use error::CliError;
pub use manifest::RunManifest;
pub use run::{dispatch, run};
