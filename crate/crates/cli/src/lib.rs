//! Scenario runner, file formats and report writers on top of
//! `cornerpmt-core`.

pub mod config;
pub mod error;
pub mod format;
pub mod run;

pub use error::{CliError, Result};
