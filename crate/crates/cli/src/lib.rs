//! Command-line pipeline around `arbound-core`: CSV ingestion, order
//! selection reports, simulation and coverage experiments.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use error::{CliError, Result};
