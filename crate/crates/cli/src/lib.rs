//! Driver behind the `jbssc` binary: configuration layering, CSV and JSON
//! I/O, and the `simulate` / `fit` / `evaluate` / `replicate` commands.
//!
//! The JSON outputs follow the schemas in `schemas/`, exported here as
//! [`RESULTS_SCHEMA`] and [`METRICS_SCHEMA`].

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use error::{CliError, Result};

/// JSON Schema for `results.json`.
pub const RESULTS_SCHEMA: &str = include_str!("../schemas/results.schema.json");

/// JSON Schema for `metrics.json`.
pub const METRICS_SCHEMA: &str = include_str!("../schemas/metrics.schema.json");
