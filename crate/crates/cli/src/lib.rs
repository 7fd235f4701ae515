//! Config-driven batch runner for the CIM solvers.
//!
//! A run is described by a TOML [`config::RunConfig`]; [`run::run`] executes
//! it and returns result rows that [`output::render`] turns into JSON lines
//! or CSV. Payloads carry no timestamps and do not depend on the worker count.

pub mod config;
pub mod output;
pub mod run;

pub use config::{ConfigError, RunConfig};
pub use output::{render, Row};
pub use run::run;
