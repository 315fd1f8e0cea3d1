//! Batch front end: TOML configs in, CSV or JSON tables out.

pub mod config;
pub mod demo;
pub mod error;
pub mod ode;
pub mod output;
pub mod parametrix;
pub mod wave;

use config::{RunConfig, Subcommand};
use error::CliError;
use output::Table;

/// Tables and stdout lines of a run; `failure` marks a numerical acceptance
/// failure discovered after the tables were produced.
#[derive(Debug, Default)]
pub struct Report {
    pub tables: Vec<Table>,
    pub lines: Vec<String>,
    pub failure: Option<String>,
}

pub fn run(sub: Subcommand, cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate(sub)?;
    match sub {
        Subcommand::Ode => ode::run(cfg),
        Subcommand::Parametrix => parametrix::run(cfg),
        Subcommand::Wave => wave::run(cfg),
        Subcommand::SchemeDemo => demo::run(cfg),
    }
}
