//! Library behind the `riskbench` command: CSV ingestion, TOML/flag
//! configuration and the `simulate`, `backtest` and `estimate` commands.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;

use std::ffi::OsString;

use clap::Parser;

pub use args::{Cli, Command};
pub use error::{CliError, Result};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => commands::simulate(&config::simulate_config(&a)?),
        Command::Backtest(a) => commands::backtest(&config::run_config(&a)?).map(|_| ()),
        Command::Estimate(a) => commands::estimate(&config::run_config(&a)?).map(|_| ()),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Validation(e.to_string()))?;
    run(cli)
}
