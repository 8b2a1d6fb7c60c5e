//! Command-line front end: config resolution, datasets, CSV tables and the
//! three subcommands.

pub mod args;
pub mod commands;
pub mod dataset;
pub mod error;
pub mod manifest;
pub mod settings;
pub mod tables;

pub use error::{CliError, CliResult, ExitKind};

use args::{Cli, Command};
use clap::Parser;

/// Parses `argv` and runs the selected command. Clap usage errors exit the
/// process directly with status 2.
pub fn run(argv: Vec<String>) -> CliResult<()> {
    let (kept, overrides) = settings::split_overrides(argv)?;
    let cli = Cli::try_parse_from(kept).unwrap_or_else(|e| e.exit());
    match &cli.command {
        Command::Simulate(a) => commands::cmd_simulate(a, &overrides),
        Command::Estimate(a) => commands::cmd_estimate(a, &overrides),
        Command::Experiment(a) => commands::cmd_experiment(a, &overrides),
    }
}
