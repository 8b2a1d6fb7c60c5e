use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Indirect sensing of a primary channel through an AF relay.
///
/// Any config field can be overridden with `--dotted.key VALUE`
/// (e.g. `--trials 50`, `--sparse.solver.p 0.8`).
#[derive(Debug, Parser)]
#[command(name = "chansense", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw one link realization and write it as a JSON dataset.
    Simulate(SimulateArgs),
    /// Estimate the primary channel from a dataset.
    Estimate(EstimateArgs),
    /// Run a Monte Carlo experiment and write CSV tables.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON experiment config or run manifest.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// paper-10db, paper-20db, paper-ramp-10db or paper-ramp-20db.
    #[arg(long)]
    pub preset: Option<String>,
    /// Overrides master_seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Dataset file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Dataset written by `simulate` or in the same format.
    #[arg(long)]
    pub dataset: PathBuf,
    /// indirect_ls, indirect_sparse_irls or indirect_sparse_l1.
    #[arg(long)]
    pub estimator: Option<String>,
    /// JSON estimate settings or run manifest.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; does not change the output.
    #[arg(long)]
    pub threads: Option<usize>,
}
