use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::io::InputMode;

/// Conjugate-prior VaR/CVaR estimation, scenario simulation and
/// traffic-light backtesting.
#[derive(Debug, Parser)]
#[command(name = "riskbench", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic return history as CSV.
    Simulate(SimulateArgs),
    /// Backtest estimators with the Basel traffic-light test.
    Backtest(RunArgs),
    /// Write daily -VaR and -CVaR series for plotting.
    Estimate(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioArgs {
    /// mvn, pmvn or dcc (alias mgarch).
    #[arg(long)]
    pub scenario: Option<String>,
    /// Number of assets.
    #[arg(long)]
    pub k: Option<usize>,
    /// Path length T0.
    #[arg(long)]
    pub t: Option<usize>,
    /// RNG seed; falls back to the config file, then RISKBENCH_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// First synthetic date (YYYY-MM-DD); dates advance over weekdays.
    #[arg(long)]
    pub start_date: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Replication index, selecting an independent RNG stream.
    #[arg(long)]
    pub replication: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Return or price history CSV (`date,ASSET1,...`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<InputMode>,
    /// Simulated replications when no input file is given.
    #[arg(long)]
    pub replications: Option<u64>,
    /// Replication index used by `estimate` on simulated data.
    #[arg(long)]
    pub replication: Option<u64>,
    /// Rolling estimation window in days.
    #[arg(long)]
    pub window: Option<usize>,
    /// Comma-separated risk levels.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Estimator, repeatable: vs(n_r,h,l[,r0]), vs, eb, eb(d0,r0), sample.
    #[arg(long = "method")]
    pub methods: Vec<String>,
    /// Short window for a bare `vs`.
    #[arg(long)]
    pub nr: Option<usize>,
    /// High-volatility exponent for a bare `vs`.
    #[arg(long)]
    pub h: Option<f64>,
    /// Low-volatility exponent for a bare `vs`.
    #[arg(long)]
    pub l: Option<f64>,
    /// Prior precision scale for a bare `vs`.
    #[arg(long)]
    pub r0: Option<f64>,
    /// `equal` or a weights CSV.
    #[arg(long)]
    pub weights: Option<String>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Record wall-clock runtimes in the report (otherwise written as 0).
    #[arg(long)]
    pub timings: bool,
}
