use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "fpa",
    version,
    about = "Welfare guarantees and equilibria of first-price auctions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Cap on worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the welfare constant and fail unless it reaches 0.743.
    Constant(ConstantArgs),
    /// Write the ell(q) table as CSV.
    EllTable(EllTableArgs),
    /// Solve for an equilibrium and write its strategies.
    Solve(SolveArgs),
    /// Best-response residual of supplied strategies.
    Verify(VerifyArgs),
    /// Equilibrium welfare against the highest-value benchmark.
    Poa(PoaArgs),
    /// Audit the welfare lemmas on an equilibrium.
    Audit(AuditArgs),
}

#[derive(Debug, Args)]
pub struct ConstantArgs {
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Points in the ell table embedded in the report.
    #[arg(long, default_value_t = 1001)]
    pub grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EllTableArgs {
    /// Uniform q points covering [0, 1].
    #[arg(long, default_value_t = 1001)]
    pub points: usize,
    /// Absolute tolerance of the inner minimization.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Largest acceptable best-response residual (default 1e-4 symmetric, 1e-3 asymmetric).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Strategy knots per bidder.
    #[arg(long, default_value_t = 1024)]
    pub knots: usize,
    /// Directory for solution.json and strategy-<i>.csv; summary goes to stdout either way.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StrategySource {
    /// Strategy CSV per bidder; a single file is used for every bidder.
    /// Omitted: solve the instance first.
    #[arg(long, num_args = 1..)]
    pub strategies: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub source: StrategySource,
    /// Exit with status 5 when the residual exceeds this.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 257)]
    pub value_grid: usize,
    #[arg(long, default_value_t = 4097)]
    pub bid_grid: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WelfareMethod {
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Args)]
pub struct PoaArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub source: StrategySource,
    #[arg(long, value_enum, default_value_t = WelfareMethod::MonteCarlo)]
    pub method: WelfareMethod,
    /// Required for Monte Carlo.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    /// Residual tolerance when the instance has to be solved first.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub source: StrategySource,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    /// Slack added to the residual-induced slack.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
