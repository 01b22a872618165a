use std::path::PathBuf;

use cascade_core::simulate::SimMode;
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Cascade-size distribution of the Gamma(2, p) branching process:
/// evaluation, simulation and self-checks.
#[derive(Debug, Parser)]
#[command(name = "cascade-gamma", version)]
pub struct Cli {
    /// Flat `key=value` file supplying options not given as flags;
    /// a key that is also given as a flag is an error.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the cascade density g(x) and its large-x asymptote.
    Density(DensityArgs),
    /// Tabulate the lattice cascade mass function P{Z_δ(m) = n}.
    Pmf(PmfArgs),
    /// Mean and variance of the cascade size (closed form and quadrature).
    Moments(MomentsArgs),
    /// Probability that the cascade is finite.
    Extinction(ExtinctionArgs),
    /// Monte Carlo campaign with one of the three engines.
    Simulate(SimulateArgs),
    /// Check the normalisation of g against both extinction routes.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Continuous,
    Discrete,
    Walk,
}

impl From<ModeArg> for SimMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Continuous => SimMode::Continuous,
            ModeArg::Discrete => SimMode::Discrete,
            ModeArg::Walk => SimMode::Walk,
        }
    }
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; `-` is standard output.
    #[arg(long, default_value = "-", value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    /// Gamma scale p > 0.
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub x_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub x_max: f64,
    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PmfArgs {
    #[arg(long)]
    pub p: f64,
    /// Lattice resolution m = 1/δ; needs m·p > 1.
    #[arg(long)]
    pub m: u64,
    /// Last tabulated n; by default the table runs until the remaining
    /// mass is negligible.
    #[arg(long)]
    pub n_max: Option<u64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long)]
    pub p: f64,
    /// Also report the lattice moments at this resolution.
    #[arg(long)]
    pub m: Option<u64>,
    /// Absolute tolerance of the moment quadratures.
    #[arg(long, default_value_t = 1e-10)]
    pub abs_tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ExtinctionArgs {
    #[arg(long)]
    pub p: f64,
    /// Also report the lattice (martingale-root) probability.
    #[arg(long)]
    pub m: Option<u64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Continuous)]
    pub mode: ModeArg,
    #[arg(long)]
    pub p: f64,
    /// Lattice resolution for the discrete and walk engines.
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Censoring threshold on the total size.
    #[arg(long, default_value_t = cascade_core::simulate::DEFAULT_CAP)]
    pub cap: f64,
    /// Continuous-engine extinction threshold.
    #[arg(long, default_value_t = cascade_core::simulate::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Also write the histogram as CSV to this path.
    #[arg(long, value_name = "PATH")]
    pub histogram: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub p: f64,
    /// Pass threshold for both residuals; the quadrature runs at 1/100 of it.
    #[arg(long, default_value_t = 1e-6)]
    pub abs_tol: f64,
    #[command(flatten)]
    pub output: Output,
}
