//! Command-line arguments.

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "gibbs", version, about = "Gibbs-type random partitions: fit, estimate, simulate, validate")]
pub struct Cli {
    /// Starting precision (bits) for floating-point evaluation.
    #[arg(long, global = true, default_value_t = 256)]
    pub precision_bits: u32,

    /// Evaluate in exact rational arithmetic.
    #[arg(long, global = true)]
    pub exact: bool,

    /// Emit JSON instead of tab-separated tables.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximize the EPPF likelihood over the model parameters.
    Fit(FitArgs),
    /// Expected numbers of blocks of size at most τ after m more draws.
    Estimate(EstimateArgs),
    /// Monte Carlo draws from the prior or from the continuation of a sample.
    Simulate(SimulateArgs),
    /// Run invariant and reproduction suites.
    Validate(ValidateArgs),
    /// Subsample, refit and predict the held-out part of a sample.
    Crossval(CrossvalArgs),
}

/// A frequency file, a raw observation file, or the embedded "tomato" data.
#[derive(Debug, Args, Clone)]
pub struct InputArgs {
    /// Path to an "l<TAB>m_l" file, or "tomato".
    pub input: String,

    /// Read one observation label per line instead of frequency counts.
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Dp,
    Pd,
    Gnedin,
}

#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::Pd)]
    pub model: ModelKind,
    /// Discount σ (pd). Decimals are read exactly, so 0.612 means 612/1000.
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<String>,
    /// Concentration θ (dp, pd).
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// γ (gnedin).
    #[arg(long)]
    pub gamma: Option<String>,
    /// ζ (gnedin).
    #[arg(long, default_value = "0")]
    pub zeta: String,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = ModelKind::Pd)]
    pub model: ModelKind,
    /// Include the objective grid in the output.
    #[arg(long)]
    pub grid: bool,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Additional sample sizes.
    #[arg(short = 'm', long = "m", value_delimiter = ',', required = true)]
    pub m: Vec<usize>,
    /// Frequency thresholds.
    #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
    pub tau: Vec<usize>,
    /// Report each block size l ≤ max τ separately.
    #[arg(long)]
    pub per_l: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatKind {
    /// Indicator that the final partition has a single block.
    SingleBlock,
    /// Number of blocks created by the simulated draws.
    Blocks,
    #[value(name = "O_l")]
    OL,
    #[value(name = "N_l")]
    NL,
    #[value(name = "M_l")]
    ML,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Conditioning sample (omit together with --prior).
    pub input: Option<String>,
    /// Read the conditioning sample as raw observation labels.
    #[arg(long)]
    pub raw: bool,
    /// Sample from the prior instead of continuing a sample.
    #[arg(long)]
    pub prior: bool,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Prior sample size.
    #[arg(short = 'n', long = "n")]
    pub n: Option<usize>,
    /// Number of additional draws after the conditioning sample.
    #[arg(short = 'm', long = "m")]
    pub m: Option<usize>,
    /// Replicates.
    #[arg(short = 'R', long = "replicates", default_value_t = 10_000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = StatKind::ML)]
    pub stat: StatKind,
    /// Block size for O_l, N_l and M_l.
    #[arg(short = 'l', long = "l", default_value_t = 1)]
    pub l: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Recursion,
    Normalization,
    Oracle,
    Closed,
    Table2,
    Fit,
    Montecarlo,
    Limits,
    Additivity,
    Crossval,
    All,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    /// Seed for the randomized suites.
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CrossvalArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 1000)]
    pub subsample_size: usize,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
    pub tau: Vec<usize>,
}
