use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Parser)]
#[command(name = "hwsim", version, about = "Epidemics on households and workplaces with movers")]
pub struct Cli {
    /// Worker threads (default: all cores). Never changes the output bytes.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Use full-scale simulation and Monte Carlo counts.
    #[arg(long, global = true)]
    pub paper_scale: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Draw one population and write its household/workplace layout.
    Generate(GenerateArgs),
    /// Simulate final outcomes and estimate rho and z.
    Simulate(SimulateArgs),
    /// Local clump and susceptibility-set sizes on one realized graph.
    Census(CensusArgs),
    /// Offspring tables of the within-complex epidemics.
    Tables(TablesArgs),
    /// Thresholds, final size and outbreak probability.
    Analyze(AnalyzeArgs),
    /// Analyze over a grid of theta, d and infectious-period laws.
    Sweep(SweepArgs),
    /// Final-size histograms for the four standard panels.
    Fig1(Fig1Args),
    /// Simulated vs limiting rho and z as n grows.
    Fig2(Fig2Args),
    /// z and R* against theta for d = 1..4 and both period laws.
    Fig3(Fig3Args),
    /// Re-run a manifest and compare output hashes.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Model configuration file (key=value lines).
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, short)]
    pub out: PathBuf,
    /// Base seed; overrides the config's `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExactArg {
    Auto,
    Force,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    Auto,
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Clump,
    Susset,
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    /// Exact tables (constant period only) or Monte Carlo.
    #[arg(long, value_enum, default_value_t = ExactArg::Auto)]
    pub exact: ExactArg,
    /// Monte Carlo samples per seed type.
    #[arg(long, alias = "mc-samples")]
    pub n_mc: Option<u64>,
    /// Replicate batches for standard errors.
    #[arg(long, default_value_t = 10)]
    pub replicates: usize,
    /// Draws per fine-typed library.
    #[arg(long)]
    pub library_size: Option<u64>,
    #[arg(long, value_enum, default_value_t = RouteArg::Auto)]
    pub route: RouteArg,
    /// Draw the initial case's contacts at the plain household/workplace rates.
    #[arg(long)]
    pub unprimed_seed_rates: bool,
    /// Reuse Monte Carlo tables stored here.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of epidemics (default 10^4, 10^5 at paper scale).
    #[arg(long)]
    pub runs: Option<u64>,
    /// Final size at or above which an outbreak is major (default ceil(ln n)).
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// One network for all runs instead of a fresh one per run.
    #[arg(long)]
    pub fixed_network: bool,
    /// Index of the initial case (default: uniform at random).
    #[arg(long)]
    pub initial: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct CensusArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct TablesArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, value_enum, default_value_t = KindArg::Susset)]
    pub kind: KindArg,
    /// Also write mean fine-typed offspring counts from the libraries.
    #[arg(long)]
    pub fine: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Rl,
    Rstar,
    Z,
    Rho,
    All,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// What to compute; thresholds are always reported.
    #[arg(long, value_enum, default_value_t = Quantity::All)]
    pub quantity: Quantity,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Theta values: `start:step:end` or a comma list (default 0:0.025:1
    /// for sweep, 0:0.05:1 for fig3).
    #[arg(long)]
    pub theta: Option<String>,
    /// Households per workplace.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 2, 3, 4])]
    pub d: Vec<usize>,
    /// Infectious-period laws.
    #[arg(long, value_delimiter = ',', default_values_t = vec!["constant".to_string(), "exponential".to_string()])]
    pub laws: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FigCommon {
    /// Base parameters (defaults to the standard figure settings).
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct Fig1Args {
    #[command(flatten)]
    pub common: FigCommon,
    /// Epidemics per panel (default 10^4, 10^5 at paper scale).
    #[arg(long)]
    pub n_sims: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct Fig2Args {
    #[command(flatten)]
    pub common: FigCommon,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 2, 3])]
    pub d: Vec<usize>,
    /// Population sizes (default: the standard grid); rounded down to a
    /// multiple of the workplace size.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Runs behind each rho estimate.
    #[arg(long)]
    pub rho_runs: Option<u64>,
    /// Major outbreaks behind each z estimate (default 2000, 10^4 at paper scale).
    #[arg(long)]
    pub majors: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct Fig3Args {
    #[command(flatten)]
    pub common: FigCommon,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Manifest to replay.
    pub manifest: PathBuf,
    /// Directory for the replayed outputs.
    #[arg(long, short)]
    pub out: PathBuf,
}
