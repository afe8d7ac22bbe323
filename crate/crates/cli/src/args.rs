use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "lpb", version, about = "Large precinct bias analysis of precinct-level election results")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate an input file without analysing it.
    Validate(DataArgs),
    /// Run the full pipeline: pools, brackets, fits, vote gains, optional diagnostics.
    Analyze(AnalyzeArgs),
    /// Size-bracket statistics for one or both win pools.
    Brackets(BracketArgs),
    /// Robustness diagnostics.
    #[command(subcommand)]
    Diagnose(DiagnoseCommand),
    /// Generate a synthetic electorate from a JSON config.
    Synth(SynthArgs),
    /// Multi-file tables and figure rendering.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Precinct CSV file.
    #[arg(long)]
    pub input: PathBuf,
    /// JSON column mapping; the canonical layout is assumed when omitted.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    /// Election label, e.g. PA-2008. Defaults to the input file stem.
    #[arg(long)]
    pub label: Option<String>,
    /// Scope as `state=PA` or `state=MI,county=Wayne`.
    #[arg(long)]
    pub scope: Option<String>,
    /// County within the scope.
    #[arg(long)]
    pub county: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    /// Large-precinct threshold in two-party votes.
    #[arg(long, default_value_t = lpb_core::DEFAULT_THRESHOLD,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub threshold: u64,
    /// Significance level; overrides LPB_ALPHA.
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Grid {
    Brackets,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub fit: ThresholdArgs,
    #[arg(long, default_value_t = lpb_core::DEFAULT_BRACKET_WIDTH,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub bracket_width: u64,
    /// Vote-weighted bracket means instead of per-precinct means.
    #[arg(long)]
    pub weighted: bool,
    /// Report JSON path; the report goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write SVG figures and plot data into this directory.
    #[arg(long)]
    pub figures: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub grid: Option<Grid>,
    /// Add a random-order baseline with this many shuffles per pool.
    #[arg(long)]
    pub shuffle: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Add the combined-pool fit.
    #[arg(long)]
    pub combined: bool,
    /// Add a threshold sweep, e.g. `600,800`.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PoolChoice {
    Blue,
    Red,
    Both,
}

#[derive(Debug, Args)]
pub struct BracketArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = lpb_core::DEFAULT_BRACKET_WIDTH,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub width: u64,
    #[arg(long, value_enum, default_value_t = PoolChoice::Both)]
    pub pool: PoolChoice,
    #[arg(long)]
    pub weighted: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum DiagnoseCommand {
    /// Rank-x fits over shuffled pools.
    Shuffle(ShuffleArgs),
    /// One fit over both win pools merged.
    Combined(CombinedArgs),
    /// Per-pool vote gain at several thresholds (CSV).
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct ShuffleArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = PoolChoice::Both)]
    pub pool: PoolChoice,
    /// Number of shuffles.
    #[arg(long, default_value_t = 100)]
    pub seeds: usize,
    /// First RNG seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CombinedArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub fit: ThresholdArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub thresholds: Vec<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// SynthConfig JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Precinct CSV destination.
    #[arg(long)]
    pub out: PathBuf,
    /// Planted-truth JSON destination.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Override the config's rng_seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

#[derive(Debug, Subcommand)]
pub enum ReportCommand {
    /// One summary row per input file.
    Table(TableArgs),
    /// Render figures from a saved report JSON.
    Figures(FiguresArgs),
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub inputs: Vec<PathBuf>,
    /// Row labels, one per input; file stems are used otherwise.
    #[arg(long, num_args = 1..)]
    pub labels: Vec<String>,
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    #[command(flatten)]
    pub fit: ThresholdArgs,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, value_enum)]
    pub grid: Option<Grid>,
}
