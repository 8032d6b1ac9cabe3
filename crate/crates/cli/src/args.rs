use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "audit",
    version,
    about = "Reliability audit of risk-ratio meta-analyses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert each interval in an effect CSV to a p-value.
    Convert(ConvertArgs),
    /// Render a p-value plot as SVG or plot-data CSV.
    Plot(PlotArgs),
    /// Classify the shape of a p-value plot.
    Classify(ClassifyArgs),
    /// Count p-values above and below .05 and .001.
    Counts(InputArgs),
    /// Analysis search spaces from design counts.
    Space(SpaceArgs),
    /// PPV and NPV curves under bias.
    Predict(PredictArgs),
    /// Pool effects with heterogeneity statistics.
    Pool(PoolArgs),
    /// Generate a synthetic effect dataset.
    Simulate(SimulateArgs),
    /// Run the whole audit over a directory of CSV files.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Dataset label. Defaults to the bundled label for known file names, else the file stem.
    #[arg(long)]
    pub label: Option<String>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotFormat {
    Svg,
    Csv,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "svg")]
    pub format: PlotFormat,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 640)]
    pub width: u32,
    #[arg(long, default_value_t = 480)]
    pub height: u32,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// TOML file overriding classifier thresholds.
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpaceArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub fp_rate: f64,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.8)]
    pub power: f64,
    /// Comma-separated bias levels.
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.8")]
    pub bias: Vec<f64>,
    /// Log-spaced prevalence grid `lo:hi:n`.
    #[arg(long, default_value = "1e-4:1e-1:200")]
    pub grid: String,
    /// Explicit comma-separated prevalences; replaces the grid.
    #[arg(long, value_delimiter = ',')]
    pub prevalence: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PoolMethod {
    Dl,
    Fixed,
}

#[derive(Debug, Args)]
pub struct PoolArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "dl")]
    pub method: PoolMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScenarioArg {
    Null,
    Alt,
    Phacked,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML file with simulation settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scenario: Option<ScenarioArg>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub tests: Option<usize>,
    #[arg(long)]
    pub hacked_frac: Option<f64>,
    /// True log risk ratio for honest studies.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub se_lo: Option<f64>,
    #[arg(long)]
    pub se_hi: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub fp_rate: f64,
}
