use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fxscale_core::events::DEFAULT_TICK_THRESHOLD;
use fxscale_core::pipeline::DEFAULT_FIT_FROM;
use fxscale_core::{PriceDefinition, SpreadModel};

mod commands;
mod manifest;

#[derive(Parser, Debug)]
#[command(name = "fxscale", version, about = "Directional-change scaling laws for tick data")]
struct Cli {
    /// Worker threads for threshold sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate and clean a tick CSV; the ingestion report goes to stderr or --report.
    Ingest(IngestArgs),
    /// Compute law samples, fits, cross-checks and coastline for one or more series.
    Analyze(AnalyzeArgs),
    /// Fit a law sample dump.
    Fit(FitArgs),
    /// Render one appendix table from fit rows.
    Table(TableArgs),
    /// Generate a Gaussian random walk tick CSV.
    GrwGen(GrwGenArgs),
    /// Cross-check fitted laws against each other.
    Crosscheck(CrosscheckArgs),
    /// Coastline lengths at chosen thresholds.
    Coastline(CoastlineArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum AnnualizeArg {
    /// Per reference year for market data, per sample for generated series.
    Auto,
    Year,
    Sample,
}

#[derive(Args, Debug, Clone)]
pub struct SourceArgs {
    /// Tick CSV with header `timestamp,bid,ask`; repeat for several instruments.
    #[arg(long)]
    pub input: Vec<PathBuf>,
    /// Instrument name per --input, in order (default: file stem).
    #[arg(long)]
    pub instrument: Vec<String>,
    /// Add a generated Gaussian random walk.
    #[arg(long)]
    pub grw: bool,
    #[arg(long, default_value_t = fxscale_core::grw::GrwConfig::default().seed)]
    pub seed: u64,
    #[arg(long, default_value_t = fxscale_core::grw::GrwConfig::default().n_ticks)]
    pub n_ticks: usize,
    #[arg(long, default_value = "mid")]
    pub price_def: PriceDefinition,
    /// Repair backwards timestamps instead of rejecting the file.
    #[arg(long)]
    pub clamp_time: bool,
}

#[derive(Args, Debug, Clone)]
pub struct LawArgs {
    #[arg(long, default_value_t = DEFAULT_TICK_THRESHOLD)]
    pub tick_threshold: f64,
    /// `none`, `const:<fraction>` or `observed`.
    #[arg(long, default_value = "none")]
    pub spread: SpreadModel,
    #[arg(long, value_enum, default_value_t = AnnualizeArg::Auto)]
    pub annualize: AnnualizeArg,
    /// Lower threshold of the cost-adjusted fit.
    #[arg(long, default_value_t = DEFAULT_FIT_FROM)]
    pub fit_from: f64,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub instrument: Option<String>,
    #[arg(long, default_value = "mid")]
    pub price_def: PriceDefinition,
    #[arg(long)]
    pub clamp_time: bool,
    /// Write the cleaned ticks here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the ingestion report here instead of stderr.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub laws: LawArgs,
    /// `all`, `coastline`, or a comma list of law names / table ids.
    #[arg(long = "laws", default_value = "all")]
    pub law_selection: String,
    /// Comma list of coastline thresholds (fractions).
    #[arg(long, value_delimiter = ',', default_values_t = fxscale_core::pipeline::DEFAULT_COASTLINE_THRESHOLDS)]
    pub coastline: Vec<f64>,
    /// Also dump every event record at these thresholds.
    #[arg(long, value_delimiter = ',')]
    pub dump_events: Vec<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Law sample dump `law,abscissa,value,count`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub instrument: String,
    #[arg(long = "laws", default_value = "all")]
    pub law_selection: String,
    #[arg(long, default_value_t = DEFAULT_FIT_FROM)]
    pub fit_from: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    /// Fit row CSV files (`fits.csv`); repeat to merge instruments.
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    /// Table id (`A1`..`A22`) or law name.
    #[arg(long)]
    pub table: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GrwGenArgs {
    #[arg(long, default_value_t = fxscale_core::grw::GrwConfig::default().seed)]
    pub seed: u64,
    #[arg(long, default_value_t = fxscale_core::grw::GrwConfig::default().n_ticks)]
    pub n_ticks: usize,
    /// Relative bid-ask spread of the generated quotes.
    #[arg(long, default_value_t = 0.0)]
    pub quote_spread: f64,
    /// Output CSV (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CrosscheckArgs {
    /// Fit row CSV file.
    #[arg(long)]
    pub input: PathBuf,
    /// Restrict to one instrument when the file holds several.
    #[arg(long)]
    pub instrument: Option<String>,
    /// Length of the counting period behind the count laws (default: one reference year).
    #[arg(long, default_value_t = fxscale_core::SECONDS_PER_YEAR)]
    pub period_seconds: f64,
    #[arg(long, default_value_t = DEFAULT_TICK_THRESHOLD)]
    pub tick_threshold: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CoastlineArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub laws: LawArgs,
    #[arg(long, value_delimiter = ',', default_values_t = fxscale_core::pipeline::DEFAULT_COASTLINE_THRESHOLDS)]
    pub thresholds: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Whether every stage of a command succeeded.
pub enum Outcome {
    Complete,
    Partial,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(err) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {err}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Ingest(args) => commands::ingest(args),
        Command::Analyze(args) => commands::analyze(args),
        Command::Fit(args) => commands::fit(args),
        Command::Table(args) => commands::table(args),
        Command::GrwGen(args) => commands::grw_gen(args),
        Command::Crosscheck(args) => commands::crosscheck(args),
        Command::Coastline(args) => commands::coastline(args),
    };
    match result {
        Ok(Outcome::Complete) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) => {
            eprintln!("warning: some stages failed; outputs are partial");
            ExitCode::from(3)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
