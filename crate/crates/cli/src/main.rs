//! `asgc`: synthetic denoising sweeps, feature filtering, node-classification
//! trials, K-sweeps, proportional-accuracy aggregation and homophily.

mod commands;
mod error;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use asgc_core::{DEFAULT_K_HOPS, DEFAULT_RESOLUTION, DEFAULT_TRIALS};

#[derive(Debug, Parser)]
#[command(
    name = "asgc",
    version,
    about = "Graph feature filters and node-classification experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Denoising sweep on two-block stochastic block models.
    Synth(SynthArgs),
    /// Write SGC- and ASGC-filtered features of a dataset.
    Filter(FilterArgs),
    /// Per-trial test accuracy of each method on random splits.
    Classify(ClassifyArgs),
    /// Test accuracy as a function of the number of hops.
    Sweep(SweepArgs),
    /// Proportional-accuracy summary of trial CSVs.
    Aggregate(AggregateArgs),
    /// Print the homophily statistic of a dataset.
    Homophily(DatasetArgs),
}

#[derive(Debug, Args)]
struct DatasetArgs {
    /// Dataset manifest (TOML, one table per dataset).
    #[arg(long, default_value = "datasets.toml")]
    manifest: PathBuf,
    /// Dataset name as listed in the manifest.
    #[arg(long)]
    dataset: String,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Number of hops for both filters.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Graphs sampled per log-ratio.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    log_ratio_min: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    log_ratio_max: f64,
    #[arg(long, default_value_t = 21)]
    log_ratio_steps: usize,
    /// Nodes per community.
    #[arg(long, default_value_t = 500)]
    n_per_block: usize,
    /// Expected node degree.
    #[arg(long, default_value_t = 10.0)]
    degree: f64,
    /// Output directory; the CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one SVG chart per metric (requires --out).
    #[arg(long, requires = "out")]
    svg: bool,
}

#[derive(Debug, Args)]
struct FilterArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long, default_value_t = DEFAULT_K_HOPS)]
    k: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Comma-separated methods (raw, sgc, sgc1, asgc, combo) or "all".
    #[arg(long, default_value = "all", value_delimiter = ',')]
    method: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_K_HOPS)]
    k: usize,
    /// Simplex lattice resolution of the combination search.
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: u32,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    /// Base split seed; trial t uses seed + t.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; the CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long, default_value = "all", value_delimiter = ',')]
    method: Vec<String>,
    #[arg(long, default_value_t = 1)]
    k_min: usize,
    #[arg(long, default_value_t = 10)]
    k_max: usize,
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    resolution: u32,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an accuracy-versus-K chart (requires --out).
    #[arg(long, requires = "out")]
    svg: bool,
}

#[derive(Debug, Args)]
struct AggregateArgs {
    /// Trial CSVs written by `classify` or `sweep`.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Published accuracies, CSV with columns method,dataset,accuracy.
    #[arg(long)]
    reported: Option<PathBuf>,
    /// Keep only trials with this number of hops.
    #[arg(long)]
    k: Option<usize>,
    /// Output directory; the per-method table goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { error::EXIT_USAGE } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Filter(a) => commands::filter(a),
        Command::Classify(a) => commands::classify(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Aggregate(a) => commands::aggregate(a),
        Command::Homophily(a) => commands::homophily(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
