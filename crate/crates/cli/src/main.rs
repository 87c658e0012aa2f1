mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ddro_core::algorithms::Algorithm;
use ddro_core::evaluation::PlanVariant;
use ddro_core::model::MomentVariant;

/// Expansion planning for hydrogen networks under decision-dependent demand ambiguity.
#[derive(Debug, Parser)]
#[command(name = "ddro", version, about)]
struct Cli {
    /// TOML file with a `[solver]` table (`engine`, `threads`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log at debug level.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a random or case-study instance.
    Generate(GenerateArgs),
    /// Solve an instance with one of the decomposition algorithms.
    Solve(SolveArgs),
    /// Score a fixed plan on sampled demand.
    Evaluate(EvaluateArgs),
    /// Plan with the four model variants and score them out of sample.
    Compare(CompareArgs),
    /// Run all algorithms over a grid of random instances.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 4)]
    pub supply: usize,
    #[arg(long, default_value_t = 8)]
    pub demand: usize,
    #[arg(long, default_value_t = 1)]
    pub ports: usize,
    #[arg(long, default_value_t = 3)]
    pub periods: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sum of the impact coefficients per demand node.
    #[arg(long)]
    pub target_sum: Option<f64>,
    /// Replace the support by this many box vertices.
    #[arg(long)]
    pub discrete: Option<usize>,
    /// Emit the Northern Netherlands case instead of a random one.
    #[arg(long)]
    pub case_study: bool,
    /// Case-study data file; the shipped one by default.
    #[arg(long)]
    pub case_data: Option<PathBuf>,
    /// Import cost over production cost in 2050 for the case study.
    #[arg(long)]
    pub import_premium: Option<f64>,
    /// Keep only these case-study years, e.g. `2030,2040,2050`.
    #[arg(long, value_delimiter = ',')]
    pub years: Option<Vec<u32>>,
    /// Years of operation each case-study period stands for.
    #[arg(long)]
    pub operating_years: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
pub struct AlgorithmArgs {
    #[arg(long, default_value = "ccg+")]
    pub algorithm: Algorithm,
    #[arg(long, default_value = "location")]
    pub moment: MomentVariant,
    /// Relative stopping gap.
    #[arg(long, default_value_t = 0.001)]
    pub gap: f64,
    /// Seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
    #[arg(long)]
    pub threads: Option<u32>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub algo: AlgorithmArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Stream one JSON record per iteration to this file.
    #[arg(long)]
    pub log_file: Option<PathBuf>,
    /// Write every master and subproblem model in LP format here.
    #[arg(long)]
    pub dump_lp: Option<PathBuf>,
    /// Write bounds and capacity series as CSV files into this directory.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// A solve output or a bare plan document.
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub scenarios: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub cv: f64,
    #[arg(long, default_value = "location")]
    pub moment: MomentVariant,
    /// CSV with one row of statistics.
    #[arg(long)]
    pub out: PathBuf,
    /// JSON with the statistics and per-scenario values.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// CSV of per-scenario values.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "DRO+DDU,DRO,DET+DDU,DET")]
    pub variants: Vec<PlanVariant>,
    #[arg(long, default_value_t = 1000)]
    pub scenarios: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub cv: f64,
    /// Score every plan on scenarios around the DRO+DDU plan's mean.
    #[arg(long)]
    pub common_mean: bool,
    #[command(flatten)]
    pub algo: AlgorithmArgs,
    /// CSV with one row per variant.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// CSV of per-scenario values, one column per variant.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Cells as `S/D,...:T,...`, e.g. `2/4,4/8:2,3`.
    #[arg(long)]
    pub grid: String,
    #[arg(long, default_value_t = 3)]
    pub seeds: u64,
    #[arg(long, value_delimiter = ',', default_value = "benders,ccg,ccg+")]
    pub algorithms: Vec<Algorithm>,
    #[arg(long, default_value_t = 0.001)]
    pub gap: f64,
    /// Seconds per algorithm run.
    #[arg(long, default_value_t = 300.0)]
    pub time_limit: f64,
    /// Cells solved at once.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "debug" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = commands::Context::new(cli.config.as_deref()).and_then(|ctx| match cli.command {
        Command::Generate(a) => ctx.generate(&a),
        Command::Solve(a) => ctx.solve(&a),
        Command::Evaluate(a) => ctx.evaluate(&a),
        Command::Compare(a) => ctx.compare(&a),
        Command::Benchmark(a) => ctx.benchmark(&a),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code)
        }
    }
}
