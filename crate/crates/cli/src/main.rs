use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser)]
#[command(
    name = "innet",
    version,
    about = "Distributed in-network intrusion prevention toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a decomposed ensemble and write its bundle.
    Train(TrainArgs),
    /// Write a labelled dataset CSV.
    GenDataset(GenDatasetArgs),
    /// Score a dataset with a bundle and write one prediction per row.
    Predict(PredictArgs),
    /// Place learners on switches and route every commodity through them.
    Optimize(OptimizeArgs),
    /// Run a simulation manifest (single run or attack-rate sweep).
    Simulate(SimulateArgs),
    /// Write the packet trace a traffic spec generates.
    Trace(TraceArgs),
}

#[derive(Args)]
pub struct DataSource {
    /// Labelled dataset CSV (`f0..f{F-1},label`).
    #[arg(long, conflicts_with_all = ["synthetic", "flows"])]
    pub dataset: Option<PathBuf>,
    /// Gaussian-mixture dataset.
    #[arg(long)]
    pub synthetic: bool,
    /// Flow windows drawn from the simulator's traffic model.
    #[arg(long, conflicts_with = "synthetic")]
    pub flows: bool,
    /// Separation preset of the synthetic data: easy or hard.
    #[arg(long, default_value = "easy")]
    pub separation: String,
    /// Synthetic rows, or flows per class with --flows.
    #[arg(long)]
    pub rows: Option<usize>,
}

#[derive(Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataSource,
    /// Number of weak learners.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 7)]
    pub depth: usize,
    /// Share of features each learner sees.
    #[arg(long, default_value_t = 0.33)]
    pub ratio: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Held-out share for the printed report.
    #[arg(long, default_value_t = 0.3)]
    pub holdout: f64,
    /// Also train and report a single tree over all features.
    #[arg(long)]
    pub monolithic: bool,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct GenDatasetArgs {
    #[command(flatten)]
    pub data: DataSource,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub dataset: PathBuf,
    /// CSV with header `row,prediction`.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub topology: PathBuf,
    /// JSON list of `{src, dst, demand}`; defaults to the topology's commodities.
    #[arg(long)]
    pub commodities: Option<PathBuf>,
    /// Also route every endpoint pair of this traffic spec.
    #[arg(long)]
    pub traffic: Option<PathBuf>,
    /// Number of learners (colours); forced to 1 in SL mode.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub replicas: usize,
    /// wl or sl.
    #[arg(long, default_value = "wl")]
    pub mode: String,
    /// At most one learner per switch.
    #[arg(long)]
    pub exclusive: bool,
    /// Registered solver name (brkga, exact).
    #[arg(long, default_value = "brkga")]
    pub solver: String,
    /// Shorthand for --solver exact.
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = 100)]
    pub population: usize,
    #[arg(long, default_value_t = 0.2)]
    pub elite: f64,
    #[arg(long, default_value_t = 0.15)]
    pub mutants: f64,
    #[arg(long, default_value_t = 0.7)]
    pub rho: f64,
    #[arg(long, default_value_t = 200)]
    pub generations: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct SimulateArgs {
    pub manifest: PathBuf,
    /// Attack rates `start:end:step`; overrides the manifest's list.
    #[arg(long)]
    pub sweep_attack: Option<String>,
    /// Single run of one deployment instead of a sweep.
    #[arg(long)]
    pub mode: Option<String>,
    /// Metrics CSV; defaults to `<output_dir>/metrics.csv`.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Per-event audit CSV (single runs only).
    #[arg(long)]
    pub event_log: Option<PathBuf>,
}

#[derive(Args)]
pub struct TraceArgs {
    #[arg(long)]
    pub topology: PathBuf,
    #[arg(long)]
    pub traffic: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Override the attack rate of every attacker.
    #[arg(long)]
    pub attack_rate: Option<f64>,
    #[arg(short, long)]
    pub output: PathBuf,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<innet::Error>() {
        Some(innet::Error::Infeasible(_)) => 3,
        Some(innet::Error::Invariant(_)) => 4,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => commands::train(&a),
        Command::GenDataset(a) => commands::gen_dataset(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Optimize(a) => commands::optimize(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Trace(a) => commands::trace(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
