//! `aro`: uncertainty-set synthesis, robust solves and Wasserstein
//! quantification from the command line.

mod bench;
mod commands;
mod error;
mod io;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "aro",
    version,
    about = "Data-driven adjustable robust optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Largest scaled uncertainty set that keeps the program feasible.
    Synthesize(SynthesizeArgs),
    /// Solve the robust counterpart over a scaled set.
    Solve(SolveArgs),
    /// Wasserstein worst-case or best-case probability of a safe set.
    Quantify(QuantifyArgs),
    /// Distributionally robust set synthesis.
    Dro(DroArgs),
    /// Run a built-in benchmark end to end.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
pub struct SynthesizeArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub set: PathBuf,
    #[arg(long)]
    pub samples: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub alpha_tol: f64,
    #[arg(long, value_enum, default_value_t = AnchorArg::CoordinateSearch)]
    pub anchor_search: AnchorArg,
    #[arg(long, default_value_t = 9)]
    pub grid_steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub problem: PathBuf,
    /// Scaled set, or a synthesize/dro result containing one.
    #[arg(long)]
    pub scaled_set: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct QuantifyArgs {
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long)]
    pub support: PathBuf,
    #[arg(long)]
    pub safe: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value = "2")]
    pub norm: String,
    #[arg(long, value_enum)]
    pub mode: ModeArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DroArgs {
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long)]
    pub set: PathBuf,
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Best)]
    pub objective: ModeArg,
    #[arg(long, default_value = "2")]
    pub norm: String,
    #[arg(long, default_value_t = 101)]
    pub alpha_grid: usize,
    #[arg(long, value_enum, default_value_t = AnchorArg::CoordinateSearch)]
    pub anchor_search: AnchorArg,
    #[arg(long, default_value_t = 9)]
    pub grid_steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long)]
    pub id: String,
    #[arg(long, value_enum, default_value_t = StageArg::One)]
    pub stage: StageArg,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value = "2")]
    pub norm: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Best)]
    pub objective: ModeArg,
    /// Constants of the frequency constraints (default: distributional for
    /// `--stage dro`, deterministic otherwise).
    #[arg(long, value_enum)]
    pub opf_variant: Option<VariantArg>,
    /// Network case file replacing the bundled one.
    #[arg(long)]
    pub case: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnchorArg {
    FixedCenter,
    CoordinateSearch,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Worst,
    Best,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    Dro,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariantArg {
    Deterministic,
    Distributional,
}

fn init_logging() {
    let level = std::env::var("ARO_LOG").unwrap_or_else(|_| "error".into());
    env_logger::Builder::new()
        .parse_filters(&level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Synthesize(a) => commands::synthesize(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::Quantify(a) => commands::quantify(&a),
        Command::Dro(a) => commands::dro(&a),
        Command::Bench(a) => bench::run(&a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code())
}
