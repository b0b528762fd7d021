use std::path::PathBuf;
use std::process::ExitCode;

use asymcap_cli::commands::{self, DecoderArg, SweepMode};
use asymcap_cli::config::{load_config, resolve};
use asymcap_cli::{configure_threads, emit, CliResult, Output, EXIT_CHECK_FAILED};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "asymcap", version, about = "Capacity and Monte Carlo experiments for asymmetric codebooks")]
struct Cli {
    /// JSON file with default parameters; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form capacity of the binary symmetric model.
    Capacity(CapacityArgs),
    /// Numerical capacity for channel and perturbation matrices read from files.
    CapacityGeneral(CapacityGeneralArgs),
    /// Monte Carlo error rate of one code configuration.
    Simulate(SimulateArgs),
    /// Capacity surface or simulation lattice as CSV.
    Sweep(SweepArgs),
    /// Information-identity and sampling checks.
    Verify(VerifyArgs),
    /// Maximal error when several messages share a decoder codeword.
    Collision(CollisionArgs),
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Args, Serialize)]
struct CapacityArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p1: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p2: Option<f64>,
}

#[derive(Args, Serialize)]
struct CapacityGeneralArgs {
    /// Channel matrix p(y|x), one row per input.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    channel: Option<PathBuf>,
    /// Perturbation matrix p(u|x), one row per input.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    perturb: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    restarts: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_res: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_iter: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    messages: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p1: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p2: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    decoder: Option<DecoderArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    /// Reuse one codebook pair for every trial.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    fixed_codebook: bool,
    /// Fill `elapsed_seconds`; the report is then no longer reproducible.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    record_time: bool,
}

#[derive(Args, Serialize)]
struct SweepArgs {
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    mode: Option<SweepMode>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_step: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_max: Option<f64>,
    /// Block lengths, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<Vec<usize>>,
    /// Message counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    messages: Option<Vec<usize>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p1: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p2: Option<f64>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    decoder: Option<DecoderArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    fixed_codebook: bool,
    /// Largest M·n·trials allowed for one row.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    budget: Option<u64>,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_step: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_threshold: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tv_threshold: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    z_threshold: Option<f64>,
    /// Negative control: perturb one cell of the joint before checking.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    corrupt_joint: bool,
}

#[derive(Args, Serialize)]
struct CollisionArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    messages: Option<usize>,
    /// Number of messages sharing one decoder codeword.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    collide: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p1: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p2: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

fn run(cli: Cli) -> CliResult<Output> {
    configure_threads(std::env::var("ASYMCAP_THREADS").ok().as_deref())?;
    let config = cli.config.as_deref().map(load_config).transpose()?;
    let config = config.as_ref();
    match &cli.command {
        Command::Capacity(a) => commands::capacity(&resolve("capacity", a, config)?),
        Command::CapacityGeneral(a) => commands::capacity_general(&resolve("capacity-general", a, config)?),
        Command::Simulate(a) => commands::simulate(&resolve("simulate", a, config)?),
        Command::Sweep(a) => commands::sweep(&resolve("sweep", a, config)?),
        Command::Verify(a) => commands::verify(&resolve("verify", a, config)?),
        Command::Collision(a) => commands::collision(&resolve("collision", a, config)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    let result = run(cli).and_then(|output| {
        emit(&output, out.as_deref())?;
        Ok(output.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("asymcap: one or more checks failed");
            ExitCode::from(EXIT_CHECK_FAILED as u8)
        }
        Err(e) => {
            eprintln!("asymcap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
