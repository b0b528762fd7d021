//! Command runners. Each takes fully resolved parameters and returns the
//! bytes to emit, so the binary and the tests share one code path.

use std::path::PathBuf;

use asymcap_core::capacity::{closed_form_gap_bsc, composite_crossover, write_surface_csv};
use asymcap_core::codec::{DEFAULT_EPSILON, DEFAULT_CELL_CAP};
use asymcap_core::numfmt::sig10;
use asymcap_core::{
    capacity_closed_form_bsc, capacity_grid, capacity_optimize, collision_experiment, run_experiment,
    sweep_capacity_surface, CapacityResult, CodebookMode, DecoderKind, SimConfig, SolverOptions,
    TransitionMatrix,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::verify::{lattice, run_verification, VerifyParams};

/// Largest input alphabet for which `capacity-general` also runs the
/// lattice search.
pub const GRID_CROSSCHECK_INPUTS: usize = 3;
pub const DEFAULT_SWEEP_BUDGET: u64 = 1 << 31;

/// One output file. `sidecar` holds the effective configuration for
/// formats that cannot carry it inline.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub body: String,
    pub sidecar: Option<String>,
    /// False when a check inside the command failed.
    pub passed: bool,
}

impl Output {
    fn json(value: &serde_json::Value, passed: bool) -> Self {
        Self { body: pretty(value), sidecar: None, passed }
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

fn check_probability(name: &str, p: f64) -> CliResult<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be in [0, 1], got {p}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityParams {
    pub p1: f64,
    pub p2: f64,
}

pub fn capacity(params: &CapacityParams) -> CliResult<Output> {
    check_probability("p1", params.p1)?;
    check_probability("p2", params.p2)?;
    let result = capacity_closed_form_bsc(params.p1, params.p2)?;
    let gap = closed_form_gap_bsc(params.p1, params.p2)?;
    Ok(Output::json(
        &json!({
            "config": params,
            "capacity": result.capacity,
            "gap": gap,
            "composite_crossover": composite_crossover(params.p1, params.p2),
            "argmax_px": result.argmax_px.probs(),
            "solver": result.solver,
        }),
        true,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityGeneralParams {
    pub channel: PathBuf,
    pub perturb: PathBuf,
    #[serde(default = "defaults::restarts")]
    pub restarts: usize,
    #[serde(default = "defaults::tol")]
    pub tol: f64,
    #[serde(default = "defaults::grid_res")]
    pub grid_res: f64,
    #[serde(default = "defaults::max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub seed: u64,
}

mod defaults {
    use asymcap_core::SolverOptions;

    pub fn restarts() -> usize {
        SolverOptions::default().restarts
    }
    pub fn tol() -> f64 {
        SolverOptions::default().convergence_tol
    }
    pub fn grid_res() -> f64 {
        SolverOptions::default().grid_resolution
    }
    pub fn max_iter() -> usize {
        SolverOptions::default().max_iterations
    }
}

fn read_matrix(path: &PathBuf, what: &str) -> CliResult<TransitionMatrix> {
    TransitionMatrix::read(path).map_err(|source| CliError::Context {
        context: format!("{what} {}", path.display()),
        source,
    })
}

pub fn capacity_general(params: &CapacityGeneralParams) -> CliResult<Output> {
    let pyx = read_matrix(&params.channel, "channel")?;
    let pux = read_matrix(&params.perturb, "perturbation")?;
    if pyx.input_size() != pux.input_size() {
        return Err(usage(format!(
            "channel has {} inputs but perturbation has {}",
            pyx.input_size(),
            pux.input_size()
        )));
    }
    let opts = SolverOptions {
        grid_resolution: params.grid_res,
        restarts: params.restarts,
        max_iterations: params.max_iter,
        convergence_tol: params.tol,
        seed: params.seed,
        ..SolverOptions::default()
    };
    let optimized = capacity_optimize(&pyx, &pux, &opts)?;
    let grid: Option<CapacityResult> = if pyx.input_size() <= GRID_CROSSCHECK_INPUTS {
        Some(capacity_grid(&pyx, &pux, params.grid_res)?)
    } else {
        None
    };
    let difference = grid.as_ref().map(|g| optimized.capacity - g.capacity);
    Ok(Output::json(
        &json!({
            "config": params,
            "optimize": optimized,
            "grid": grid,
            "difference": difference,
        }),
        true,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DecoderArg {
    Map,
    Typ,
}

fn decoder_kind(decoder: DecoderArg, epsilon: f64) -> CliResult<DecoderKind> {
    match decoder {
        DecoderArg::Map => Ok(DecoderKind::Map),
        DecoderArg::Typ if epsilon > 0.0 => Ok(DecoderKind::Typicality { epsilon }),
        DecoderArg::Typ => Err(usage(format!("--epsilon must be positive, got {epsilon}"))),
    }
}

#[allow(clippy::too_many_arguments)]
fn sim_config(
    n: usize,
    messages: usize,
    p1: f64,
    p2: f64,
    decoder: DecoderKind,
    trials: u64,
    seed: u64,
    fixed_codebook: bool,
) -> CliResult<SimConfig> {
    check_probability("p1", p1)?;
    check_probability("p2", p2)?;
    let mode = if fixed_codebook { CodebookMode::Fixed } else { CodebookMode::FreshPerTrial };
    let cfg = SimConfig::binary_symmetric(n, messages, p1, p2, decoder, trials, seed)?.with_mode(mode);
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateParams {
    pub n: usize,
    pub messages: usize,
    pub p1: f64,
    pub p2: f64,
    #[serde(default = "default_decoder")]
    pub decoder: DecoderArg,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub fixed_codebook: bool,
    #[serde(default)]
    pub record_time: bool,
}

fn default_decoder() -> DecoderArg {
    DecoderArg::Map
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

/// The report body has a fixed field set; the configuration goes to the
/// sidecar.
pub fn simulate(params: &SimulateParams) -> CliResult<Output> {
    let cfg = sim_config(
        params.n,
        params.messages,
        params.p1,
        params.p2,
        decoder_kind(params.decoder, params.epsilon)?,
        params.trials,
        params.seed,
        params.fixed_codebook,
    )?;
    let report = run_experiment(&cfg)?;
    Ok(Output {
        body: pretty(&report.to_json(params.record_time)),
        sidecar: Some(pretty(&json!({ "simulate": params }))),
        passed: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Capacity,
    Simulation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepParams {
    pub mode: SweepMode,
    pub grid_step: f64,
    pub grid_max: f64,
    pub n: Vec<usize>,
    pub messages: Vec<usize>,
    pub p1: f64,
    pub p2: f64,
    pub decoder: DecoderArg,
    pub epsilon: f64,
    pub trials: u64,
    pub seed: u64,
    pub fixed_codebook: bool,
    /// Upper bound on `M · n · trials` for any single row.
    pub budget: u64,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            mode: SweepMode::Capacity,
            grid_step: 0.01,
            grid_max: 0.5,
            n: vec![16, 32, 64, 128],
            messages: vec![16],
            p1: 0.05,
            p2: 0.05,
            decoder: DecoderArg::Map,
            epsilon: DEFAULT_EPSILON,
            trials: 10_000,
            seed: 0,
            fixed_codebook: false,
            budget: DEFAULT_SWEEP_BUDGET,
        }
    }
}

pub const SIMULATION_HEADER: &str = "n,M,rate,decoder,epsilon,trials,errors,pe_hat,ci95,lambda_max_hat";

pub fn sweep(params: &SweepParams) -> CliResult<Output> {
    let body = match params.mode {
        SweepMode::Capacity => sweep_capacity(params)?,
        SweepMode::Simulation => sweep_simulation(params)?,
    };
    Ok(Output {
        body,
        sidecar: Some(pretty(&json!({ "sweep": params }))),
        passed: true,
    })
}

fn sweep_capacity(params: &SweepParams) -> CliResult<String> {
    if !(params.grid_step > 0.0) || !(0.0..=0.5).contains(&params.grid_max) {
        return Err(usage(format!(
            "capacity sweep needs --grid-step > 0 and --grid-max in [0, 0.5], got {} and {}",
            params.grid_step, params.grid_max
        )));
    }
    let grid = lattice(params.grid_step, params.grid_max);
    let rows = sweep_capacity_surface(&grid, &grid)?;
    let mut out = Vec::new();
    write_surface_csv(&rows, &mut out).expect("writing to memory");
    Ok(String::from_utf8(out).expect("ascii csv"))
}

fn sweep_simulation(params: &SweepParams) -> CliResult<String> {
    if params.n.is_empty() || params.messages.is_empty() {
        return Err(usage("simulation sweep needs at least one --n and one --messages value"));
    }
    let decoder = decoder_kind(params.decoder, params.epsilon)?;
    let mut configs = Vec::new();
    for &n in &params.n {
        for &m in &params.messages {
            let work = (m as u64).checked_mul(n as u64).and_then(|c| c.checked_mul(params.trials));
            if work.is_none_or(|w| w > params.budget) {
                return Err(usage(format!(
                    "row n = {n}, M = {m}, trials = {} exceeds the budget of {} symbol draws",
                    params.trials, params.budget
                )));
            }
            if (m as u128) * (n as u128) > DEFAULT_CELL_CAP as u128 {
                return Err(usage(format!("row n = {n}, M = {m} exceeds the codebook cell cap")));
            }
            configs.push(sim_config(
                n,
                m,
                params.p1,
                params.p2,
                decoder,
                params.trials,
                params.seed,
                params.fixed_codebook,
            )?);
        }
    }
    let mut out = format!("{SIMULATION_HEADER}\n");
    for cfg in &configs {
        let r = run_experiment(cfg)?;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.block_length,
            r.messages,
            sig10(r.rate),
            r.decoder.label(),
            r.decoder.epsilon().map(sig10).unwrap_or_default(),
            r.trials_run,
            r.error_count,
            sig10(r.pe_hat),
            sig10(r.ci95_halfwidth),
            sig10(r.lambda_max_hat),
        ));
    }
    Ok(out)
}

pub fn verify(params: &VerifyParams) -> CliResult<Output> {
    let report = run_verification(params);
    Ok(Output::json(
        &json!({
            "config": params,
            "checks": report.checks,
            "pass": report.pass,
        }),
        report.pass,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollisionParams {
    pub messages: usize,
    pub collide: usize,
    pub n: usize,
    pub p1: f64,
    pub p2: f64,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
}

pub fn collision(params: &CollisionParams) -> CliResult<Output> {
    if !(2..=params.messages).contains(&params.collide) {
        return Err(usage(format!(
            "--collide must be in 2..={}, got {}",
            params.messages, params.collide
        )));
    }
    check_probability("p1", params.p1)?;
    check_probability("p2", params.p2)?;
    let r = collision_experiment(
        params.messages,
        params.collide,
        params.n,
        params.p1,
        params.p2,
        params.trials,
        params.seed,
    )?;
    Ok(Output::json(
        &json!({
            "config": params,
            "lambda_max_hat": r.lambda_max_hat,
            "bound": r.bound,
            "sigma": r.sigma,
            "slack": 3.0 * r.sigma,
            "pass": r.pass,
            "per_message_errors": r.per_message_errors,
        }),
        r.pass,
    ))
}
