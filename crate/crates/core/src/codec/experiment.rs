use std::borrow::Cow;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::info::{build_joint_uy, conditional_channel, Pmf, TransitionMatrix};
use crate::seed::{derive_seed, stream_rng, STREAM_CHANNEL, STREAM_CODEBOOK, STREAM_MESSAGE};

use super::codebook::{check_cells, generate_codebooks_capped, transmit, CodebookPair, DEFAULT_CELL_CAP};
use super::decode::{map_decode_with, typicality_decode_with, MapScorer, TypicalityTables};

/// Default ε for typicality decoding.
pub const DEFAULT_EPSILON: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    Typicality { epsilon: f64 },
    Map,
}

impl DecoderKind {
    pub fn label(&self) -> &'static str {
        match self {
            DecoderKind::Typicality { .. } => "typ",
            DecoderKind::Map => "map",
        }
    }

    pub fn epsilon(&self) -> Option<f64> {
        match *self {
            DecoderKind::Typicality { epsilon } => Some(epsilon),
            DecoderKind::Map => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodebookMode {
    /// New codebook pair every trial: estimates the codebook-averaged error.
    FreshPerTrial,
    /// One codebook pair for the whole run: per-message errors of one code.
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub block_length: usize,
    pub messages: usize,
    pub px: Pmf,
    pub pyx: TransitionMatrix,
    pub pux: TransitionMatrix,
    pub decoder: DecoderKind,
    pub trials: u64,
    pub codebook_mode: CodebookMode,
    pub master_seed: u64,
    /// `(p1, p2)` when the channels are binary symmetric; echoed in reports.
    pub binary_symmetric: Option<(f64, f64)>,
    pub cell_cap: usize,
}

impl SimConfig {
    /// Uniform binary input, `Y = X ⊕ Z1`, `U = X ⊕ Z2`, fresh codebooks.
    pub fn binary_symmetric(
        block_length: usize,
        messages: usize,
        p1: f64,
        p2: f64,
        decoder: DecoderKind,
        trials: u64,
        master_seed: u64,
    ) -> Result<Self> {
        Ok(Self {
            block_length,
            messages,
            px: Pmf::uniform(2)?,
            pyx: TransitionMatrix::bsc(p1)?,
            pux: TransitionMatrix::bsc(p2)?,
            decoder,
            trials,
            codebook_mode: CodebookMode::FreshPerTrial,
            master_seed,
            binary_symmetric: Some((p1, p2)),
            cell_cap: DEFAULT_CELL_CAP,
        })
    }

    pub fn with_mode(mut self, mode: CodebookMode) -> Self {
        self.codebook_mode = mode;
        self
    }

    /// `R = log2(M) / n`.
    pub fn rate(&self) -> f64 {
        (self.messages as f64).log2() / self.block_length as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.messages < 1 || self.block_length < 1 || self.trials < 1 {
            return Err(Error::Config(format!(
                "need M ≥ 1, n ≥ 1 and trials ≥ 1, got M = {}, n = {}, trials = {}",
                self.messages, self.block_length, self.trials
            )));
        }
        if let DecoderKind::Typicality { epsilon } = self.decoder {
            if !(epsilon > 0.0) {
                return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
            }
        }
        if self.pyx.input_size() != self.px.len() || self.pux.input_size() != self.px.len() {
            return Err(Error::DimensionMismatch(
                "p(x), p(y|x) and p(u|x) must share the input alphabet".into(),
            ));
        }
        check_cells(self.messages, self.block_length, self.cell_cap)?;
        Ok(())
    }

    /// Codebook used by every trial in [`CodebookMode::Fixed`].
    pub fn fixed_codebook(&self) -> Result<CodebookPair> {
        self.codebook_for_trial(0)
    }

    fn codebook_for_trial(&self, trial: u64) -> Result<CodebookPair> {
        generate_codebooks_capped(
            self.messages,
            self.block_length,
            &self.px,
            &self.pux,
            derive_seed(self.master_seed, trial, STREAM_CODEBOOK),
            self.cell_cap,
        )
    }
}

/// Errors and transmissions of one message.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MessageTally {
    pub errors: u64,
    pub sent: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub trials_run: u64,
    pub error_count: u64,
    pub pe_hat: f64,
    /// Indexed by message `w - 1`.
    pub per_message_errors: Vec<MessageTally>,
    pub lambda_max_hat: f64,
    pub ci95_halfwidth: f64,
    pub rate: f64,
    pub block_length: usize,
    pub messages: usize,
    pub decoder: DecoderKind,
    pub binary_symmetric: Option<(f64, f64)>,
    pub seed: u64,
    pub elapsed_seconds: f64,
}

/// The external JSON layout of a [`TrialReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReportJson {
    pub trials: u64,
    pub errors: u64,
    pub pe_hat: f64,
    pub ci95: f64,
    pub lambda_max_hat: f64,
    pub rate: f64,
    pub n: usize,
    #[serde(rename = "M")]
    pub messages: usize,
    pub decoder: String,
    pub epsilon: Option<f64>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub seed: u64,
    pub elapsed_seconds: Option<f64>,
}

impl TrialReport {
    /// JSON view; wall-clock time is included only when `with_timing`,
    /// otherwise `elapsed_seconds` is `null` so output files are
    /// reproducible byte for byte.
    pub fn to_json(&self, with_timing: bool) -> TrialReportJson {
        TrialReportJson {
            trials: self.trials_run,
            errors: self.error_count,
            pe_hat: self.pe_hat,
            ci95: self.ci95_halfwidth,
            lambda_max_hat: self.lambda_max_hat,
            rate: self.rate,
            n: self.block_length,
            messages: self.messages,
            decoder: self.decoder.label().to_string(),
            epsilon: self.decoder.epsilon(),
            p1: self.binary_symmetric.map(|(p1, _)| p1),
            p2: self.binary_symmetric.map(|(_, p2)| p2),
            seed: self.seed,
            elapsed_seconds: with_timing.then_some(self.elapsed_seconds),
        }
    }

    /// Monte Carlo standard error of `pe_hat`.
    pub fn sigma(&self) -> f64 {
        (self.pe_hat * (1.0 - self.pe_hat) / self.trials_run as f64).sqrt()
    }
}

enum Decoding {
    Typicality(TypicalityTables, f64),
    Map(MapScorer),
}

impl Decoding {
    fn new(cfg: &SimConfig) -> Result<Self> {
        let joint = build_joint_uy(&cfg.px, &cfg.pyx, &cfg.pux)?;
        Ok(match cfg.decoder {
            DecoderKind::Typicality { epsilon } => {
                Decoding::Typicality(TypicalityTables::new(&joint)?, epsilon)
            }
            DecoderKind::Map => Decoding::Map(MapScorer::new(&conditional_channel(&joint)?)),
        })
    }

    fn decode(&self, received: &[u8], pair: &CodebookPair) -> usize {
        match self {
            Decoding::Typicality(tables, epsilon) => {
                typicality_decode_with(received, pair, *epsilon, tables)
            }
            Decoding::Map(scorer) => map_decode_with(received, pair, scorer),
        }
    }
}

/// Runs every trial with the codebook chosen by `pair_for_trial` and
/// tallies sent/decoded message pairs.
fn simulate<'a, F>(cfg: &SimConfig, pair_for_trial: F) -> Result<TrialReport>
where
    F: Fn(u64) -> Result<Cow<'a, CodebookPair>> + Sync,
{
    let started = Instant::now();
    let decoding = Decoding::new(cfg)?;
    let outcomes: Vec<(usize, usize)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let pair = pair_for_trial(trial)?;
            let sent = stream_rng(cfg.master_seed, trial, STREAM_MESSAGE).gen_range(1..=cfg.messages);
            let received = transmit(
                pair.codeword(sent),
                &cfg.pyx,
                derive_seed(cfg.master_seed, trial, STREAM_CHANNEL),
            );
            Ok((sent, decoding.decode(&received, &pair)))
        })
        .collect::<Result<_>>()?;

    let mut tallies = vec![MessageTally::default(); cfg.messages];
    for (sent, decoded) in outcomes {
        let tally = &mut tallies[sent - 1];
        tally.sent += 1;
        // the null decision is an error like any other mismatch
        if decoded != sent {
            tally.errors += 1;
        }
    }
    let error_count: u64 = tallies.iter().map(|t| t.errors).sum();
    let pe_hat = error_count as f64 / cfg.trials as f64;
    let lambda_max_hat = tallies
        .iter()
        .filter(|t| t.sent > 0)
        .map(|t| t.errors as f64 / t.sent as f64)
        .fold(0.0, f64::max);
    Ok(TrialReport {
        trials_run: cfg.trials,
        error_count,
        pe_hat,
        per_message_errors: tallies,
        lambda_max_hat,
        ci95_halfwidth: 1.96 * (pe_hat * (1.0 - pe_hat) / cfg.trials as f64).sqrt(),
        rate: cfg.rate(),
        block_length: cfg.block_length,
        messages: cfg.messages,
        decoder: cfg.decoder,
        binary_symmetric: cfg.binary_symmetric,
        seed: cfg.master_seed,
        elapsed_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Monte Carlo estimate of the decoding error probability.
///
/// Trial `t` draws its codebook (fresh mode), message and channel noise from
/// seeds derived from `(master_seed, t)`, so the report does not depend on
/// how trials are scheduled across threads.
pub fn run_experiment(cfg: &SimConfig) -> Result<TrialReport> {
    cfg.validate()?;
    match cfg.codebook_mode {
        CodebookMode::Fixed => {
            let pair = cfg.fixed_codebook()?;
            simulate(cfg, |_| Ok(Cow::Borrowed(&pair)))
        }
        CodebookMode::FreshPerTrial => {
            simulate(cfg, |trial| cfg.codebook_for_trial(trial).map(Cow::Owned))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollisionReport {
    pub messages: usize,
    pub colliding: usize,
    pub block_length: usize,
    pub p1: f64,
    pub p2: f64,
    pub trials: u64,
    pub seed: u64,
    /// Largest empirical error among the colliding messages.
    pub lambda_max_hat: f64,
    /// `1 - 1/m`.
    pub bound: f64,
    /// Binomial standard error at the bound for the least-sent colliding message.
    pub sigma: f64,
    pub pass: bool,
    pub per_message_errors: Vec<MessageTally>,
}

/// Makes the decoder codebook non-injective by giving messages
/// `1..=colliding` the same decoder codeword, then measures MAP errors on
/// that fixed code. With `colliding = 1` this is exactly a fixed-codebook
/// [`run_experiment`].
pub fn collision_experiment(
    messages: usize,
    colliding: usize,
    block_length: usize,
    p1: f64,
    p2: f64,
    trials: u64,
    seed: u64,
) -> Result<CollisionReport> {
    if !(1..=messages).contains(&colliding) {
        return Err(Error::Config(format!(
            "colliding messages must be in 1..={messages}, got {colliding}"
        )));
    }
    let cfg = SimConfig::binary_symmetric(block_length, messages, p1, p2, DecoderKind::Map, trials, seed)?
        .with_mode(CodebookMode::Fixed);
    cfg.validate()?;
    let pair = cfg.fixed_codebook()?.with_shared_decoder_rows(colliding);
    let report = simulate(&cfg, |_| Ok(Cow::Borrowed(&pair)))?;

    let colliding_tallies = &report.per_message_errors[..colliding];
    let lambda_max_hat = colliding_tallies
        .iter()
        .filter(|t| t.sent > 0)
        .map(|t| t.errors as f64 / t.sent as f64)
        .fold(0.0, f64::max);
    let bound = 1.0 - 1.0 / colliding as f64;
    let min_sent = colliding_tallies.iter().map(|t| t.sent).min().unwrap_or(0);
    let sigma = if min_sent == 0 {
        f64::INFINITY
    } else {
        (bound * (1.0 - bound) / min_sent as f64).sqrt()
    };
    Ok(CollisionReport {
        messages,
        colliding,
        block_length,
        p1,
        p2,
        trials,
        seed,
        lambda_max_hat,
        bound,
        sigma,
        pass: lambda_max_hat >= bound - 3.0 * sigma,
        per_message_errors: report.per_message_errors,
    })
}
