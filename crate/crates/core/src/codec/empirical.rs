//! Sampling checks that the simulated source behaves like the single-letter
//! model: block pairs `(u^n, y^n)` factor into `∏ p(u_i, y_i)`, and decoder
//! codebook cells are i.i.d. with law `p(u) = Σ_x p(x) p(u|x)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::info::{build_joint_uy, Pmf, TransitionMatrix};
use crate::seed::{derive_seed, stream_rng, STREAM_VERIFY};

use super::codebook::CodebookPair;

const CHUNK: u64 = 1 << 16;
/// Largest number of histogram cells the block factorization check builds.
const MAX_CELLS: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorizationCheck {
    pub block_length: usize,
    pub samples: u64,
    pub cells: usize,
    /// Total-variation distance between the empirical block histogram and
    /// the product of single-letter joints.
    pub tv_distance: f64,
}

/// Samples `(x_i, y_i, u_i)` through the model for `i = 1..block_length`
/// and compares the histogram of `(u^n, y^n)` with `∏ p(u_i, y_i)`.
pub fn block_factorization(
    px: &Pmf,
    pyx: &TransitionMatrix,
    pux: &TransitionMatrix,
    block_length: usize,
    samples: u64,
    seed: u64,
) -> Result<FactorizationCheck> {
    let joint = build_joint_uy(px, pyx, pux)?;
    let letter_cells = joint.table().len();
    let cells = (0..block_length).try_fold(1usize, |acc, _| {
        acc.checked_mul(letter_cells).filter(|&c| c <= MAX_CELLS)
    });
    let Some(cells) = cells.filter(|_| block_length >= 1) else {
        return Err(Error::Config(format!(
            "block factorization histogram for n = {block_length} is too large"
        )));
    };
    if samples == 0 {
        return Err(Error::Config("need at least one sample".into()));
    }
    let ny = pyx.output_size();
    let chunks = samples.div_ceil(CHUNK);
    let histogram = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = stream_rng(seed, chunk, STREAM_VERIFY);
            let mut counts = vec![0u64; cells];
            let count = CHUNK.min(samples - chunk * CHUNK);
            for _ in 0..count {
                let mut cell = 0;
                for _ in 0..block_length {
                    let x = px.sample(&mut rng);
                    let y = pyx.row(x).sample(&mut rng);
                    let u = pux.row(x).sample(&mut rng);
                    cell = cell * letter_cells + u * ny + y;
                }
                counts[cell] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; cells],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let letter = joint.table();
    let mut tv = 0.0;
    for (cell, &count) in histogram.iter().enumerate() {
        let mut rest = cell;
        let mut product = 1.0;
        for _ in 0..block_length {
            product *= letter[rest % letter_cells];
            rest /= letter_cells;
        }
        tv += (count as f64 / samples as f64 - product).abs();
    }
    Ok(FactorizationCheck {
        block_length,
        samples,
        cells,
        tv_distance: 0.5 * tv,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodebookIidCheck {
    pub cells: usize,
    /// Largest `|freq(u) - p(u)| / σ` over decoder symbols.
    pub frequency_max_z: f64,
    /// Largest `|r| √N` over symbol indicators, where `r` is the sample
    /// correlation between horizontally (resp. vertically) adjacent cells.
    pub correlation_max_z: f64,
}

/// Frequency and neighbour-correlation z-scores of the decoder codebook.
pub fn decoder_codebook_iid(pair: &CodebookPair, pu: &Pmf) -> CodebookIidCheck {
    let cu = pair.decoder_codebook();
    let (rows, cols) = (pair.messages(), pair.block_length());
    let total = cu.len() as f64;

    let mut frequency_max_z: f64 = 0.0;
    for (symbol, &p) in pu.probs().iter().enumerate() {
        let observed = cu.iter().filter(|&&u| u as usize == symbol).count() as f64 / total;
        let sigma = (p * (1.0 - p) / total).sqrt();
        let z = if sigma > 0.0 {
            (observed - p).abs() / sigma
        } else if observed == p {
            0.0
        } else {
            f64::INFINITY
        };
        frequency_max_z = frequency_max_z.max(z);
    }

    let row_pairs: Vec<(usize, usize)> = (0..rows)
        .flat_map(|r| (0..cols.saturating_sub(1)).map(move |c| (r * cols + c, r * cols + c + 1)))
        .collect();
    let column_pairs: Vec<(usize, usize)> = (0..rows.saturating_sub(1))
        .flat_map(|r| (0..cols).map(move |c| (r * cols + c, (r + 1) * cols + c)))
        .collect();
    let correlation_max_z = [row_pairs, column_pairs]
        .iter()
        .flat_map(|pairs| (0..pu.len()).map(move |symbol| correlation_z(cu, pairs, symbol)))
        .fold(0.0, f64::max);
    CodebookIidCheck {
        cells: cu.len(),
        frequency_max_z,
        correlation_max_z,
    }
}

/// `|r| √N` for the indicator of `symbol` over the given cell pairs; zero
/// when either side is constant.
fn correlation_z(cu: &[u8], pairs: &[(usize, usize)], symbol: usize) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let n = pairs.len() as f64;
    let ind = |k: usize| if cu[k] as usize == symbol { 1.0 } else { 0.0 };
    let (mut sa, mut sb, mut sab) = (0.0, 0.0, 0.0);
    for &(a, b) in pairs {
        let (x, y) = (ind(a), ind(b));
        sa += x;
        sb += y;
        sab += x * y;
    }
    let (ma, mb) = (sa / n, sb / n);
    // indicators: E[x²] = E[x]
    let (va, vb) = (ma - ma * ma, mb - mb * mb);
    if va > 0.0 && vb > 0.0 {
        ((sab / n - ma * mb) / (va * vb).sqrt()).abs() * n.sqrt()
    } else {
        0.0
    }
}

/// Seed for the sampling checks, separate from all simulation streams.
pub fn verification_seed(master: u64, index: u64) -> u64 {
    derive_seed(master, index, STREAM_VERIFY)
}
