use rand::Rng;

use crate::error::{Error, Result};
use crate::info::{Pmf, TransitionMatrix};
use crate::seed::{stream_rng, STREAM_CODEBOOK, STREAM_PERTURB};

/// Largest number of cells (`M · n`) a single codebook may hold.
pub const DEFAULT_CELL_CAP: usize = 1 << 26;

/// Encoder codebook `C_X` and the decoder's perturbed copy `C_U`, both
/// `M × n`, stored row-major. Messages are numbered `1..=M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodebookPair {
    cx: Vec<u8>,
    cu: Vec<u8>,
    messages: usize,
    block_length: usize,
    seed: u64,
}

impl CodebookPair {
    /// Builds a pair from explicit rows (one `Vec` per message).
    pub fn from_rows(cx: Vec<Vec<u8>>, cu: Vec<Vec<u8>>, seed: u64) -> Result<Self> {
        if cx.is_empty() || cx.len() != cu.len() {
            return Err(Error::DimensionMismatch(format!(
                "codebooks have {} and {} rows",
                cx.len(),
                cu.len()
            )));
        }
        let block_length = cx[0].len();
        if block_length == 0 {
            return Err(Error::Config("block length must be at least 1".into()));
        }
        if let Some(row) = cx.iter().chain(&cu).position(|r| r.len() != block_length) {
            return Err(Error::Row {
                row: row % cx.len(),
                message: format!("codeword length differs from {block_length}"),
            });
        }
        Ok(Self {
            messages: cx.len(),
            block_length,
            cx: cx.concat(),
            cu: cu.concat(),
            seed,
        })
    }

    pub fn messages(&self) -> usize {
        self.messages
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn span(&self, message: usize) -> std::ops::Range<usize> {
        assert!(
            (1..=self.messages).contains(&message),
            "message {message} outside 1..={}",
            self.messages
        );
        let start = (message - 1) * self.block_length;
        start..start + self.block_length
    }

    /// Encoder codeword `x^n(w)`.
    pub fn codeword(&self, message: usize) -> &[u8] {
        &self.cx[self.span(message)]
    }

    /// Decoder codeword `u^n(w)`.
    pub fn decoder_word(&self, message: usize) -> &[u8] {
        &self.cu[self.span(message)]
    }

    pub fn encoder_codebook(&self) -> &[u8] {
        &self.cx
    }

    pub fn decoder_codebook(&self) -> &[u8] {
        &self.cu
    }

    /// Copy whose decoder rows `1..=count` all equal row 1, so the
    /// message-to-decoder-codeword map is no longer one-to-one.
    pub fn with_shared_decoder_rows(&self, count: usize) -> Self {
        let mut out = self.clone();
        let shared = self.decoder_word(1).to_vec();
        for message in 2..=count.min(self.messages) {
            let span = self.span(message);
            out.cu[span].copy_from_slice(&shared);
        }
        out
    }

    /// Copy with the encoder codebook replaced, decoder codebook untouched.
    pub fn with_encoder_codebook(&self, cx: Vec<u8>) -> Result<Self> {
        if cx.len() != self.cx.len() {
            return Err(Error::DimensionMismatch(format!(
                "replacement encoder codebook has {} cells, expected {}",
                cx.len(),
                self.cx.len()
            )));
        }
        Ok(Self { cx, ..self.clone() })
    }
}

pub fn generate_codebooks(
    messages: usize,
    block_length: usize,
    px: &Pmf,
    pux: &TransitionMatrix,
    seed: u64,
) -> Result<CodebookPair> {
    generate_codebooks_capped(messages, block_length, px, pux, seed, DEFAULT_CELL_CAP)
}

pub(crate) fn check_cells(messages: usize, block_length: usize, cap: usize) -> Result<usize> {
    match messages.checked_mul(block_length) {
        Some(cells) if cells <= cap => Ok(cells),
        Some(cells) => Err(Error::Overflow { cells, cap }),
        None => Err(Error::Overflow {
            cells: usize::MAX,
            cap,
        }),
    }
}

/// Draws `C_X` i.i.d. from `px` and each `C_U` cell from the row of `pux`
/// selected by the co-located `C_X` symbol.
pub fn generate_codebooks_capped(
    messages: usize,
    block_length: usize,
    px: &Pmf,
    pux: &TransitionMatrix,
    seed: u64,
    cell_cap: usize,
) -> Result<CodebookPair> {
    if messages == 0 || block_length == 0 {
        return Err(Error::Config(format!(
            "need M ≥ 1 and n ≥ 1, got M = {messages}, n = {block_length}"
        )));
    }
    if pux.input_size() != px.len() {
        return Err(Error::DimensionMismatch(format!(
            "p(x) has {} symbols but p(u|x) has {} rows",
            px.len(),
            pux.input_size()
        )));
    }
    let cells = check_cells(messages, block_length, cell_cap)?;
    let mut rng = stream_rng(seed, 0, STREAM_CODEBOOK);
    let cx: Vec<u8> = (0..cells).map(|_| px.sample(&mut rng) as u8).collect();
    let mut rng = stream_rng(seed, 0, STREAM_PERTURB);
    let cu = cx
        .iter()
        .map(|&x| pux.row(x as usize).sample(&mut rng) as u8)
        .collect();
    Ok(CodebookPair {
        cx,
        cu,
        messages,
        block_length,
        seed,
    })
}

/// Sends `codeword` through the memoryless channel `pyx`.
pub fn transmit(codeword: &[u8], pyx: &TransitionMatrix, seed: u64) -> Vec<u8> {
    let mut rng = crate::seed::rng_from_seed(seed);
    codeword
        .iter()
        .map(|&x| pyx.row(x as usize).quantile(rng.gen::<f64>()) as u8)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_perturbation_copies_codebook() {
        let px = Pmf::uniform(3).unwrap();
        let pair = generate_codebooks(10, 7, &px, &TransitionMatrix::identity(3).unwrap(), 1).unwrap();
        assert_eq!(pair.encoder_codebook(), pair.decoder_codebook());
        assert_eq!(pair.codeword(10).len(), 7);
    }

    #[test]
    fn point_mass_source_gives_all_zero_codebook() {
        let px = Pmf::point_mass(2, 0).unwrap();
        let pair = generate_codebooks(5, 9, &px, &TransitionMatrix::bsc(0.3).unwrap(), 2).unwrap();
        assert!(pair.encoder_codebook().iter().all(|&x| x == 0));
    }

    #[test]
    fn perturbation_rate_concentrates() {
        let (m, n, p2) = (64usize, 32usize, 0.2);
        let px = Pmf::uniform(2).unwrap();
        let pair = generate_codebooks(m, n, &px, &TransitionMatrix::bsc(p2).unwrap(), 0xC0DE).unwrap();
        let flips = pair
            .encoder_codebook()
            .iter()
            .zip(pair.decoder_codebook())
            .filter(|(a, b)| a != b)
            .count();
        let cells = (m * n) as f64;
        let sigma = (p2 * (1.0 - p2) / cells).sqrt();
        assert!((flips as f64 / cells - p2).abs() < 3.0 * sigma);
    }

    #[test]
    fn generation_is_seed_determined() {
        let px = Pmf::uniform(2).unwrap();
        let pux = TransitionMatrix::bsc(0.1).unwrap();
        let a = generate_codebooks(8, 8, &px, &pux, 99).unwrap();
        assert_eq!(a, generate_codebooks(8, 8, &px, &pux, 99).unwrap());
        assert_ne!(a, generate_codebooks(8, 8, &px, &pux, 100).unwrap());
    }

    #[test]
    fn cell_cap_and_shape_errors() {
        let px = Pmf::uniform(2).unwrap();
        let pux = TransitionMatrix::bsc(0.1).unwrap();
        assert!(matches!(
            generate_codebooks_capped(100, 100, &px, &pux, 0, 9_999),
            Err(Error::Overflow { cells: 10_000, cap: 9_999 })
        ));
        assert!(matches!(
            generate_codebooks(usize::MAX, 2, &px, &pux, 0),
            Err(Error::Overflow { .. })
        ));
        assert!(generate_codebooks(0, 2, &px, &pux, 0).is_err());
        assert!(generate_codebooks(2, 2, &Pmf::uniform(3).unwrap(), &pux, 0).is_err());
    }

    #[test]
    fn transmit_extremes() {
        let x = vec![0u8, 1, 1, 0, 1];
        assert_eq!(transmit(&x, &TransitionMatrix::identity(2).unwrap(), 5), x);
        let flipped: Vec<u8> = x.iter().map(|b| 1 - b).collect();
        assert_eq!(transmit(&x, &TransitionMatrix::bsc(1.0).unwrap(), 5), flipped);
    }

    #[test]
    fn bsc_noise_rate_concentrates() {
        let n = 10_000;
        let x = vec![0u8; n];
        let y = transmit(&x, &TransitionMatrix::bsc(0.1).unwrap(), 42);
        let d = y.iter().filter(|&&b| b == 1).count() as f64 / n as f64;
        let sigma = (0.1f64 * 0.9 / n as f64).sqrt();
        assert!((d - 0.1).abs() < 3.0 * sigma, "{d}");
    }

    #[test]
    fn shared_decoder_rows() {
        let px = Pmf::uniform(2).unwrap();
        let pair = generate_codebooks(6, 12, &px, &TransitionMatrix::bsc(0.3).unwrap(), 8).unwrap();
        let collided = pair.with_shared_decoder_rows(4);
        for w in 2..=4 {
            assert_eq!(collided.decoder_word(w), pair.decoder_word(1));
        }
        assert_eq!(collided.decoder_word(5), pair.decoder_word(5));
        assert_eq!(collided.encoder_codebook(), pair.encoder_codebook());
        assert_eq!(pair.with_shared_decoder_rows(1), pair);
    }

    #[test]
    fn from_rows_validation() {
        assert!(CodebookPair::from_rows(vec![vec![0, 1]], vec![vec![0]], 0).is_err());
        assert!(CodebookPair::from_rows(vec![vec![0]], vec![], 0).is_err());
        let pair = CodebookPair::from_rows(vec![vec![0, 1], vec![1, 1]], vec![vec![0, 0], vec![1, 0]], 3).unwrap();
        assert_eq!(pair.messages(), 2);
        assert_eq!(pair.decoder_word(2), &[1, 0]);
    }
}
