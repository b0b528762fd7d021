//! Decoders. Both read only the decoder codebook `C_U` and single-letter
//! statistics; the encoder codebook is never consulted.

use crate::error::{Error, Result};
use crate::info::{JointPmf, TransitionMatrix};

use super::codebook::CodebookPair;

/// Returned by the typicality decoder when no unique message matches.
pub const NULL_MESSAGE: usize = 0;

fn log2_or_neg_inf(p: f64) -> f64 {
    if p > 0.0 {
        p.log2()
    } else {
        f64::NEG_INFINITY
    }
}

/// Single-letter log-probabilities and entropies for the ε-typicality test.
#[derive(Debug, Clone)]
pub struct TypicalityTables {
    ny: usize,
    log_pu: Vec<f64>,
    log_py: Vec<f64>,
    log_puy: Vec<f64>,
    h_u: f64,
    h_y: f64,
    h_uy: f64,
}

impl TypicalityTables {
    /// `joint` is `p(u, y)` with axes `(U, Y)`.
    pub fn new(joint: &JointPmf) -> Result<Self> {
        if joint.ndim() != 2 {
            return Err(Error::Axis("typicality needs the 2-d joint p(u, y)".into()));
        }
        let pu = joint.marginal_pmf(0)?;
        let py = joint.marginal_pmf(1)?;
        Ok(Self {
            ny: joint.dims()[1],
            log_pu: pu.probs().iter().map(|&p| log2_or_neg_inf(p)).collect(),
            log_py: py.probs().iter().map(|&p| log2_or_neg_inf(p)).collect(),
            log_puy: joint.table().iter().map(|&p| log2_or_neg_inf(p)).collect(),
            h_u: joint.entropy_of(&[0])?,
            h_y: joint.entropy_of(&[1])?,
            h_uy: joint.entropy_of(&[0, 1])?,
        })
    }

    /// `(H(U), H(Y), H(U, Y))`.
    pub fn entropies(&self) -> (f64, f64, f64) {
        (self.h_u, self.h_y, self.h_uy)
    }
}

/// ε-joint-typicality decoding: the unique `w` whose `(u^n(w), y^n)` is
/// jointly typical, or [`NULL_MESSAGE`] on zero or several matches.
pub fn typicality_decode(
    received: &[u8],
    pair: &CodebookPair,
    epsilon: f64,
    joint: &JointPmf,
) -> Result<usize> {
    Ok(typicality_decode_with(received, pair, epsilon, &TypicalityTables::new(joint)?))
}

pub fn typicality_decode_with(
    received: &[u8],
    pair: &CodebookPair,
    epsilon: f64,
    tables: &TypicalityTables,
) -> usize {
    let n = received.len() as f64;
    let y_rate = -received
        .iter()
        .map(|&y| tables.log_py[y as usize])
        .sum::<f64>()
        / n;
    // rate is +inf when y^n is impossible, which fails the test
    if !((y_rate - tables.h_y).abs() < epsilon) {
        return NULL_MESSAGE;
    }
    let mut found = NULL_MESSAGE;
    for message in 1..=pair.messages() {
        let word = pair.decoder_word(message);
        let mut log_u = 0.0;
        let mut log_uy = 0.0;
        for (&u, &y) in word.iter().zip(received) {
            log_u += tables.log_pu[u as usize];
            log_uy += tables.log_puy[u as usize * tables.ny + y as usize];
        }
        let typical = (-log_u / n - tables.h_u).abs() < epsilon
            && (-log_uy / n - tables.h_uy).abs() < epsilon;
        if typical {
            if found != NULL_MESSAGE {
                return NULL_MESSAGE;
            }
            found = message;
        }
    }
    found
}

/// Log-likelihood table `log p(y | u)` for maximum a posteriori decoding.
#[derive(Debug, Clone)]
pub struct MapScorer {
    ny: usize,
    log_pyu: Vec<f64>,
}

impl MapScorer {
    /// `pyu` is the induced channel `p(y | u)`.
    pub fn new(pyu: &TransitionMatrix) -> Self {
        Self {
            ny: pyu.output_size(),
            log_pyu: pyu
                .rows()
                .iter()
                .flat_map(|row| row.probs().iter().map(|&p| log2_or_neg_inf(p)))
                .collect(),
        }
    }

    /// `Σ_i log p(y_i | u_i)`.
    pub fn score(&self, word: &[u8], received: &[u8]) -> f64 {
        word.iter()
            .zip(received)
            .map(|(&u, &y)| self.log_pyu[u as usize * self.ny + y as usize])
            .sum()
    }
}

/// `argmax_w p(y^n | u^n(w))`; ties (including all `-∞`) go to the lowest
/// message index.
pub fn map_decode(received: &[u8], pair: &CodebookPair, pyu: &TransitionMatrix) -> usize {
    map_decode_with(received, pair, &MapScorer::new(pyu))
}

pub fn map_decode_with(received: &[u8], pair: &CodebookPair, scorer: &MapScorer) -> usize {
    let mut best = 1;
    let mut best_score = scorer.score(pair.decoder_word(1), received);
    for message in 2..=pair.messages() {
        let score = scorer.score(pair.decoder_word(message), received);
        if score > best_score {
            best = message;
            best_score = score;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::composite_crossover;
    use crate::info::{build_joint_uy, conditional_channel, Pmf};

    fn bsc_model(p1: f64, p2: f64) -> (JointPmf, TransitionMatrix) {
        let joint = build_joint_uy(
            &Pmf::uniform(2).unwrap(),
            &TransitionMatrix::bsc(p1).unwrap(),
            &TransitionMatrix::bsc(p2).unwrap(),
        )
        .unwrap();
        let pyu = conditional_channel(&joint).unwrap();
        (joint, pyu)
    }

    #[test]
    fn typicality_noiseless_unique_match() {
        let (joint, _) = bsc_model(0.0, 0.0);
        let words = vec![vec![0, 1, 0, 1, 0, 1], vec![1, 1, 1, 0, 0, 0]];
        let pair = CodebookPair::from_rows(words.clone(), words.clone(), 0).unwrap();
        for (w, word) in words.iter().enumerate() {
            assert_eq!(typicality_decode(word, &pair, 0.5, &joint).unwrap(), w + 1);
        }
    }

    #[test]
    fn typicality_rejects_atypical_output() {
        // p(y) skewed so an all-zero output is far from H(Y)
        let joint = build_joint_uy(
            &Pmf::new(vec![0.1, 0.9]).unwrap(),
            &TransitionMatrix::identity(2).unwrap(),
            &TransitionMatrix::identity(2).unwrap(),
        )
        .unwrap();
        let y = vec![0u8; 20];
        let words = vec![y.clone(), vec![1; 20]];
        let pair = CodebookPair::from_rows(words.clone(), words, 0).unwrap();
        assert_eq!(typicality_decode(&y, &pair, 0.05, &joint).unwrap(), NULL_MESSAGE);
    }

    #[test]
    fn typicality_multiple_matches_is_null() {
        let (joint, _) = bsc_model(0.0, 0.0);
        let word = vec![0, 1, 0, 1];
        let pair = CodebookPair::from_rows(vec![word.clone(); 2], vec![word.clone(); 2], 0).unwrap();
        assert_eq!(typicality_decode(&word, &pair, 0.5, &joint).unwrap(), NULL_MESSAGE);
    }

    #[test]
    fn typicality_zero_probability_candidate_is_not_typical() {
        // U is always 0, so any decoder word containing 1 has p(u^n) = 0.
        let joint = build_joint_uy(
            &Pmf::uniform(2).unwrap(),
            &TransitionMatrix::identity(2).unwrap(),
            &TransitionMatrix::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap(),
        )
        .unwrap();
        let y = vec![0, 1, 0, 1];
        let pair = CodebookPair::from_rows(
            vec![vec![0; 4], vec![0; 4]],
            vec![vec![1, 0, 0, 0], vec![0; 4]],
            0,
        )
        .unwrap();
        assert_eq!(typicality_decode(&y, &pair, 0.1, &joint).unwrap(), 2);
    }

    #[test]
    fn map_majority_vote_on_composite_bsc() {
        let (p1, p2) = (0.1, 0.15);
        assert!(composite_crossover(p1, p2) < 0.5);
        let (_, pyu) = bsc_model(p1, p2);
        let pair = CodebookPair::from_rows(
            vec![vec![0, 0, 0], vec![1, 1, 1]],
            vec![vec![0, 0, 0], vec![1, 1, 1]],
            0,
        )
        .unwrap();
        assert_eq!(map_decode(&[0, 0, 1], &pair, &pyu), 1);
        assert_eq!(map_decode(&[1, 0, 1], &pair, &pyu), 2);
        // composite channel p(y|u) is BSC(q)
        let q = composite_crossover(p1, p2);
        assert!((pyu.prob(0, 1) - q).abs() < 1e-15);
    }

    #[test]
    fn map_ties_and_impossible_scores_go_to_lowest_index() {
        let (_, pyu) = bsc_model(0.2, 0.5);
        let pair = CodebookPair::from_rows(
            vec![vec![0; 4]; 3],
            vec![vec![1, 1, 0, 0], vec![0, 0, 0, 0], vec![1, 1, 1, 1]],
            0,
        )
        .unwrap();
        assert_eq!(map_decode(&[0, 1, 1, 0], &pair, &pyu), 1);

        let (_, noiseless) = bsc_model(0.0, 0.0);
        let pair = CodebookPair::from_rows(
            vec![vec![0; 2]; 2],
            vec![vec![0, 0], vec![1, 1]],
            0,
        )
        .unwrap();
        assert_eq!(map_decode(&[0, 1], &pair, &noiseless), 1);
        assert_eq!(map_decode(&[1, 1], &pair, &noiseless), 2);
    }
}
