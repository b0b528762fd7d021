//! Asymmetric codebook generation, channel transmission, decoding and
//! Monte Carlo error estimation.

mod codebook;
mod decode;
mod empirical;
mod experiment;

pub use codebook::{
    generate_codebooks, generate_codebooks_capped, transmit, CodebookPair, DEFAULT_CELL_CAP,
};
pub use decode::{
    map_decode, map_decode_with, typicality_decode, typicality_decode_with, MapScorer,
    TypicalityTables, NULL_MESSAGE,
};
pub use empirical::{
    block_factorization, decoder_codebook_iid, verification_seed, CodebookIidCheck,
    FactorizationCheck,
};
pub use experiment::{
    collision_experiment, run_experiment, CodebookMode, CollisionReport, DecoderKind,
    MessageTally, SimConfig, TrialReport, TrialReportJson, DEFAULT_EPSILON,
};
