//! Seed derivation for independent, reproducible random streams.
//!
//! Every random quantity is drawn from a [`ChaCha8Rng`] seeded (through
//! `SeedableRng::seed_from_u64`) with a 64-bit seed derived from
//! `(master_seed, index, stream_tag)` by chained splitmix64 finalizers.
//! Distinct tags keep the codebook, message, channel-noise and perturbation
//! draws of one trial independent of each other, and the index keeps trials
//! independent, so trials can run in any order on any number of threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Encoder codebook `C_X`.
pub const STREAM_CODEBOOK: u64 = 0x01;
/// Message index `W`.
pub const STREAM_MESSAGE: u64 = 0x02;
/// Channel noise `p(y|x)`.
pub const STREAM_CHANNEL: u64 = 0x03;
/// Codebook perturbation `p(u|x)`.
pub const STREAM_PERTURB: u64 = 0x04;
/// Sampling-based verification checks.
pub const STREAM_VERIFY: u64 = 0x05;

/// The splitmix64 output function (Steele, Lea, Flood).
pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, index: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ index) ^ stream)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream_rng(master: u64, index: u64, stream: u64) -> ChaCha8Rng {
    rng_from_seed(derive_seed(master, index, stream))
}
