//! Reliable communication when the decoder only holds a randomly perturbed
//! copy of the encoder's codebook.
//!
//! The encoder sends `x^n(w)` from codebook `C_X` over a discrete memoryless
//! channel `p(y|x)`; the decoder holds `C_U`, obtained from `C_X` symbol by
//! symbol through `p(u|x)`. The crate provides:
//!
//! - [`info`]: dense finite-alphabet distributions and information measures,
//! - [`capacity`]: `C = max_{p(x)} I(U; Y)` by closed form, lattice search
//!   and projected gradient ascent,
//! - [`codec`]: codebook generation, typicality and MAP decoding, and
//!   seeded Monte Carlo experiments.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod codec;
mod error;
pub mod info;
pub mod numfmt;
pub mod seed;

pub use capacity::{
    capacity_closed_form_bsc, capacity_gap, capacity_grid, capacity_optimize,
    sweep_capacity_surface, CapacityResult, Solver, SolverOptions, StepRule, SurfaceRow,
};
pub use codec::{
    collision_experiment, generate_codebooks, map_decode, run_experiment, transmit,
    typicality_decode, CodebookMode, CodebookPair, DecoderKind, SimConfig, TrialReport,
};
pub use error::{Error, Result};
pub use info::{
    binary_entropy, build_joint_uy, build_joint_xuyv, check_markov, conditional_entropy, entropy,
    mutual_information, JointPmf, Pmf, TransitionMatrix,
};
