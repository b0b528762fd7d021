//! Benchmark fixtures shared by the criterion targets.

use asymcap_core::TransitionMatrix;

/// Deterministic ternary channel with distinct rows.
pub fn ternary_channel() -> TransitionMatrix {
    TransitionMatrix::new(vec![
        vec![0.7, 0.2, 0.1],
        vec![0.15, 0.7, 0.15],
        vec![0.1, 0.25, 0.65],
    ])
    .expect("rows are stochastic")
}

/// Ternary perturbation that keeps the diagonal dominant.
pub fn ternary_perturbation() -> TransitionMatrix {
    TransitionMatrix::new(vec![
        vec![0.8, 0.1, 0.1],
        vec![0.1, 0.8, 0.1],
        vec![0.2, 0.2, 0.6],
    ])
    .expect("rows are stochastic")
}
