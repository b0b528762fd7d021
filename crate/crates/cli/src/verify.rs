//! Identity and sampling checks over the binary symmetric model.
//!
//! Exact checks are evaluated from the `(X, U, Y, V)` joint at every lattice
//! point and report the largest residual over the grid. Sampling checks run
//! once at [`SAMPLING_POINT`].

use asymcap_core::codec::{block_factorization, decoder_codebook_iid, generate_codebooks, verification_seed};
use asymcap_core::info::{
    build_joint_xuyv, check_markov, conditional_entropy, conditional_mutual_information,
    mutual_information, JointPmf, Pmf, TransitionMatrix, AXIS_U, AXIS_V, AXIS_X, AXIS_Y,
};
use asymcap_core::{binary_entropy, Result};
use serde::{Deserialize, Serialize};

pub const EXACT_THRESHOLD: f64 = 1e-10;
pub const TV_THRESHOLD: f64 = 5e-3;
pub const Z_THRESHOLD: f64 = 3.0;
pub const SAMPLING_POINT: (f64, f64) = (0.1, 0.2);
const IID_MESSAGES: usize = 256;
const IID_BLOCK: usize = 64;
/// Cell perturbed by the negative control; zero under the true model since
/// `v = u ⊕ y`.
pub const CORRUPT_CELL: [usize; 4] = [0, 1, 0, 0];
pub const CORRUPT_DELTA: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyParams {
    pub grid_step: f64,
    pub grid_max: f64,
    pub samples: u64,
    pub seed: u64,
    pub exact_threshold: f64,
    pub tv_threshold: f64,
    pub z_threshold: f64,
    pub corrupt_joint: bool,
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self {
            grid_step: 0.1,
            grid_max: 0.5,
            samples: 1_000_000,
            seed: 0,
            exact_threshold: EXACT_THRESHOLD,
            tv_threshold: TV_THRESHOLD,
            z_threshold: Z_THRESHOLD,
            corrupt_joint: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// `None` when the check could not be evaluated; such checks fail.
    pub max_residual: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

struct Tracker {
    name: &'static str,
    worst: f64,
    failure: Option<String>,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Self { name, worst: 0.0, failure: None }
    }

    fn record(&mut self, residual: Result<f64>, at: (f64, f64)) {
        match residual {
            Ok(r) if r.is_finite() => self.worst = self.worst.max(r),
            Ok(r) => self.fail(format!("residual {r} at p1 = {}, p2 = {}", at.0, at.1)),
            Err(e) => self.fail(format!("{e} at p1 = {}, p2 = {}", at.0, at.1)),
        }
    }

    fn fail(&mut self, message: String) {
        self.failure.get_or_insert(message);
    }

    fn finish(self, threshold: f64) -> CheckResult {
        match self.failure {
            Some(note) => CheckResult {
                name: self.name.into(),
                max_residual: None,
                threshold,
                pass: false,
                note: Some(note),
            },
            None => CheckResult {
                name: self.name.into(),
                max_residual: Some(self.worst),
                threshold,
                pass: self.worst < threshold,
                note: None,
            },
        }
    }
}

pub fn lattice(step: f64, max: f64) -> Vec<f64> {
    let count = (max / step + 1e-9).floor() as usize;
    (0..=count).map(|k| k as f64 * step).collect()
}

fn excess(p1: f64, p2: f64) -> Result<(f64, f64)> {
    let q = p1 + p2 - 2.0 * p1 * p2;
    let hq = binary_entropy(q)?;
    Ok((hq, binary_entropy(p1)? + binary_entropy(p2)? - hq))
}

const EXACT_CHECKS: [&str; 11] = [
    "markov_u_x_y",
    "markov_u_v_y",
    "markov_x_u_v",
    "markov_x_y_v",
    "rate_loss_identity",
    "mutual_information_balance",
    "h_v_given_x",
    "h_u_given_xv",
    "h_y_given_xv",
    "h_v_given_uy",
    "closed_form_capacity",
];

fn exact_residuals(j: &JointPmf, p1: f64, p2: f64) -> [Result<f64>; 11] {
    let markov = |axes: [usize; 3]| j.marginal(&axes).and_then(|m| check_markov(&m));
    let i_uy = || j.marginal(&[AXIS_U, AXIS_Y]).and_then(|m| mutual_information(&m));
    let h = |target: usize, given: &[usize]| conditional_entropy(j, &[target], given);
    let closed = excess(p1, p2);
    [
        markov([AXIS_U, AXIS_X, AXIS_Y]),
        markov([AXIS_U, AXIS_V, AXIS_Y]),
        markov([AXIS_X, AXIS_U, AXIS_V]),
        markov([AXIS_X, AXIS_Y, AXIS_V]),
        (|| {
            let i_xy = mutual_information(&j.marginal(&[AXIS_X, AXIS_Y])?)?;
            let i_xy_u = conditional_mutual_information(j, &[AXIS_X], &[AXIS_Y], &[AXIS_U])?;
            Ok((i_uy()? - (i_xy - i_xy_u)).abs())
        })(),
        (|| {
            let balance = j.entropy_of(&[AXIS_V])? + h(AXIS_V, &[AXIS_U, AXIS_Y])?
                - binary_entropy(p1)?
                - binary_entropy(p2)?;
            Ok((i_uy()? - balance).abs())
        })(),
        closed.clone().and_then(|(hq, _)| Ok((h(AXIS_V, &[AXIS_X])? - hq).abs())),
        closed.clone().and_then(|(_, e)| Ok((h(AXIS_U, &[AXIS_X, AXIS_V])? - e).abs())),
        closed.clone().and_then(|(_, e)| Ok((h(AXIS_Y, &[AXIS_X, AXIS_V])? - e).abs())),
        closed.clone().and_then(|(_, e)| Ok((h(AXIS_V, &[AXIS_U, AXIS_Y])? - e).abs())),
        closed.and_then(|(hq, _)| Ok((i_uy()? - (1.0 - hq)).abs())),
    ]
}

/// Runs every check. The report is complete even when checks fail.
pub fn run_verification(params: &VerifyParams) -> VerificationReport {
    let mut exact: Vec<Tracker> = EXACT_CHECKS.iter().map(|&n| Tracker::new(n)).collect();
    let grid = if params.grid_step > 0.0 && params.grid_max >= 0.0 && params.grid_max <= 1.0 {
        lattice(params.grid_step, params.grid_max)
    } else {
        Vec::new()
    };
    if grid.is_empty() {
        for t in &mut exact {
            t.fail("empty grid".into());
        }
    }
    let uniform = Pmf::uniform(2).expect("binary alphabet");
    for &p1 in &grid {
        for &p2 in &grid {
            let joint = build_joint_xuyv(&uniform, p1, p2).and_then(|j| {
                if params.corrupt_joint {
                    j.with_cell_bumped(&CORRUPT_CELL, CORRUPT_DELTA)
                } else {
                    Ok(j)
                }
            });
            match joint {
                Ok(j) => {
                    for (t, r) in exact.iter_mut().zip(exact_residuals(&j, p1, p2)) {
                        t.record(r, (p1, p2));
                    }
                }
                Err(e) => {
                    for t in &mut exact {
                        t.fail(format!("{e} at p1 = {p1}, p2 = {p2}"));
                    }
                }
            }
        }
    }
    let mut checks: Vec<CheckResult> = exact
        .into_iter()
        .map(|t| t.finish(params.exact_threshold))
        .collect();
    checks.extend(sampling_checks(params));
    let pass = checks.iter().all(|c| c.pass);
    VerificationReport { checks, pass }
}

fn sampling_checks(params: &VerifyParams) -> Vec<CheckResult> {
    let (p1, p2) = SAMPLING_POINT;
    let mut tv = Tracker::new("block_factorization_tv");
    let mut freq = Tracker::new("decoder_frequency_z");
    let mut corr = Tracker::new("decoder_correlation_z");

    let px = Pmf::uniform(2).expect("binary alphabet");
    let channels = TransitionMatrix::bsc(p1).and_then(|a| Ok((a, TransitionMatrix::bsc(p2)?)));
    match channels {
        Ok((pyx, pux)) => {
            tv.record(
                block_factorization(&px, &pyx, &pux, 2, params.samples, verification_seed(params.seed, 0))
                    .map(|c| c.tv_distance),
                SAMPLING_POINT,
            );
            // uniform input through BSC(p2) leaves p(u) uniform
            match generate_codebooks(IID_MESSAGES, IID_BLOCK, &px, &pux, verification_seed(params.seed, 1)) {
                Ok(pair) => {
                    let check = decoder_codebook_iid(&pair, &px);
                    freq.record(Ok(check.frequency_max_z), SAMPLING_POINT);
                    corr.record(Ok(check.correlation_max_z), SAMPLING_POINT);
                }
                Err(e) => {
                    freq.fail(e.to_string());
                    corr.fail(e.to_string());
                }
            }
        }
        Err(e) => {
            for t in [&mut tv, &mut freq, &mut corr] {
                t.fail(e.to_string());
            }
        }
    }
    vec![
        tv.finish(params.tv_threshold),
        freq.finish(params.z_threshold),
        corr.finish(params.z_threshold),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifyParams {
        VerifyParams { samples: 200_000, tv_threshold: 1e-2, ..Default::default() }
    }

    #[test]
    fn lattice_includes_endpoint() {
        assert_eq!(lattice(0.1, 0.5).len(), 6);
        assert_eq!(lattice(0.01, 0.5).len(), 51);
        assert_eq!(*lattice(0.1, 0.5).last().unwrap(), 0.5);
    }

    #[test]
    fn default_grid_passes() {
        let r = run_verification(&quick());
        assert!(r.pass, "{r:#?}");
        assert_eq!(r.checks.len(), EXACT_CHECKS.len() + 3);
    }

    #[test]
    fn corrupted_joint_breaks_markov_checks() {
        let r = run_verification(&VerifyParams { corrupt_joint: true, ..quick() });
        assert!(!r.pass);
        assert!(!r.check("markov_u_x_y").unwrap().pass);
        assert!(!r.check("markov_u_v_y").unwrap().pass);
    }

    #[test]
    fn unevaluable_checks_fail() {
        let r = run_verification(&VerifyParams { samples: 0, ..quick() });
        let tv = r.check("block_factorization_tv").unwrap();
        assert!(!tv.pass && tv.max_residual.is_none());
        assert!(!r.pass);
        let r = run_verification(&VerifyParams { grid_step: -1.0, ..quick() });
        assert!(!r.check("h_v_given_x").unwrap().pass);
    }
}
