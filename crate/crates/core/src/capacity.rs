//! Capacity of the channel with a perturbed decoder codebook,
//! `C = max_{p(x)} I(U; Y)` with `p(u, y) = Σ_x p(x) p(y|x) p(u|x)`.
//!
//! Three routes: the closed form for the binary symmetric model, an
//! exhaustive simplex lattice (the oracle for small input alphabets) and a
//! multi-start projected gradient ascent for general alphabets.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::info::{binary_entropy, Pmf, TransitionMatrix};
use crate::numfmt::sig10;

/// Largest input alphabet the lattice search accepts.
pub const GRID_MAX_INPUTS: usize = 4;

/// Improvement needed for a later candidate to displace an earlier one.
const TIE_TOL: f64 = 1e-12;

/// Largest input alphabet that also gets one start per simplex facet.
pub const FACET_START_MAX_INPUTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    ClosedForm,
    Grid,
    Gradient,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    pub capacity: f64,
    #[serde(serialize_with = "serialize_pmf")]
    pub argmax_px: Pmf,
    pub solver: Solver,
    pub iterations: usize,
    /// Projected-gradient norm for the gradient solver, lattice spacing for
    /// the grid, zero for the closed form.
    pub residual: f64,
    /// Objective value reached from each start (gradient solver only), in
    /// start order: uniform, facet centroids, random.
    pub restart_optima: Vec<f64>,
}

fn serialize_pmf<S: serde::Serializer>(p: &Pmf, s: S) -> std::result::Result<S::Ok, S::Error> {
    p.probs().serialize(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    Fixed,
    Backtracking,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverOptions {
    pub grid_resolution: f64,
    /// Random starts in addition to the uniform and facet starts.
    pub restarts: usize,
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub step_size_rule: StepRule,
    /// Fixed step, or the initial trial step when backtracking.
    pub step_size: f64,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            grid_resolution: 1e-3,
            restarts: 8,
            max_iterations: 20_000,
            convergence_tol: 1e-10,
            step_size_rule: StepRule::Backtracking,
            step_size: 1.0,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.grid_resolution > 0.0 && self.grid_resolution <= 1.0) {
            return Err(Error::Config(format!(
                "grid resolution must be in (0, 1], got {}",
                self.grid_resolution
            )));
        }
        if self.restarts < 1 {
            return Err(Error::Config("restarts must be at least 1".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::Config(format!(
                "convergence tolerance must be positive, got {}",
                self.convergence_tol
            )));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::Config(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        Ok(())
    }
}

/// `p(x) ↦ I(U; Y)` as a function on the nonnegative orthant.
///
/// The joint `p(u, y)` is linear in `p(x)` with coefficient
/// `p(y|x) p(u|x)` on entry `(u, y)`; `value` and `gradient` use the
/// unnormalized extension `Σ J log(J / (J_u J_y))`, which agrees with the
/// mutual information on the simplex.
#[derive(Debug, Clone)]
pub struct UyObjective {
    inputs: usize,
    nu: usize,
    ny: usize,
    coupling: Vec<f64>,
}

struct Scratch {
    joint: Vec<f64>,
    pu: Vec<f64>,
    py: Vec<f64>,
}

impl UyObjective {
    pub fn new(pyx: &TransitionMatrix, pux: &TransitionMatrix) -> Result<Self> {
        if pyx.input_size() != pux.input_size() {
            return Err(Error::DimensionMismatch(format!(
                "p(y|x) has {} inputs but p(u|x) has {}",
                pyx.input_size(),
                pux.input_size()
            )));
        }
        let (inputs, nu, ny) = (pyx.input_size(), pux.output_size(), pyx.output_size());
        let mut coupling = Vec::with_capacity(inputs * nu * ny);
        for x in 0..inputs {
            for u in 0..nu {
                for y in 0..ny {
                    coupling.push(pux.prob(x, u) * pyx.prob(x, y));
                }
            }
        }
        Ok(Self {
            inputs,
            nu,
            ny,
            coupling,
        })
    }

    pub fn input_size(&self) -> usize {
        self.inputs
    }

    fn scratch(&self) -> Scratch {
        Scratch {
            joint: vec![0.0; self.nu * self.ny],
            pu: vec![0.0; self.nu],
            py: vec![0.0; self.ny],
        }
    }

    fn fill(&self, px: &[f64], s: &mut Scratch) {
        let cells = self.nu * self.ny;
        s.joint.iter_mut().for_each(|v| *v = 0.0);
        for (x, &w) in px.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let row = &self.coupling[x * cells..(x + 1) * cells];
            for (j, &a) in s.joint.iter_mut().zip(row) {
                *j += w * a;
            }
        }
        s.pu.iter_mut().for_each(|v| *v = 0.0);
        s.py.iter_mut().for_each(|v| *v = 0.0);
        for u in 0..self.nu {
            for y in 0..self.ny {
                let j = s.joint[u * self.ny + y];
                s.pu[u] += j;
                s.py[y] += j;
            }
        }
    }

    fn value_with(&self, px: &[f64], s: &mut Scratch) -> f64 {
        self.fill(px, s);
        let mut info = 0.0;
        for u in 0..self.nu {
            for y in 0..self.ny {
                let j = s.joint[u * self.ny + y];
                if j > 0.0 {
                    info += j * (j / (s.pu[u] * s.py[y])).log2();
                }
            }
        }
        info
    }

    pub fn value(&self, px: &[f64]) -> f64 {
        assert_eq!(px.len(), self.inputs, "input distribution length");
        self.value_with(px, &mut self.scratch())
    }

    fn gradient_with(&self, px: &[f64], s: &mut Scratch) -> Vec<f64> {
        self.fill(px, s);
        let cells = self.nu * self.ny;
        let mut log_ratio = vec![0.0; cells];
        let mut live = vec![false; cells];
        for u in 0..self.nu {
            for y in 0..self.ny {
                let k = u * self.ny + y;
                let j = s.joint[k];
                if j > 0.0 {
                    log_ratio[k] = (j / (s.pu[u] * s.py[y])).log2();
                    live[k] = true;
                }
            }
        }
        (0..self.inputs)
            .map(|x| {
                let row = &self.coupling[x * cells..(x + 1) * cells];
                let mass: f64 = row.iter().sum();
                let dot: f64 = row
                    .iter()
                    .zip(&log_ratio)
                    .zip(&live)
                    .filter(|(_, &l)| l)
                    .map(|((a, r), _)| a * r)
                    .sum();
                dot - mass * std::f64::consts::LOG2_E
            })
            .collect()
    }

    /// Euclidean gradient of the extension with respect to `p(x)`.
    pub fn gradient(&self, px: &[f64]) -> Vec<f64> {
        assert_eq!(px.len(), self.inputs, "input distribution length");
        self.gradient_with(px, &mut self.scratch())
    }

    /// Gradient restricted to the simplex tangent space (components sum to 0).
    pub fn simplex_gradient(&self, px: &[f64]) -> Vec<f64> {
        let mut g = self.gradient(px);
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        g.iter_mut().for_each(|v| *v -= mean);
        g
    }
}

/// Euclidean projection onto the probability simplex (sort-and-threshold).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn stationarity(p: &[f64], g: &[f64]) -> f64 {
    let moved: Vec<f64> = p.iter().zip(g).map(|(a, b)| a + b).collect();
    distance(&project_simplex(&moved), p)
}

struct Ascent {
    px: Vec<f64>,
    value: f64,
    iterations: usize,
    residual: f64,
}

fn ascend(obj: &UyObjective, start: Vec<f64>, opts: &SolverOptions) -> Ascent {
    let mut s = obj.scratch();
    let mut p = start;
    let mut f = obj.value_with(&p, &mut s);
    let mut step = opts.step_size;
    let mut residual = f64::INFINITY;
    for iteration in 0..opts.max_iterations {
        let g = obj.gradient_with(&p, &mut s);
        residual = stationarity(&p, &g);
        if residual < opts.convergence_tol {
            return Ascent {
                px: p,
                value: f,
                iterations: iteration,
                residual,
            };
        }
        let trial = |t: f64| -> Vec<f64> {
            let moved: Vec<f64> = p.iter().zip(&g).map(|(a, b)| a + t * b).collect();
            project_simplex(&moved)
        };
        match opts.step_size_rule {
            StepRule::Fixed => {
                p = trial(opts.step_size);
                f = obj.value_with(&p, &mut s);
            }
            StepRule::Backtracking => {
                let mut t = step;
                loop {
                    let candidate = trial(t);
                    let fc = obj.value_with(&candidate, &mut s);
                    let moved = distance(&candidate, &p);
                    // sufficient ascent along the projection arc
                    if fc >= f + 1e-4 * moved * moved / t {
                        p = candidate;
                        f = fc;
                        step = (t * 2.0).min(1e6);
                        break;
                    }
                    t *= 0.5;
                    if t < 1e-30 {
                        // no ascent direction resolvable in floating point
                        return Ascent {
                            px: p,
                            value: f,
                            iterations: iteration + 1,
                            residual,
                        };
                    }
                }
            }
        }
    }
    let g = obj.gradient_with(&p, &mut s);
    residual = residual.min(stationarity(&p, &g));
    Ascent {
        px: p,
        value: f,
        iterations: opts.max_iterations,
        residual,
    }
}

/// Uniform draw from the simplex via normalized exponentials.
fn random_simplex_point<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..dim).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / total).collect()
}

fn check_binary_pair(p1: f64, p2: f64) -> Result<()> {
    for (what, p) in [("p1", p1), ("p2", p2)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain { what, value: p });
        }
    }
    Ok(())
}

/// Crossover probability of the composite channel `Z1 ⊕ Z2`.
pub fn composite_crossover(p1: f64, p2: f64) -> f64 {
    p1 + p2 - 2.0 * p1 * p2
}

/// `C = 1 - H(p1 + p2 - 2 p1 p2)`, attained by the uniform input.
pub fn capacity_closed_form_bsc(p1: f64, p2: f64) -> Result<CapacityResult> {
    check_binary_pair(p1, p2)?;
    let q = composite_crossover(p1, p2).clamp(0.0, 1.0);
    Ok(CapacityResult {
        capacity: 1.0 - binary_entropy(q)?,
        argmax_px: Pmf::uniform(2)?,
        solver: Solver::ClosedForm,
        iterations: 0,
        residual: 0.0,
        restart_optima: Vec::new(),
    })
}

/// Rate lost to codebook asymmetry in the binary symmetric model,
/// `H(p1 + p2 - 2 p1 p2) - H(p1)`.
pub fn closed_form_gap_bsc(p1: f64, p2: f64) -> Result<f64> {
    check_binary_pair(p1, p2)?;
    let q = composite_crossover(p1, p2).clamp(0.0, 1.0);
    Ok(binary_entropy(q)? - binary_entropy(p1)?)
}

/// Visits lattice compositions of `total` into `parts` parts (first part
/// fixed to `first`) in lexicographic order, keeping the strict best.
fn best_in_slice(obj: &UyObjective, total: usize, first: usize) -> (f64, Vec<usize>) {
    let parts = obj.input_size();
    let mut s = obj.scratch();
    let mut counts = vec![0usize; parts];
    counts[0] = first;
    let mut px = vec![0.0; parts];
    let mut best = (f64::NEG_INFINITY, counts.clone());

    #[allow(clippy::too_many_arguments)]
    fn visit(
        k: usize,
        remaining: usize,
        counts: &mut Vec<usize>,
        px: &mut Vec<f64>,
        total: usize,
        obj: &UyObjective,
        s: &mut Scratch,
        best: &mut (f64, Vec<usize>),
    ) {
        let parts = counts.len();
        if k == parts - 1 {
            counts[k] = remaining;
            for (p, &c) in px.iter_mut().zip(counts.iter()) {
                *p = c as f64 / total as f64;
            }
            let v = obj.value_with(px, s);
            if v > best.0 + TIE_TOL || best.0 == f64::NEG_INFINITY {
                *best = (v, counts.clone());
            }
            return;
        }
        for c in 0..=remaining {
            counts[k] = c;
            visit(k + 1, remaining - c, counts, px, total, obj, s, best);
        }
    }

    if parts == 1 {
        px[0] = 1.0;
        return (obj.value_with(&px, &mut s), vec![total]);
    }
    visit(1, total - first, &mut counts, &mut px, total, obj, &mut s, &mut best);
    best
}

/// Exhaustive search over the simplex lattice with spacing `resolution`.
///
/// Lattice points are visited in lexicographic order of their coordinates
/// and ties go to the earliest point.
pub fn capacity_grid(
    pyx: &TransitionMatrix,
    pux: &TransitionMatrix,
    resolution: f64,
) -> Result<CapacityResult> {
    let obj = UyObjective::new(pyx, pux)?;
    if obj.input_size() > GRID_MAX_INPUTS {
        return Err(Error::AlphabetTooLarge {
            size: obj.input_size(),
            cap: GRID_MAX_INPUTS,
        });
    }
    if !(resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::Config(format!(
            "grid resolution must be in (0, 1], got {resolution}"
        )));
    }
    let total = (1.0 / resolution).round().max(1.0) as usize;
    let slices: Vec<(f64, Vec<usize>)> = if obj.input_size() == 1 {
        vec![best_in_slice(&obj, total, total)]
    } else {
        (0..=total)
            .into_par_iter()
            .map(|first| best_in_slice(&obj, total, first))
            .collect()
    };
    let mut best = &slices[0];
    for candidate in &slices[1..] {
        if candidate.0 > best.0 + TIE_TOL {
            best = candidate;
        }
    }
    let px = best.1.iter().map(|&c| c as f64 / total as f64).collect();
    Ok(CapacityResult {
        capacity: best.0.max(0.0),
        argmax_px: Pmf::new(px)?,
        solver: Solver::Grid,
        iterations: slices.len(),
        residual: 1.0 / total as f64,
        restart_optima: Vec::new(),
    })
}

/// Multi-start projected gradient ascent of `I(U; Y)` over `p(x)`.
///
/// The uniform distribution is always the first start. For
/// `3 ≤ |X| ≤ FACET_START_MAX_INPUTS` it is followed by the centroid of each
/// facet (uniform with input `k` removed), since `I(U; Y)` is not concave in
/// `p(x)` and its maximum can sit on the boundary. Then come `opts.restarts`
/// starts drawn uniformly from the simplex with `opts.seed`. A later start
/// replaces the incumbent only on strict improvement, so flat objectives
/// report the uniform start.
pub fn capacity_optimize(
    pyx: &TransitionMatrix,
    pux: &TransitionMatrix,
    opts: &SolverOptions,
) -> Result<CapacityResult> {
    opts.validate()?;
    let obj = UyObjective::new(pyx, pux)?;
    let dim = obj.input_size();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![vec![1.0 / dim as f64; dim]];
    if (3..=FACET_START_MAX_INPUTS).contains(&dim) {
        starts.extend((0..dim).map(|dropped| {
            (0..dim)
                .map(|k| if k == dropped { 0.0 } else { 1.0 / (dim - 1) as f64 })
                .collect()
        }));
    }
    starts.extend((0..opts.restarts).map(|_| random_simplex_point(&mut rng, dim)));

    let runs: Vec<Ascent> = starts
        .into_par_iter()
        .map(|start| ascend(&obj, start, opts))
        .collect();
    let mut best = &runs[0];
    for run in &runs[1..] {
        if run.value > best.value + TIE_TOL {
            best = run;
        }
    }
    Ok(CapacityResult {
        capacity: best.value.max(0.0),
        argmax_px: Pmf::new(best.px.clone())?,
        solver: Solver::Gradient,
        iterations: best.iterations,
        residual: best.residual,
        restart_optima: runs.iter().map(|r| r.value).collect(),
    })
}

/// `I(X; Y | U) = I(X; Y) - I(U; Y)` from the exact triple joint.
pub fn capacity_gap(px: &Pmf, pyx: &TransitionMatrix, pux: &TransitionMatrix) -> Result<f64> {
    use crate::info::{build_joint_xuy, conditional_mutual_information};
    let j = build_joint_xuy(px, pyx, pux)?;
    Ok(conditional_mutual_information(&j, &[0], &[2], &[1])?.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceRow {
    pub p1: f64,
    pub p2: f64,
    pub capacity: f64,
    pub gap: f64,
}

/// Closed-form capacity and asymmetry gap over `p1_grid × p2_grid`,
/// row-major in `p1`.
pub fn sweep_capacity_surface(p1_grid: &[f64], p2_grid: &[f64]) -> Result<Vec<SurfaceRow>> {
    for (what, grid) in [("p1 grid", p1_grid), ("p2 grid", p2_grid)] {
        if let Some(&bad) = grid.iter().find(|p| !(0.0..=0.5).contains(*p)) {
            return Err(Error::Domain { what, value: bad });
        }
    }
    let mut rows = Vec::with_capacity(p1_grid.len() * p2_grid.len());
    for &p1 in p1_grid {
        for &p2 in p2_grid {
            rows.push(SurfaceRow {
                p1,
                p2,
                capacity: capacity_closed_form_bsc(p1, p2)?.capacity,
                gap: closed_form_gap_bsc(p1, p2)?,
            });
        }
    }
    Ok(rows)
}

pub const SURFACE_HEADER: &str = "p1,p2,capacity,gap";

pub fn write_surface_csv<W: Write>(rows: &[SurfaceRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{SURFACE_HEADER}")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            sig10(row.p1),
            sig10(row.p2),
            sig10(row.capacity),
            sig10(row.gap)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const ONE_MINUS_H_018: f64 = 0.319_922_954_271_720_2;
    const GAP_01_01: f64 = 0.2110814521389986;

    fn uniform_grid(step: f64, max: f64) -> Vec<f64> {
        let n = (max / step).round() as usize;
        (0..=n).map(|k| k as f64 * step).collect()
    }

    #[test]
    fn closed_form_values() {
        let r = capacity_closed_form_bsc(0.0, 0.0).unwrap();
        assert_eq!(r.capacity, 1.0);
        assert_eq!(r.argmax_px.probs(), &[0.5, 0.5]);
        assert_eq!(r.solver, Solver::ClosedForm);
        for p1 in [0.0, 0.1, 0.37, 0.5, 1.0] {
            assert_abs_diff_eq!(
                capacity_closed_form_bsc(p1, 0.5).unwrap().capacity,
                0.0,
                epsilon = 1e-15
            );
        }
        assert_abs_diff_eq!(
            capacity_closed_form_bsc(0.1, 0.1).unwrap().capacity,
            ONE_MINUS_H_018,
            epsilon = 1e-12
        );
        assert!(capacity_closed_form_bsc(-0.1, 0.0).is_err());
        assert!(capacity_closed_form_bsc(0.0, 1.01).is_err());
    }

    #[test]
    fn closed_form_symmetries_and_dominance() {
        let grid = uniform_grid(0.05, 1.0);
        for &p1 in &grid {
            for &p2 in &grid {
                let c = capacity_closed_form_bsc(p1, p2).unwrap().capacity;
                let flip1 = capacity_closed_form_bsc(1.0 - p1, p2).unwrap().capacity;
                let flip2 = capacity_closed_form_bsc(p1, 1.0 - p2).unwrap().capacity;
                assert_abs_diff_eq!(c, flip1, epsilon = 1e-12);
                assert_abs_diff_eq!(c, flip2, epsilon = 1e-12);
            }
        }
        for &p1 in uniform_grid(0.05, 0.5).iter().filter(|&&p| p > 0.0 && p < 0.5) {
            let shannon = 1.0 - binary_entropy(p1).unwrap();
            assert_eq!(capacity_closed_form_bsc(p1, 0.0).unwrap().capacity, shannon);
            for p2 in [0.01, 0.1, 0.25, 0.49] {
                assert!(capacity_closed_form_bsc(p1, p2).unwrap().capacity < shannon);
            }
        }
    }

    #[test]
    fn grid_matches_closed_form() {
        let r = capacity_grid(
            &TransitionMatrix::bsc(0.1).unwrap(),
            &TransitionMatrix::bsc(0.1).unwrap(),
            1e-3,
        )
        .unwrap();
        assert_eq!(r.solver, Solver::Grid);
        assert_abs_diff_eq!(r.capacity, ONE_MINUS_H_018, epsilon = 1e-5);
        assert!((r.argmax_px.get(0) - 0.5).abs() <= 1e-3);

        let shannon = capacity_grid(
            &TransitionMatrix::bsc(0.11).unwrap(),
            &TransitionMatrix::identity(2).unwrap(),
            1e-3,
        )
        .unwrap();
        assert_abs_diff_eq!(shannon.capacity, 0.500084041835472, epsilon = 1e-5);
    }

    #[test]
    fn grid_useless_channel_is_zero_and_first_point_wins() {
        let row = Pmf::new(vec![0.2, 0.3, 0.5]).unwrap();
        let pyx = TransitionMatrix::constant(3, &row).unwrap();
        let pux = TransitionMatrix::identity(3).unwrap();
        let r = capacity_grid(&pyx, &pux, 0.05).unwrap();
        assert_eq!(r.capacity, 0.0);
        // lexicographically first lattice point is (0, 0, 1)
        assert_eq!(r.argmax_px.probs(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn grid_rejects_large_alphabets() {
        let m = TransitionMatrix::identity(5).unwrap();
        assert!(matches!(
            capacity_grid(&m, &m, 0.1),
            Err(Error::AlphabetTooLarge { size: 5, .. })
        ));
    }

    #[test]
    fn optimizer_matches_closed_form() {
        let r = capacity_optimize(
            &TransitionMatrix::bsc(0.1).unwrap(),
            &TransitionMatrix::bsc(0.2).unwrap(),
            &SolverOptions::default(),
        )
        .unwrap();
        let expected = capacity_closed_form_bsc(0.1, 0.2).unwrap().capacity;
        assert_abs_diff_eq!(r.capacity, expected, epsilon = 1e-6);
        assert_eq!(r.restart_optima.len(), 9);
        assert!(r.residual < 1e-6);
    }

    #[test]
    fn optimizer_fixed_step_rule_converges_on_easy_instance() {
        let opts = SolverOptions {
            step_size_rule: StepRule::Fixed,
            step_size: 0.05,
            ..SolverOptions::default()
        };
        let r = capacity_optimize(
            &TransitionMatrix::bsc(0.05).unwrap(),
            &TransitionMatrix::bsc(0.05).unwrap(),
            &opts,
        )
        .unwrap();
        let expected = capacity_closed_form_bsc(0.05, 0.05).unwrap().capacity;
        assert_abs_diff_eq!(r.capacity, expected, epsilon = 1e-6);
    }

    #[test]
    fn optimizer_reports_nonconvergence_through_residual() {
        let opts = SolverOptions {
            max_iterations: 1,
            step_size_rule: StepRule::Fixed,
            step_size: 1e-6,
            restarts: 1,
            seed: 3,
            ..SolverOptions::default()
        };
        let pyx = TransitionMatrix::new(vec![
            vec![0.7, 0.2, 0.1],
            vec![0.1, 0.8, 0.1],
            vec![0.3, 0.3, 0.4],
        ])
        .unwrap();
        let pux = TransitionMatrix::bsc(0.0).unwrap();
        assert!(capacity_optimize(&pyx, &pux, &opts).is_err(), "mismatched alphabets");
        let pux = TransitionMatrix::identity(3).unwrap();
        let r = capacity_optimize(&pyx, &pux, &opts).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.residual > opts.convergence_tol);
    }

    #[test]
    fn invalid_solver_options() {
        let m = TransitionMatrix::identity(2).unwrap();
        for opts in [
            SolverOptions { restarts: 0, ..Default::default() },
            SolverOptions { convergence_tol: 0.0, ..Default::default() },
            SolverOptions { grid_resolution: -1.0, ..Default::default() },
        ] {
            assert!(matches!(capacity_optimize(&m, &m, &opts), Err(Error::Config(_))));
        }
    }

    #[test]
    fn gap_values() {
        let px = Pmf::uniform(2).unwrap();
        let id = TransitionMatrix::identity(2).unwrap();
        let bsc = TransitionMatrix::bsc(0.1).unwrap();
        assert!(capacity_gap(&px, &bsc, &id).unwrap() < 1e-12);
        assert_abs_diff_eq!(capacity_gap(&px, &bsc, &bsc).unwrap(), GAP_01_01, epsilon = 1e-12);
        assert_abs_diff_eq!(closed_form_gap_bsc(0.1, 0.1).unwrap(), GAP_01_01, epsilon = 1e-12);
        let half = TransitionMatrix::bsc(0.5).unwrap();
        assert_abs_diff_eq!(
            capacity_gap(&px, &bsc, &half).unwrap(),
            1.0 - binary_entropy(0.1).unwrap(),
            epsilon = 1e-12
        );
        assert!(capacity_gap(&Pmf::uniform(3).unwrap(), &bsc, &id).is_err());
    }

    #[test]
    fn projection_onto_simplex() {
        assert_eq!(project_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        for v in p {
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
        }
        let p = project_simplex(&[-1.0, 0.3, 0.9]);
        assert_eq!(p[0], 0.0);
        assert_abs_diff_eq!(p[1], 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(p[2], 0.8, epsilon = 1e-15);
    }

    #[test]
    fn surface_rows() {
        let grid = uniform_grid(0.05, 0.5);
        let rows = sweep_capacity_surface(&grid, &grid).unwrap();
        assert_eq!(rows.len(), 121);
        assert_eq!((rows[1].p1, rows[1].p2), (0.0, 0.05));
        for row in rows.iter().filter(|r| r.p2 == 0.0) {
            assert_abs_diff_eq!(row.gap, 0.0, epsilon = 1e-15);
        }
        for row in &rows {
            let mirrored = rows
                .iter()
                .find(|r| r.p1 == row.p2 && r.p2 == row.p1)
                .unwrap();
            assert_abs_diff_eq!(row.capacity, mirrored.capacity, epsilon = 1e-12);
        }
        let row = rows.iter().find(|r| r.p1 == 0.25 && r.p2 == 0.25).unwrap();
        assert_abs_diff_eq!(row.capacity, 0.04556599707503504, epsilon = 1e-12);
        assert!(sweep_capacity_surface(&[0.6], &[0.1]).is_err());
    }

    #[test]
    fn surface_csv_layout() {
        let rows = sweep_capacity_surface(&[0.0, 0.1], &[0.1]).unwrap();
        let mut buf = Vec::new();
        write_surface_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "p1,p2,capacity,gap\n0,0.1,0.5310044064,0.4689955936\n0.1,0.1,0.3199229543,0.2110814521\n"
        );
    }
}
