//! Exact finite-alphabet probability tables and information measures.
//!
//! Everything here works on dense tables in bits (log base 2) with the
//! convention `0 · log 0 = 0`. Types are immutable once built.

use std::fmt;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};

/// Deviation from unit mass accepted without touching the entries.
pub const NORM_TOL: f64 = 1e-9;
/// Deviation from unit mass that is silently renormalized.
pub const RENORM_TOL: f64 = 1e-6;
/// Largest alphabet size on any axis.
pub const MAX_ALPHABET: usize = 64;
/// Largest number of axes in a [`JointPmf`].
pub const MAX_AXES: usize = 4;

/// Axis order of the table returned by [`build_joint_xuyv`].
pub const AXIS_X: usize = 0;
pub const AXIS_U: usize = 1;
pub const AXIS_Y: usize = 2;
pub const AXIS_V: usize = 3;

#[inline]
fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

fn check_probability(what: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain { what, value: p })
    }
}

/// Validates entries and mass, renormalizing near-misses.
fn normalize(mut probs: Vec<f64>) -> Result<Vec<f64>> {
    for (index, &value) in probs.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidEntry { index, value });
        }
    }
    let sum: f64 = probs.iter().sum();
    let off = (sum - 1.0).abs();
    if off > RENORM_TOL {
        return Err(Error::NotNormalized { sum });
    }
    if off > NORM_TOL {
        probs.iter_mut().for_each(|p| *p /= sum);
    }
    Ok(probs)
}

/// A probability vector over a finite alphabet `{0, .., len-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        if probs.len() > MAX_ALPHABET {
            return Err(Error::AlphabetTooLarge {
                size: probs.len(),
                cap: MAX_ALPHABET,
            });
        }
        Ok(Self {
            probs: normalize(probs)?,
        })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyAlphabet);
        }
        Self::new(vec![1.0 / size as f64; size])
    }

    pub fn point_mass(size: usize, symbol: usize) -> Result<Self> {
        if symbol >= size {
            return Err(Error::DimensionMismatch(format!(
                "symbol {symbol} outside alphabet of size {size}"
            )));
        }
        let mut probs = vec![0.0; size];
        probs[symbol] = 1.0;
        Self::new(probs)
    }

    /// `(1 - p, p)`: probability `p` on symbol 1.
    pub fn bernoulli(p: f64) -> Result<Self> {
        check_probability("bernoulli parameter", p)?;
        Self::new(vec![1.0 - p, p])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, symbol: usize) -> f64 {
        self.probs[symbol]
    }

    /// Inverse-CDF lookup: the first symbol whose cumulative mass exceeds `u`.
    ///
    /// `u` is expected in `[0, 1)`. Rounding slack at the top end falls back
    /// to the last symbol with positive mass.
    pub fn quantile(&self, u: f64) -> usize {
        let mut cumulative = 0.0;
        let mut last_positive = 0;
        for (symbol, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                cumulative += p;
                last_positive = symbol;
                if u < cumulative {
                    return symbol;
                }
            }
        }
        last_positive
    }

    /// Draws one symbol by inverse CDF from a single uniform `f64`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.quantile(rng.gen::<f64>())
    }
}

impl fmt::Display for Pmf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.probs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Row-stochastic matrix: row `x` is the law of the output given input `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    rows: Vec<Pmf>,
    output_size: usize,
}

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        if rows.len() > MAX_ALPHABET {
            return Err(Error::AlphabetTooLarge {
                size: rows.len(),
                cap: MAX_ALPHABET,
            });
        }
        let output_size = rows[0].len();
        let rows = rows
            .into_iter()
            .enumerate()
            .map(|(row, probs)| {
                if probs.len() != output_size {
                    return Err(Error::Row {
                        row,
                        message: format!(
                            "has {} entries, expected {output_size}",
                            probs.len()
                        ),
                    });
                }
                Pmf::new(probs).map_err(|e| Error::Row {
                    row,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { rows, output_size })
    }

    pub fn identity(size: usize) -> Result<Self> {
        Self::new(
            (0..size)
                .map(|x| (0..size).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        check_probability("crossover probability", p)?;
        Self::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Every input maps to the same output law.
    pub fn constant(inputs: usize, row: &Pmf) -> Result<Self> {
        Self::new(vec![row.probs().to_vec(); inputs])
    }

    /// Parses the plain-text matrix format: one row per line, whitespace
    /// separated decimals, `#` starts a comment line, blank lines ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let row = trimmed
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| Error::Parse {
                        line: lineno + 1,
                        message: format!("not a number: {tok:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::new(rows)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn row(&self, input: usize) -> &Pmf {
        &self.rows[input]
    }

    pub fn rows(&self) -> &[Pmf] {
        &self.rows
    }

    pub fn prob(&self, input: usize, output: usize) -> f64 {
        self.rows[input].get(output)
    }

    /// True when every row is a point mass and no two rows share an output.
    pub fn is_permutation(&self) -> bool {
        if self.input_size() != self.output_size {
            return false;
        }
        let mut seen = vec![false; self.output_size];
        for row in &self.rows {
            let Some(out) = row.probs().iter().position(|&p| p == 1.0) else {
                return false;
            };
            if seen[out] {
                return false;
            }
            seen[out] = true;
        }
        true
    }
}

/// Dense joint distribution over 2 to 4 finite alphabets, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    dims: Vec<usize>,
    table: Vec<f64>,
}

impl JointPmf {
    pub fn new(dims: Vec<usize>, table: Vec<f64>) -> Result<Self> {
        if !(2..=MAX_AXES).contains(&dims.len()) {
            return Err(Error::Axis(format!(
                "joint tables need 2 to {MAX_AXES} axes, got {}",
                dims.len()
            )));
        }
        for &d in &dims {
            if d == 0 {
                return Err(Error::EmptyAlphabet);
            }
            if d > MAX_ALPHABET {
                return Err(Error::AlphabetTooLarge {
                    size: d,
                    cap: MAX_ALPHABET,
                });
            }
        }
        let cells: usize = dims.iter().product();
        if table.len() != cells {
            return Err(Error::DimensionMismatch(format!(
                "table has {} cells, dims {dims:?} need {cells}",
                table.len()
            )));
        }
        Ok(Self {
            dims,
            table: normalize(table)?,
        })
    }

    /// Independent coupling `p(a) p(b)`.
    pub fn product(a: &Pmf, b: &Pmf) -> Self {
        let table = a
            .probs()
            .iter()
            .flat_map(|&pa| b.probs().iter().map(move |&pb| pa * pb))
            .collect();
        Self::new(vec![a.len(), b.len()], table).expect("product of valid pmfs is valid")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims.len());
        index
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = flat % d;
            flat /= d;
        }
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.table[self.flat_index(index)]
    }

    fn check_axes(&self, axes: &[usize]) -> Result<()> {
        for (k, &a) in axes.iter().enumerate() {
            if a >= self.dims.len() {
                return Err(Error::Axis(format!(
                    "axis {a} out of range for {}-d table",
                    self.dims.len()
                )));
            }
            if axes[..k].contains(&a) {
                return Err(Error::Axis(format!("axis {a} repeated")));
            }
        }
        Ok(())
    }

    /// Marginal table over `axes`, kept in the order given.
    fn marginal_table(&self, axes: &[usize]) -> (Vec<usize>, Vec<f64>) {
        let dims: Vec<usize> = axes.iter().map(|&a| self.dims[a]).collect();
        let mut table = vec![0.0; dims.iter().product()];
        let mut index = vec![0; self.dims.len()];
        for (flat, &p) in self.table.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            self.unflatten(flat, &mut index);
            let target = axes
                .iter()
                .zip(&dims)
                .fold(0, |acc, (&a, &d)| acc * d + index[a]);
            table[target] += p;
        }
        (dims, table)
    }

    /// Joint marginal over two or more `axes`, in the order given.
    pub fn marginal(&self, axes: &[usize]) -> Result<JointPmf> {
        self.check_axes(axes)?;
        let (dims, table) = self.marginal_table(axes);
        JointPmf::new(dims, table)
    }

    /// Single-axis marginal.
    pub fn marginal_pmf(&self, axis: usize) -> Result<Pmf> {
        self.check_axes(&[axis])?;
        let (_, table) = self.marginal_table(&[axis]);
        Pmf::new(table)
    }

    /// Joint entropy of the listed axes; the empty set has entropy 0.
    pub fn entropy_of(&self, axes: &[usize]) -> Result<f64> {
        self.check_axes(axes)?;
        if axes.is_empty() {
            return Ok(0.0);
        }
        let (_, table) = self.marginal_table(axes);
        Ok(-table.iter().copied().map(plogp).sum::<f64>())
    }

    /// Adds `delta` to one cell and renormalizes. Used to build negative
    /// controls for the identity checks.
    pub fn with_cell_bumped(&self, index: &[usize], delta: f64) -> Result<JointPmf> {
        if index.len() != self.dims.len() || index.iter().zip(&self.dims).any(|(&i, &d)| i >= d) {
            return Err(Error::Axis(format!("cell {index:?} outside dims {:?}", self.dims)));
        }
        let mut table = self.table.clone();
        table[self.flat_index(index)] += delta;
        let sum: f64 = table.iter().sum();
        table.iter_mut().for_each(|p| *p /= sum);
        JointPmf::new(self.dims.clone(), table)
    }
}

/// `H(p) = -p log p - (1-p) log(1-p)` in bits.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_probability("binary entropy argument", p)?;
    Ok(-plogp(p) - plogp(1.0 - p))
}

/// Shannon entropy in bits.
pub fn entropy(p: &Pmf) -> f64 {
    -p.probs().iter().copied().map(plogp).sum::<f64>()
}

fn check_shared_input(px: &Pmf, pyx: &TransitionMatrix, pux: &TransitionMatrix) -> Result<()> {
    if pyx.input_size() != px.len() || pux.input_size() != px.len() {
        return Err(Error::DimensionMismatch(format!(
            "p(x) has {} symbols but p(y|x) has {} rows and p(u|x) has {} rows",
            px.len(),
            pyx.input_size(),
            pux.input_size()
        )));
    }
    Ok(())
}

/// `p(x, u, y) = p(x) p(y|x) p(u|x)`, axes `(X, U, Y)`.
pub fn build_joint_xuy(px: &Pmf, pyx: &TransitionMatrix, pux: &TransitionMatrix) -> Result<JointPmf> {
    check_shared_input(px, pyx, pux)?;
    let (nu, ny) = (pux.output_size(), pyx.output_size());
    let mut table = Vec::with_capacity(px.len() * nu * ny);
    for x in 0..px.len() {
        for u in 0..nu {
            for y in 0..ny {
                table.push(px.get(x) * pux.prob(x, u) * pyx.prob(x, y));
            }
        }
    }
    JointPmf::new(vec![px.len(), nu, ny], table)
}

/// `p(u, y) = Σ_x p(x) p(y|x) p(u|x)`, axes `(U, Y)`.
pub fn build_joint_uy(px: &Pmf, pyx: &TransitionMatrix, pux: &TransitionMatrix) -> Result<JointPmf> {
    check_shared_input(px, pyx, pux)?;
    let (nu, ny) = (pux.output_size(), pyx.output_size());
    let mut table = vec![0.0; nu * ny];
    for x in 0..px.len() {
        let weight = px.get(x);
        if weight == 0.0 {
            continue;
        }
        for u in 0..nu {
            let wu = weight * pux.prob(x, u);
            for y in 0..ny {
                table[u * ny + y] += wu * pyx.prob(x, y);
            }
        }
    }
    JointPmf::new(vec![nu, ny], table)
}

/// Exact joint of `(X, U, Y, V)` for the binary symmetric model
/// `Y = X ⊕ Z1`, `U = X ⊕ Z2`, `V = X ⊕ Z1 ⊕ Z2` with independent
/// `Z1 ~ Bern(p1)` and `Z2 ~ Bern(p2)`. Axes follow [`AXIS_X`] .. [`AXIS_V`].
pub fn build_joint_xuyv(px: &Pmf, p1: f64, p2: f64) -> Result<JointPmf> {
    check_probability("p1", p1)?;
    check_probability("p2", p2)?;
    if px.len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "binary model needs a binary p(x), got {} symbols",
            px.len()
        )));
    }
    let bern = |p: f64, z: usize| if z == 1 { p } else { 1.0 - p };
    let mut table = vec![0.0; 16];
    for x in 0..2 {
        for z1 in 0..2 {
            for z2 in 0..2 {
                let (u, y, v) = (x ^ z2, x ^ z1, x ^ z1 ^ z2);
                table[((x * 2 + u) * 2 + y) * 2 + v] += px.get(x) * bern(p1, z1) * bern(p2, z2);
            }
        }
    }
    JointPmf::new(vec![2, 2, 2, 2], table)
}

/// `I(A; B)` of a 2-d joint, in bits.
pub fn mutual_information(j: &JointPmf) -> Result<f64> {
    if j.ndim() != 2 {
        return Err(Error::Axis(format!(
            "mutual information needs a 2-d joint, got {} axes",
            j.ndim()
        )));
    }
    let (na, nb) = (j.dims()[0], j.dims()[1]);
    let table = j.table();
    let mut pa = vec![0.0; na];
    let mut pb = vec![0.0; nb];
    for a in 0..na {
        for b in 0..nb {
            let p = table[a * nb + b];
            pa[a] += p;
            pb[b] += p;
        }
    }
    let mut info = 0.0;
    for a in 0..na {
        for b in 0..nb {
            let p = table[a * nb + b];
            if p > 0.0 {
                info += p * (p / (pa[a] * pb[b])).log2();
            }
        }
    }
    Ok(info.max(0.0))
}

fn check_disjoint(j: &JointPmf, first: &[usize], second: &[usize]) -> Result<()> {
    j.check_axes(first)?;
    j.check_axes(second)?;
    if let Some(a) = first.iter().find(|a| second.contains(a)) {
        return Err(Error::Axis(format!("axis {a} appears on both sides")));
    }
    Ok(())
}

/// `H(target | given) = H(target, given) - H(given)`.
pub fn conditional_entropy(j: &JointPmf, target: &[usize], given: &[usize]) -> Result<f64> {
    check_disjoint(j, target, given)?;
    let both: Vec<usize> = target.iter().chain(given).copied().collect();
    Ok(j.entropy_of(&both)? - j.entropy_of(given)?)
}

/// `I(A; B | C) = H(A, C) + H(B, C) - H(A, B, C) - H(C)` for axis sets.
pub fn conditional_mutual_information(
    j: &JointPmf,
    a: &[usize],
    b: &[usize],
    given: &[usize],
) -> Result<f64> {
    check_disjoint(j, a, b)?;
    check_disjoint(j, a, given)?;
    check_disjoint(j, b, given)?;
    let join = |xs: &[&[usize]]| xs.concat();
    Ok(j.entropy_of(&join(&[a, given]))? + j.entropy_of(&join(&[b, given]))?
        - j.entropy_of(&join(&[a, b, given]))?
        - j.entropy_of(given)?)
}

/// Largest deviation from `p(a, c | b) = p(a | b) p(c | b)` on a 3-d joint
/// `(a, b, c)`. Conditioning values `b` with zero mass are skipped.
pub fn check_markov(j: &JointPmf) -> Result<f64> {
    if j.ndim() != 3 {
        return Err(Error::Axis(format!(
            "Markov check needs a 3-d joint, got {} axes",
            j.ndim()
        )));
    }
    let (na, nb, nc) = (j.dims()[0], j.dims()[1], j.dims()[2]);
    let mut worst: f64 = 0.0;
    for b in 0..nb {
        let pb: f64 = (0..na)
            .flat_map(|a| (0..nc).map(move |c| (a, c)))
            .map(|(a, c)| j.get(&[a, b, c]))
            .sum();
        if pb <= 0.0 {
            continue;
        }
        let pa_b: Vec<f64> = (0..na)
            .map(|a| (0..nc).map(|c| j.get(&[a, b, c])).sum::<f64>() / pb)
            .collect();
        let pc_b: Vec<f64> = (0..nc)
            .map(|c| (0..na).map(|a| j.get(&[a, b, c])).sum::<f64>() / pb)
            .collect();
        for (a, &pa) in pa_b.iter().enumerate() {
            for (c, &pc) in pc_b.iter().enumerate() {
                worst = worst.max((j.get(&[a, b, c]) / pb - pa * pc).abs());
            }
        }
    }
    Ok(worst)
}

/// Induced single-letter channel `p(b | a)` of a 2-d joint `(a, b)`.
///
/// Rows for zero-probability `a` are uniform; they never influence a score
/// because such symbols never occur.
pub fn conditional_channel(j: &JointPmf) -> Result<TransitionMatrix> {
    if j.ndim() != 2 {
        return Err(Error::Axis(format!(
            "conditional channel needs a 2-d joint, got {} axes",
            j.ndim()
        )));
    }
    let (na, nb) = (j.dims()[0], j.dims()[1]);
    let rows = (0..na)
        .map(|a| {
            let row = &j.table()[a * nb..(a + 1) * nb];
            let pa: f64 = row.iter().sum();
            if pa > 0.0 {
                row.iter().map(|p| p / pa).collect()
            } else {
                vec![1.0 / nb as f64; nb]
            }
        })
        .collect();
    TransitionMatrix::new(rows)
}
