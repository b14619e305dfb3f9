//! Exact-rational stochastic matrices and their basic analysis.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// The finite state space `{0, .., m-1}` (shown to users as `1..=m`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateSpace {
    size: usize,
}

impl StateSpace {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidMatrix("state space must be non-empty".into()));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn states(&self) -> std::ops::Range<usize> {
        0..self.size
    }
}

/// Row-stochastic matrix with exact rational entries; `rows[x][y]` is the
/// probability of moving from `x` to `y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StochasticMatrix {
    rows: Vec<Vec<Rational>>,
}

impl StochasticMatrix {
    /// Checks squareness, non-negativity and exact unit row sums.
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let m = rows.len();
        StateSpace::new(m)?;
        for (x, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::InvalidMatrix(format!(
                    "row {} has {} entries, expected {m}",
                    x + 1,
                    row.len()
                )));
            }
            if let Some(y) = row.iter().position(|q| q.is_negative()) {
                return Err(Error::InvalidMatrix(format!(
                    "negative entry at ({}, {})",
                    x + 1,
                    y + 1
                )));
            }
            let sum: Rational = row.iter().sum();
            if !sum.is_one() {
                return Err(Error::InvalidMatrix(format!(
                    "row {} sums to {}, not 1",
                    x + 1,
                    rational::format(&sum)
                )));
            }
        }
        Ok(Self { rows })
    }

    pub fn from_ratios(rows: &[&[(i64, i64)]]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&(n, d)| rational::ratio(n, d)).collect())
                .collect(),
        )
    }

    pub fn identity(m: usize) -> Result<Self> {
        StateSpace::new(m)?;
        Ok(Self {
            rows: (0..m)
                .map(|x| {
                    (0..m)
                        .map(|y| {
                            if x == y {
                                Rational::one()
                            } else {
                                Rational::zero()
                            }
                        })
                        .collect()
                })
                .collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn state_space(&self) -> StateSpace {
        StateSpace { size: self.size() }
    }

    pub fn get(&self, x: usize, y: usize) -> &Rational {
        &self.rows[x][y]
    }

    pub fn row(&self, x: usize) -> &[Rational] {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn entries(&self) -> impl Iterator<Item = &Rational> {
        self.rows.iter().flatten()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(rational::to_f64).collect())
            .collect()
    }

    pub fn support(&self) -> SupportSet {
        support(self)
    }

    /// Boolean support matrix, `b[x][y] = q[x][y] > 0`.
    pub fn support_pattern(&self) -> BoolMatrix {
        BoolMatrix(
            self.rows
                .iter()
                .map(|r| r.iter().map(|q| q.is_positive()).collect())
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        let m = self.size();
        let rows = (0..m)
            .map(|x| {
                (0..m)
                    .map(|y| {
                        (0..m)
                            .filter(|&k| !self.rows[x][k].is_zero() && !other.rows[k][y].is_zero())
                            .map(|k| &self.rows[x][k] * &other.rows[k][y])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }
}

/// Dense boolean matrix used for reachability questions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolMatrix(pub Vec<Vec<bool>>);

impl BoolMatrix {
    pub fn size(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let m = self.size();
        BoolMatrix(
            (0..m)
                .map(|x| {
                    (0..m)
                        .map(|y| (0..m).any(|k| self.0[x][k] && other.0[k][y]))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn all_true(&self) -> bool {
        self.0.iter().flatten().all(|&b| b)
    }

    /// Smallest `r <= m^2 - 2m + 2` with every entry of the `r`-th power set.
    pub fn primitivity_exponent(&self) -> Option<usize> {
        let bound = wielandt_bound(self.size());
        let mut power = self.clone();
        for r in 1..=bound {
            if power.all_true() {
                return Some(r);
            }
            power = power.mul(self);
        }
        None
    }

    /// `closure[x][y]` iff `y` is reachable from `x` by a path of length >= 1.
    #[allow(clippy::needless_range_loop)]
    pub fn transitive_closure(&self) -> Self {
        let m = self.size();
        let mut c = self.0.clone();
        for k in 0..m {
            for x in 0..m {
                if c[x][k] {
                    for y in 0..m {
                        if c[k][y] {
                            c[x][y] = true;
                        }
                    }
                }
            }
        }
        BoolMatrix(c)
    }
}

/// `m^2 - 2m + 2`: a primitive `m x m` pattern has a positive power at or below this index.
pub fn wielandt_bound(m: usize) -> usize {
    (m * m + 2).saturating_sub(2 * m).max(1)
}

/// Positive-entry pairs of a stochastic matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSet {
    size: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl SupportSet {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.edges.contains(&(x, y))
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Number of positive entries in row `x`.
    pub fn outdegree(&self, x: usize) -> usize {
        self.edges.range((x, 0)..(x + 1, 0)).count()
    }

    pub fn size(&self) -> usize {
        self.size
    }
}

/// Probability weights over `0..len`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Distribution {
    weights: Vec<Rational>,
}

impl Distribution {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::InvalidDistribution("negative weight".into()));
        }
        let sum: Rational = weights.iter().sum();
        if !sum.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {}",
                rational::format(&sum)
            )));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.weights[i]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.weights.iter().map(rational::to_f64).collect()
    }

    /// Row vector times matrix.
    pub fn step(&self, q: &StochasticMatrix) -> Vec<Rational> {
        let m = q.size();
        (0..m)
            .map(|y| (0..m).map(|x| &self.weights[x] * q.get(x, y)).sum())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Mixing,
    IrreduciblePeriodic,
    Reducible,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Mixing => "mixing",
            Self::IrreduciblePeriodic => "irreducible-periodic",
            Self::Reducible => "reducible",
        })
    }
}

pub fn classify(q: &StochasticMatrix) -> Classification {
    classify_pattern(&q.support_pattern())
}

pub(crate) fn classify_pattern(pattern: &BoolMatrix) -> Classification {
    if pattern.primitivity_exponent().is_some() {
        return Classification::Mixing;
    }
    if pattern.transitive_closure().all_true() {
        Classification::IrreduciblePeriodic
    } else {
        Classification::Reducible
    }
}

pub fn support(q: &StochasticMatrix) -> SupportSet {
    let edges = q
        .rows
        .iter()
        .enumerate()
        .flat_map(|(x, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, v)| v.is_positive())
                .map(move |(y, _)| (x, y))
        })
        .collect();
    SupportSet {
        size: q.size(),
        edges,
    }
}

/// `n`-th matrix power by repeated squaring; `power(q, 0)` is the identity.
pub fn power(q: &StochasticMatrix, n: u32) -> StochasticMatrix {
    let mut result = StochasticMatrix::identity(q.size()).expect("non-empty");
    let mut base = q.clone();
    let mut n = n;
    while n > 0 {
        if n & 1 == 1 {
            result = result.mul(&base);
        }
        n >>= 1;
        if n > 0 {
            base = base.mul(&base);
        }
    }
    result
}

/// Solves `lambda Q = lambda`, `sum lambda = 1` exactly.
///
/// The solution is unique exactly when the chain has a single closed class,
/// which covers every irreducible chain and also chains with transient states
/// such as a constant map.
pub fn stationary(q: &StochasticMatrix) -> Result<Distribution> {
    let m = q.size();
    // (m + 1) x (m + 1) augmented system: columns of (Q^T - I), then the ones row.
    let mut sys: Vec<Vec<Rational>> = (0..m)
        .map(|y| {
            let mut eq: Vec<Rational> = (0..m)
                .map(|x| {
                    let mut v = q.get(x, y).clone();
                    if x == y {
                        v -= Rational::one();
                    }
                    v
                })
                .collect();
            eq.push(Rational::zero());
            eq
        })
        .collect();
    let mut norm = vec![Rational::one(); m];
    norm.push(Rational::one());
    sys.push(norm);

    let solution = solve_unique(sys, m).ok_or(Error::NoUniqueStationaryLaw)?;
    Distribution::new(solution)
}

/// Gauss-Jordan elimination on an augmented system with `unknowns` columns.
/// Returns `None` unless the solution exists and is unique.
fn solve_unique(mut sys: Vec<Vec<Rational>>, unknowns: usize) -> Option<Vec<Rational>> {
    let rows = sys.len();
    let mut pivot_row = 0;
    for col in 0..unknowns {
        let found = (pivot_row..rows).find(|&r| !sys[r][col].is_zero())?;
        sys.swap(pivot_row, found);
        let inv = sys[pivot_row][col].recip();
        for v in sys[pivot_row].iter_mut() {
            *v *= &inv;
        }
        let pivot = sys[pivot_row].clone();
        for (r, row) in sys.iter_mut().enumerate() {
            if r != pivot_row && !row[col].is_zero() {
                let factor = row[col].clone();
                for (v, p) in row.iter_mut().zip(&pivot) {
                    *v -= &factor * p;
                }
            }
        }
        pivot_row += 1;
    }
    // leftover rows must be consistent (0 = 0)
    if sys[pivot_row..].iter().any(|r| !r[unknowns].is_zero()) {
        return None;
    }
    Some(
        sys[..unknowns]
            .iter()
            .map(|r| r[unknowns].clone())
            .collect(),
    )
}

/// Default denominator bound for [`rationalize`].
pub const DEFAULT_MAX_DEN: u64 = 1_000_000;

/// Converts a float matrix into an exactly row-stochastic rational matrix
/// with the same zero pattern.
///
/// Each entry is replaced by its best rational approximation with
/// denominator at most `max_den`. Exact zeros stay zero and positive entries
/// never round below `1 / max_den`. Each row is then repaired by moving the
/// residual onto its largest entry (first one on ties).
pub fn rationalize(matrix: &[Vec<f64>], max_den: u64) -> Result<StochasticMatrix> {
    const ROW_SUM_TOLERANCE: f64 = 1e-6;
    let m = matrix.len();
    if m == 0 {
        return Err(Error::Rationalize("empty matrix".into()));
    }
    if (max_den as u128) < m as u128 {
        return Err(Error::OutOfRange(format!(
            "max_den {max_den} is below the state count {m}"
        )));
    }
    let floor = rational::ratio(1, max_den as i64);
    let mut rows = Vec::with_capacity(m);
    for (x, row) in matrix.iter().enumerate() {
        if row.len() != m {
            return Err(Error::Rationalize(format!(
                "row {} has {} entries, expected {m}",
                x + 1,
                row.len()
            )));
        }
        if let Some(y) = row.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Rationalize(format!(
                "entry ({}, {}) is negative or not finite",
                x + 1,
                y + 1
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(Error::Rationalize(format!("row {} sums to {sum}", x + 1)));
        }
        let mut out = Vec::with_capacity(m);
        for &v in row {
            if v == 0.0 {
                out.push(Rational::zero());
            } else {
                let r = rational::best_approximation(v, max_den)?;
                out.push(if r < floor { floor.clone() } else { r });
            }
        }
        let largest = (0..m)
            .max_by(|&a, &b| out[a].cmp(&out[b]).then(b.cmp(&a)))
            .expect("non-empty row");
        let residual = Rational::one() - out.iter().sum::<Rational>();
        out[largest] += residual;
        if !out[largest].is_positive() {
            return Err(Error::Rationalize(format!(
                "row {} cannot be repaired at max_den {max_den}",
                x + 1
            )));
        }
        rows.push(out);
    }
    StochasticMatrix::new(rows)
}
