//! Entropy of a chain versus entropy of its driving mappings.
//!
//! All entropies are in nats.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::chain::{classify, stationary, Classification, Distribution, StochasticMatrix};
use crate::coloring::{build_support_graph, find_synchronizing_coloring, is_synchronizing};
use crate::error::{Error, Result};
use crate::law::{mix, quantile_coupling, synchronizing_mapping_law, MappingLaw, RealizeConfig};
use crate::mapping::MappingTable;
use crate::rational::{self, Rational};

/// `φ(t) = -t ln t`, with `φ(0) = 0`.
pub fn phi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        -t * t.ln()
    }
}

/// `h(Y) = Σ_x λ(x) Σ_y φ(q[x][y])`.
pub fn chain_entropy(q: &StochasticMatrix, lambda: &Distribution) -> f64 {
    let lam = lambda.to_f64();
    q.to_f64()
        .iter()
        .zip(&lam)
        .map(|(row, l)| l * row.iter().copied().map(phi).sum::<f64>())
        .sum()
}

/// `h(N) = Σ_σ φ(μ(σ))`.
pub fn law_entropy(law: &MappingLaw) -> f64 {
    law.iter().map(|(_, w)| phi(rational::to_f64(w))).sum()
}

/// `ν` and permutations `τ_x` with `q[x][y] = ν(τ_x(y))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PUniformWitness {
    /// Row 1 of the chain.
    pub nu: Distribution,
    /// `tau[x][y] = τ_x(y)`, 0-based.
    pub tau: Vec<Vec<usize>>,
}

impl PUniformWitness {
    pub fn holds_for(&self, q: &StochasticMatrix) -> bool {
        let m = q.size();
        self.tau.len() == m
            && self.tau.iter().all(|t| {
                let mut sorted = t.clone();
                sorted.sort_unstable();
                sorted == (0..m).collect::<Vec<_>>()
            })
            && (0..m).all(|x| (0..m).all(|y| q.get(x, y) == self.nu.get(self.tau[x][y])))
    }
}

/// Whether all rows are rearrangements of row 1.
///
/// `τ_x` pairs the entries of row `x` and row 1 after sorting both by
/// `(value, index)`.
pub fn is_p_uniform(q: &StochasticMatrix) -> Option<PUniformWitness> {
    let m = q.size();
    let sorted_row = |x: usize| {
        let mut idx: Vec<usize> = (0..m).collect();
        idx.sort_by(|&a, &b| q.get(x, a).cmp(q.get(x, b)).then(a.cmp(&b)));
        idx
    };
    let reference = sorted_row(0);
    let mut tau = vec![vec![0usize; m]; m];
    for (x, tau_x) in tau.iter_mut().enumerate() {
        let order = sorted_row(x);
        for (&y, &z) in order.iter().zip(&reference) {
            if q.get(x, y) != q.get(0, z) {
                return None;
            }
            tau_x[y] = z;
        }
    }
    let nu = Distribution::new(q.row(0).to_vec()).expect("rows are distributions");
    Some(PUniformWitness { nu, tau })
}

/// One member `μ(n)` of the entropy-approximating family of a p-uniform chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyMember {
    pub law: MappingLaw,
    pub n: u64,
    /// Least `n` for which every weight is non-negative.
    pub n_min: u64,
    /// `σ(i)` with `σ(i) x = τ_x^{-1}(x_i)`, one per atom `x_i` of `ν`.
    pub letters: Vec<MappingTable>,
    /// Color set of the synchronizing road coloring mixed in at weight `1/n`.
    pub synchronizing_colors: Vec<MappingTable>,
}

/// Parts of the family that do not depend on `n`: each map's weight is
/// `base + slope / n`.
struct FamilyShape {
    letters: Vec<MappingTable>,
    synchronizing_colors: Vec<MappingTable>,
    terms: Vec<(MappingTable, Rational, Rational)>,
    n_min: u64,
}

fn family_shape(q: &StochasticMatrix, config: &RealizeConfig) -> Result<FamilyShape> {
    let class = classify(q);
    if class != Classification::Mixing {
        return Err(Error::NotMixing(class));
    }
    let witness = is_p_uniform(q).ok_or(Error::NotPUniform)?;
    let m = q.size();
    let atoms: Vec<usize> = (0..m)
        .filter(|&z| witness.nu.get(z).is_positive())
        .collect();
    let d = atoms.len();

    let inverse: Vec<Vec<usize>> = witness
        .tau
        .iter()
        .map(|t| {
            let mut inv = vec![0; m];
            for (y, &z) in t.iter().enumerate() {
                inv[z] = y;
            }
            inv
        })
        .collect();
    let letters: Vec<MappingTable> = atoms
        .iter()
        .map(|&z| MappingTable::new((0..m).map(|x| inverse[x][z]).collect()).expect("states"))
        .collect();

    let graph = build_support_graph(q, config.tiebreak)?;
    let coloring = find_synchronizing_coloring(&graph, &config.search)?;
    let sync: Vec<MappingTable> = coloring.coloring.color_set().into_iter().collect();

    let d_rat = Rational::from_integer(BigInt::from(d));
    let sync_share = Rational::from_integer(BigInt::from(sync.len())).recip();
    let mut maps: BTreeSet<MappingTable> = letters.iter().cloned().collect();
    maps.extend(sync.iter().cloned());
    let terms: Vec<(MappingTable, Rational, Rational)> = maps
        .into_iter()
        .map(|sigma| {
            let mut base = Rational::zero();
            let mut slope = Rational::zero();
            for (letter, &z) in letters.iter().zip(&atoms) {
                if letter == &sigma {
                    base += witness.nu.get(z);
                    slope -= d_rat.recip();
                }
            }
            if sync.contains(&sigma) {
                slope += &sync_share;
            }
            (sigma, base, slope)
        })
        .collect();

    let mut n_min = BigInt::one();
    for (_, base, slope) in &terms {
        if slope.is_negative() {
            // base + slope / n >= 0  <=>  n >= -slope / base
            let bound = (-slope / base).ceil().to_integer();
            n_min = n_min.max(bound);
        }
    }
    Ok(FamilyShape {
        letters,
        synchronizing_colors: sync,
        terms,
        n_min: n_min
            .to_u64()
            .ok_or_else(|| Error::OutOfRange("least family index exceeds u64".into()))?,
    })
}

/// Least admissible `n` for [`entropy_family`].
pub fn family_min_n(q: &StochasticMatrix, config: &RealizeConfig) -> Result<u64> {
    Ok(family_shape(q, config)?.n_min)
}

/// `μ(n)(σ) = Σ_{i: σ(i) = σ} (ν(x_i) - 1/(n d)) + 1{σ ∈ Σ1} / (n |Σ1|)`.
///
/// `x_1 < ... < x_d` are the atoms of `ν` and `Σ1` is the color set of a
/// synchronizing road coloring of the support graph. Each member is a
/// mapping law for `q` with synchronizing support, and its entropy tends to
/// `h(Y)` as `n` grows.
pub fn entropy_family(
    q: &StochasticMatrix,
    n: u64,
    config: &RealizeConfig,
) -> Result<FamilyMember> {
    let shape = family_shape(q, config)?;
    if n < shape.n_min {
        return Err(Error::FamilyIndexTooSmall {
            n,
            n_min: shape.n_min,
        });
    }
    let n_rat = Rational::from_integer(BigInt::from(n));
    let law = MappingLaw::new(
        shape
            .terms
            .iter()
            .map(|(sigma, base, slope)| (sigma.clone(), base + slope / &n_rat)),
    )?;
    Ok(FamilyMember {
        law,
        n,
        n_min: shape.n_min,
        letters: shape.letters,
        synchronizing_colors: shape.synchronizing_colors,
    })
}

/// A member of the two-state family `μ(11) = μ(22) = ε`, `μ(12) = p - ε`,
/// `μ(21) = 1 - p - ε`, where `(ij)` maps 1 to `i` and 2 to `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStateMember {
    pub law: MappingLaw,
    pub h_chain: f64,
    pub h_law: f64,
    pub synchronizing: bool,
}

/// The chain `((p, 1-p), (1-p, p))`.
pub fn two_state_chain(p: &Rational) -> Result<StochasticMatrix> {
    if !p.is_positive() || p >= &Rational::one() {
        return Err(Error::OutOfRange(format!(
            "p = {} not in (0, 1)",
            rational::format(p)
        )));
    }
    let r = Rational::one() - p;
    StochasticMatrix::new(vec![vec![p.clone(), r.clone()], vec![r, p.clone()]])
}

pub fn two_state_family(p: &Rational, eps: &Rational) -> Result<TwoStateMember> {
    let q = two_state_chain(p)?;
    let r = Rational::one() - p;
    if eps.is_negative() || eps > p || eps > &r {
        return Err(Error::OutOfRange(format!(
            "ε = {} not in [0, min(p, 1 - p)]",
            rational::format(eps)
        )));
    }
    let map = |img: [usize; 2]| MappingTable::new(img.to_vec()).expect("two states");
    let law = MappingLaw::new([
        (map([0, 0]), eps.clone()),
        (map([1, 1]), eps.clone()),
        (map([0, 1]), p - eps),
        (map([1, 0]), &r - eps),
    ])?;
    let lambda = stationary(&q)?;
    Ok(TwoStateMember {
        h_chain: chain_entropy(&q, &lambda),
        h_law: law_entropy(&law),
        synchronizing: law.has_synchronizing_support(),
        law,
    })
}

/// Smallest entropy gap found over synchronizing mapping laws for `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapFloor {
    pub floor: f64,
    pub h_chain: f64,
    /// The law attaining `floor`.
    pub law: MappingLaw,
    /// Number of candidate laws evaluated.
    pub evaluated: usize,
}

/// Grid search for `inf h(N) - h(Y)` over mapping laws with synchronizing
/// support, for chains with at most three states.
///
/// Two states: mapping laws form the segment `μ(11) = t`, `μ(12) = a - t`,
/// `μ(21) = b - t`, `μ(22) = 1 - a - b + t` (with `a = q[1][1]`,
/// `b = q[2][1]`), scanned at spacing at most `grid`.
///
/// Three states: `h(N)` is concave in `μ`, so the search evaluates the
/// vertices produced by quantile couplings under every ordering of every
/// row; a vertex without synchronizing support is replaced by its mixture
/// with a synchronizing law at weight `grid`.
pub fn entropy_gap_floor(
    q: &StochasticMatrix,
    grid: f64,
    config: &RealizeConfig,
) -> Result<GapFloor> {
    let m = q.size();
    if m > 3 {
        return Err(Error::OutOfRange(format!(
            "gap floor search supports at most 3 states, got {m}"
        )));
    }
    if !(grid > 0.0 && grid <= 1.0) {
        return Err(Error::OutOfRange(format!(
            "grid spacing {grid} not in (0, 1]"
        )));
    }
    let class = classify(q);
    if class != Classification::Mixing {
        return Err(Error::NotMixing(class));
    }
    let h_chain = chain_entropy(q, &stationary(q)?);
    let candidates = match m {
        1 => vec![MappingLaw::point_mass(MappingTable::identity(1))],
        2 => two_state_segment(q, grid)?,
        _ => three_state_vertices(q, grid, config)?,
    };
    let evaluated = candidates.len();
    let (floor, law) = candidates
        .into_iter()
        .filter(|law| is_synchronizing(&law.support()))
        .map(|law| (law_entropy(&law) - h_chain, law))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .ok_or(Error::NotSynchronizing)?;
    Ok(GapFloor {
        floor,
        h_chain,
        law,
        evaluated,
    })
}

fn two_state_segment(q: &StochasticMatrix, grid: f64) -> Result<Vec<MappingLaw>> {
    let a = q.get(0, 0).clone();
    let b = q.get(1, 0).clone();
    let zero = Rational::zero();
    let lo = (&a + &b - Rational::one()).max(zero);
    let hi = a.clone().min(b.clone());
    let steps = (rational::to_f64(&(&hi - &lo)) / grid).ceil().max(1.0) as u64;
    let width = (&hi - &lo) / Rational::from_integer(BigInt::from(steps));
    let map = |img: [usize; 2]| MappingTable::new(img.to_vec()).expect("two states");
    (0..=steps)
        .map(|k| {
            let t = &lo + &width * Rational::from_integer(BigInt::from(k));
            MappingLaw::new([
                (map([0, 0]), t.clone()),
                (map([0, 1]), &a - &t),
                (map([1, 0]), &b - &t),
                (map([1, 1]), Rational::one() - &a - &b + &t),
            ])
        })
        .collect()
}

fn three_state_vertices(
    q: &StochasticMatrix,
    grid: f64,
    config: &RealizeConfig,
) -> Result<Vec<MappingLaw>> {
    let m = q.size();
    let perms = permutations(m);
    let reference = synchronizing_mapping_law(q, config)?.law;
    let inverse = (1.0 / grid).round().max(1.0) as i64;
    let nudge = Rational::new(BigInt::one(), BigInt::from(inverse));
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut index = vec![0usize; m];
    loop {
        let orders: Vec<Vec<usize>> = index.iter().map(|&i| perms[i].clone()).collect();
        let vertex = quantile_coupling(q, &orders);
        let key: Vec<(MappingTable, Rational)> =
            vertex.iter().map(|(s, w)| (s.clone(), w.clone())).collect();
        if seen.insert(key) {
            if is_synchronizing(&vertex.support()) {
                out.push(vertex);
            } else {
                out.push(mix(&vertex, &reference, &nudge)?);
            }
        }
        // odometer over the orderings of each row
        let mut x = m;
        loop {
            if x == 0 {
                return Ok(out);
            }
            x -= 1;
            index[x] += 1;
            if index[x] < perms.len() {
                break;
            }
            index[x] = 0;
        }
    }
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(m - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, m - 1);
            out.push(q);
        }
    }
    out
}

/// Machine-readable entropy summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    #[serde(rename = "hY")]
    pub h_chain: f64,
    #[serde(rename = "hN")]
    pub h_law: f64,
    pub gap: f64,
    pub p_uniform: bool,
    pub n_min: Option<u64>,
    #[serde(skip)]
    pub witness: Option<PUniformWitness>,
}

impl EntropyReport {
    /// Compares `law` against the chain it realizes.
    pub fn for_law(q: &StochasticMatrix, law: &MappingLaw, config: &RealizeConfig) -> Result<Self> {
        let h_chain = chain_entropy(q, &stationary(q)?);
        let h_law = law_entropy(law);
        let witness = is_p_uniform(q);
        let n_min = match &witness {
            Some(_) if classify(q) == Classification::Mixing => Some(family_min_n(q, config)?),
            _ => None,
        };
        Ok(Self {
            h_chain,
            h_law,
            gap: h_law - h_chain,
            p_uniform: witness.is_some(),
            n_min,
            witness,
        })
    }
}

/// `1 / n` as a rational; `n = 0` is treated as 1.
pub fn reciprocal(n: u64) -> Rational {
    Rational::new(BigInt::one(), BigInt::from(n).max(BigInt::one()))
}
