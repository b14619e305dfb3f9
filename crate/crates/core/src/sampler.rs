//! Random walks driven by IID mappings and exact stationary sampling by
//! coupling from the past.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::chain::Distribution;
use crate::error::{Error, Result};
use crate::law::MappingLaw;
use crate::mapping::{MappingTable, Word};
use crate::rational::{self, Rational};

/// Deterministic random source identified by `(seed, stream)`.
///
/// Different stream ids of one seed give independent sequences, so samples
/// can be drawn concurrently and merged by stream id.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform integer in `[0, bound)`.
    fn below_u64(&mut self, bound: u64) -> u64 {
        self.rng.random_range(0..bound)
    }

    /// Uniform integer in `[0, bound)` by rejection on random bits.
    fn below_big(&mut self, bound: &BigUint) -> BigUint {
        let bits = bound.bits();
        let words = bits.div_ceil(32) as usize;
        let excess = (words as u64 * 32 - bits) as u32;
        loop {
            let mut digits: Vec<u32> = (0..words).map(|_| self.rng.next_u32()).collect();
            if let Some(top) = digits.last_mut() {
                *top >>= excess;
            }
            let candidate = BigUint::new(digits);
            if &candidate < bound {
                return candidate;
            }
        }
    }
}

enum Thresholds {
    Small {
        cumulative: Vec<u64>,
        total: u64,
    },
    Big {
        cumulative: Vec<BigUint>,
        total: BigUint,
    },
}

/// Inverse-CDF sampler over a law's support in canonical order.
///
/// Weights are scaled to integers over their common denominator, so draws
/// follow the rational weights exactly.
pub struct LawSampler {
    maps: Vec<MappingTable>,
    thresholds: Thresholds,
}

impl LawSampler {
    pub fn new(law: &MappingLaw) -> Self {
        let weights: Vec<&Rational> = law.iter().map(|(_, w)| w).collect();
        let denom = rational::lcm_denominators(weights.iter().copied());
        let scaled: Vec<BigUint> = weights
            .iter()
            .map(|w| {
                (*w * Rational::from_integer(denom.clone()))
                    .to_integer()
                    .to_biguint()
                    .expect("weights are non-negative")
            })
            .collect();
        let mut acc = BigUint::zero();
        let cumulative: Vec<BigUint> = scaled
            .into_iter()
            .map(|s| {
                acc += s;
                acc.clone()
            })
            .collect();
        let total = denom.to_biguint().expect("positive denominator");
        let thresholds = match (
            total.to_u64(),
            cumulative
                .iter()
                .map(|c| c.to_u64())
                .collect::<Option<Vec<_>>>(),
        ) {
            (Some(total), Some(cumulative)) => Thresholds::Small { cumulative, total },
            _ => Thresholds::Big { cumulative, total },
        };
        Self {
            maps: law.support(),
            thresholds,
        }
    }

    pub fn maps(&self) -> &[MappingTable] {
        &self.maps
    }

    /// Index into [`LawSampler::maps`] of a fresh draw.
    pub fn draw_index(&self, rng: &mut RngStream) -> usize {
        match &self.thresholds {
            Thresholds::Small { cumulative, total } => {
                let u = rng.below_u64(*total);
                cumulative.partition_point(|&c| c <= u)
            }
            Thresholds::Big { cumulative, total } => {
                let u = rng.below_big(total);
                cumulative.partition_point(|c| c <= &u)
            }
        }
    }

    pub fn draw(&self, rng: &mut RngStream) -> &MappingTable {
        &self.maps[self.draw_index(rng)]
    }
}

#[inline]
pub fn step(sigma: &MappingTable, x: usize) -> usize {
    sigma.apply(x)
}

/// States `X_0..=X_n` and driving maps `N_1..=N_n` with `X_k = N_k X_{k-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkTrace {
    pub start: usize,
    pub mappings: Vec<MappingTable>,
    pub states: Vec<usize>,
}

impl WalkTrace {
    pub fn satisfies_recursion(&self) -> bool {
        self.states.len() == self.mappings.len() + 1
            && self.states[0] == self.start
            && self
                .mappings
                .iter()
                .enumerate()
                .all(|(k, sigma)| self.states[k + 1] == sigma.apply(self.states[k]))
    }

    /// Visits to each state among `X_1..=X_n`.
    pub fn occupation(&self, m: usize) -> Vec<u64> {
        let mut counts = vec![0u64; m];
        for &x in &self.states[1..] {
            counts[x] += 1;
        }
        counts
    }

    /// Counts of consecutive pairs `(X_{k-1}, X_k)`.
    pub fn transition_counts(&self, m: usize) -> Vec<Vec<u64>> {
        let mut counts = vec![vec![0u64; m]; m];
        for w in self.states.windows(2) {
            counts[w[0]][w[1]] += 1;
        }
        counts
    }
}

pub fn simulate_forward(
    law: &MappingLaw,
    start: usize,
    steps: usize,
    rng: &mut RngStream,
) -> Result<WalkTrace> {
    if start >= law.size() {
        return Err(Error::OutOfRange(format!(
            "start state {} outside 1..={}",
            start + 1,
            law.size()
        )));
    }
    let sampler = LawSampler::new(law);
    let mut states = Vec::with_capacity(steps + 1);
    let mut mappings = Vec::with_capacity(steps);
    let mut x = start;
    states.push(x);
    for _ in 0..steps {
        let sigma = sampler.draw(rng);
        x = step(sigma, x);
        mappings.push(sigma.clone());
        states.push(x);
    }
    Ok(WalkTrace {
        start,
        mappings,
        states,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CftpConfig {
    /// Largest number of backward steps tried before giving up.
    pub depth_cap: usize,
}

impl Default for CftpConfig {
    fn default() -> Self {
        Self {
            depth_cap: 1_000_000,
        }
    }
}

/// One exact stationary draw.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CftpResult {
    /// The sampled state `X_0`.
    pub value: usize,
    /// Least `k` such that `N_0 N_{-1} ... N_{-(k-1)}` is constant.
    pub depth: usize,
    /// `(N_0, N_{-1}, ..., N_{-(depth-1)})`, whose product is constant.
    pub word: Word,
}

/// Draws used by one doubling round, as indices into the sampler's maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CftpRound {
    pub horizon: usize,
    pub draws: Vec<usize>,
}

/// Coupling from the past for a law with synchronizing support.
pub struct CoalescenceSampler {
    sampler: LawSampler,
    size: usize,
    config: CftpConfig,
}

impl CoalescenceSampler {
    /// Rejects laws whose support is not synchronizing.
    pub fn new(law: &MappingLaw, config: CftpConfig) -> Result<Self> {
        if !law.has_synchronizing_support() {
            return Err(Error::NotSynchronizing);
        }
        if config.depth_cap == 0 {
            return Err(Error::OutOfRange("depth cap must be positive".into()));
        }
        Ok(Self {
            sampler: LawSampler::new(law),
            size: law.size(),
            config,
        })
    }

    pub fn sample(&self, rng: &mut RngStream) -> Result<CftpResult> {
        self.run(rng, 0, None)
    }

    /// Evaluates the coalesced map at `start`; the result never depends on it.
    pub fn sample_from(&self, rng: &mut RngStream, start: usize) -> Result<CftpResult> {
        if start >= self.size {
            return Err(Error::OutOfRange(format!(
                "start state {} outside 1..={}",
                start + 1,
                self.size
            )));
        }
        self.run(rng, start, None)
    }

    /// Like [`CoalescenceSampler::sample`], also returning the draws seen by each round.
    pub fn sample_traced(&self, rng: &mut RngStream) -> Result<(CftpResult, Vec<CftpRound>)> {
        let mut rounds = Vec::new();
        let result = self.run(rng, 0, Some(&mut rounds))?;
        Ok((result, rounds))
    }

    /// State and depth only, without building the word.
    fn value_and_depth(&self, rng: &mut RngStream) -> Result<(usize, usize)> {
        let (_, depth, value) = self.coalesce(rng, 0, None)?;
        Ok((value, depth))
    }

    fn run(
        &self,
        rng: &mut RngStream,
        start: usize,
        trace: Option<&mut Vec<CftpRound>>,
    ) -> Result<CftpResult> {
        let (draws, depth, value) = self.coalesce(rng, start, trace)?;
        let maps = self.sampler.maps();
        let word = Word::new(draws[..depth].iter().map(|&i| maps[i].clone()).collect());
        Ok(CftpResult { value, depth, word })
    }

    /// Backward doubling: horizon 1, 2, 4, ... with `draws[j] = N_{-j}` kept
    /// across rounds; only older maps are drawn when the horizon grows.
    fn coalesce(
        &self,
        rng: &mut RngStream,
        start: usize,
        mut trace: Option<&mut Vec<CftpRound>>,
    ) -> Result<(Vec<usize>, usize, usize)> {
        let maps = self.sampler.maps();
        let m = self.size;
        let cap = self.config.depth_cap;
        let mut draws: Vec<usize> = Vec::new();
        let mut horizon = 1usize;
        let mut composed = vec![0usize; m];
        loop {
            while draws.len() < horizon {
                draws.push(self.sampler.draw_index(rng));
            }
            if let Some(rounds) = trace.as_deref_mut() {
                rounds.push(CftpRound {
                    horizon,
                    draws: draws[..horizon].to_vec(),
                });
            }
            // N_0 ∘ N_{-1} ∘ ... ∘ N_{-(horizon-1)}: apply the oldest first
            composed.iter_mut().enumerate().for_each(|(x, c)| *c = x);
            for &i in draws[..horizon].iter().rev() {
                let sigma = &maps[i];
                composed.iter_mut().for_each(|c| *c = sigma.apply(*c));
            }
            if composed.iter().all(|&y| y == composed[0]) {
                let depth = least_depth(maps, &draws[..horizon], m);
                return Ok((draws, depth, composed[start]));
            }
            if horizon >= cap {
                return Err(Error::DepthCap { cap });
            }
            horizon = horizon.saturating_mul(2).min(cap);
        }
    }
}

/// Least `k` with `N_0 ∘ ... ∘ N_{-(k-1)}` constant, given that the full prefix is.
fn least_depth(maps: &[MappingTable], draws: &[usize], m: usize) -> usize {
    // prefix map h_k = h_{k-1} ∘ N_{-(k-1)}, tracked on the image of N_{-(k-1)}
    let mut prefix: Vec<usize> = maps[draws[0]].image().to_vec();
    let mut k = 1;
    loop {
        if prefix.iter().all(|&y| y == prefix[0]) {
            return k;
        }
        let older = &maps[draws[k]];
        prefix = (0..m).map(|x| prefix[older.apply(x)]).collect();
        k += 1;
    }
}

pub fn cftp_sample(
    law: &MappingLaw,
    rng: &mut RngStream,
    config: CftpConfig,
) -> Result<CftpResult> {
    CoalescenceSampler::new(law, config)?.sample(rng)
}

/// `n` independent draws; draw `i` uses stream `i` of `seed`.
pub fn sample_many(
    law: &MappingLaw,
    n: usize,
    seed: u64,
    config: CftpConfig,
) -> Result<Vec<(usize, usize)>> {
    let sampler = CoalescenceSampler::new(law, config)?;
    (0..n)
        .into_par_iter()
        .map(|i| sampler.value_and_depth(&mut RngStream::new(seed, i as u64)))
        .collect()
}

/// Distribution of coalescence depths over independent runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoalescenceSummary {
    pub samples: usize,
    pub mean_depth: f64,
    pub min_depth: usize,
    pub median_depth: usize,
    pub p90_depth: usize,
    pub p99_depth: usize,
    pub max_depth: usize,
    /// Number of draws landing on each state.
    pub counts: Vec<u64>,
}

impl CoalescenceSummary {
    pub fn from_draws(draws: &[(usize, usize)], m: usize) -> Self {
        let mut depths: Vec<usize> = draws.iter().map(|&(_, d)| d).collect();
        depths.sort_unstable();
        let n = depths.len();
        let pick = |q: f64| {
            if n == 0 {
                0
            } else {
                depths[((n - 1) as f64 * q).round() as usize]
            }
        };
        let mut counts = vec![0u64; m];
        for &(x, _) in draws {
            counts[x] += 1;
        }
        Self {
            samples: n,
            mean_depth: if n == 0 {
                0.0
            } else {
                depths.iter().sum::<usize>() as f64 / n as f64
            },
            min_depth: depths.first().copied().unwrap_or(0),
            median_depth: pick(0.5),
            p90_depth: pick(0.9),
            p99_depth: pick(0.99),
            max_depth: depths.last().copied().unwrap_or(0),
            counts,
        }
    }
}

pub fn coalescence_stats(
    law: &MappingLaw,
    n: usize,
    seed: u64,
    config: CftpConfig,
) -> Result<CoalescenceSummary> {
    let draws = sample_many(law, n, seed, config)?;
    Ok(CoalescenceSummary::from_draws(&draws, law.size()))
}

/// Empirical frequencies of `counts`.
pub fn frequencies(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    counts
        .iter()
        .map(|&c| {
            if total == 0 {
                0.0
            } else {
                c as f64 / total as f64
            }
        })
        .collect()
}

/// Total variation distance between empirical counts and an exact law.
pub fn tv_distance(counts: &[u64], law: &Distribution) -> f64 {
    frequencies(counts)
        .iter()
        .zip(law.to_f64())
        .map(|(p, q)| (p - q).abs())
        .sum::<f64>()
        / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Pearson goodness-of-fit of `counts` against `law`.
///
/// Cells with zero probability are dropped; any count on them gives
/// `p_value = 0`.
pub fn chi_square(counts: &[u64], law: &Distribution) -> ChiSquareTest {
    let n: u64 = counts.iter().sum();
    let probs = law.to_f64();
    let mut statistic = 0.0;
    let mut cells = 0usize;
    for (&c, &p) in counts.iter().zip(&probs) {
        if p == 0.0 {
            if c > 0 {
                return ChiSquareTest {
                    statistic: f64::INFINITY,
                    degrees_of_freedom: 0,
                    p_value: 0.0,
                };
            }
            continue;
        }
        let expected = n as f64 * p;
        statistic += (c as f64 - expected).powi(2) / expected;
        cells += 1;
    }
    let dof = cells.saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64)
            .expect("positive dof")
            .sf(statistic)
    };
    ChiSquareTest {
        statistic,
        degrees_of_freedom: dof,
        p_value,
    }
}
