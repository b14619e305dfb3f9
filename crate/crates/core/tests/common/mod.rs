//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use mapwalk_core::rational::{ratio, Rational};
use mapwalk_core::{MappingLaw, MappingTable, StochasticMatrix};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sigma(img: &[usize]) -> MappingTable {
    MappingTable::from_one_based(img).unwrap()
}

pub fn cyclic_three() -> StochasticMatrix {
    StochasticMatrix::from_ratios(&[
        &[(0, 1), (2, 3), (1, 3)],
        &[(1, 3), (0, 1), (2, 3)],
        &[(2, 3), (1, 3), (0, 1)],
    ])
    .unwrap()
}

pub fn mu_one() -> MappingLaw {
    MappingLaw::new([
        (sigma(&[3, 3, 1]), ratio(1, 3)),
        (sigma(&[2, 1, 2]), ratio(1, 3)),
        (sigma(&[2, 3, 1]), ratio(1, 3)),
    ])
    .unwrap()
}

pub fn mu_two() -> MappingLaw {
    MappingLaw::new([
        (sigma(&[2, 3, 1]), ratio(2, 3)),
        (sigma(&[3, 1, 2]), ratio(1, 3)),
    ])
    .unwrap()
}

pub fn two_state(p: Rational) -> StochasticMatrix {
    let r = Rational::one() - &p;
    StochasticMatrix::new(vec![vec![p.clone(), r.clone()], vec![r, p]]).unwrap()
}

/// Shortest word sending all of `V` to one state, by breadth-first search
/// over subsets. Letters are returned in the order they act.
pub fn subset_reset_word(colors: &[MappingTable]) -> Option<Vec<usize>> {
    let m = colors[0].size();
    let full: u32 = (1u32 << m) - 1;
    let mut prev: Vec<Option<(u32, usize)>> = vec![None; 1 << m];
    let mut seen = vec![false; 1 << m];
    seen[full as usize] = true;
    let mut queue = VecDeque::from([full]);
    while let Some(set) = queue.pop_front() {
        if set.count_ones() == 1 {
            let mut word = Vec::new();
            let mut cur = set;
            while let Some((p, c)) = prev[cur as usize] {
                word.push(c);
                cur = p;
            }
            word.reverse();
            return Some(word);
        }
        for (c, sigma) in colors.iter().enumerate() {
            let next = (0..m)
                .filter(|&x| set >> x & 1 == 1)
                .fold(0u32, |acc, x| acc | 1 << sigma.apply(x));
            if !seen[next as usize] {
                seen[next as usize] = true;
                prev[next as usize] = Some((set, c));
                queue.push_back(next);
            }
        }
    }
    None
}

pub fn subset_synchronizing(colors: &[MappingTable]) -> bool {
    subset_reset_word(colors).is_some()
}

/// Mixing iff the support digraph is strongly connected and the gcd of its
/// cycle lengths is 1 (computed from breadth-first levels).
pub fn brute_mixing(pattern: &[Vec<bool>]) -> (bool, bool) {
    let m = pattern.len();
    let reach = |from: usize, forward: bool| {
        let mut seen = vec![false; m];
        seen[from] = true;
        let mut stack = vec![from];
        while let Some(x) = stack.pop() {
            for y in 0..m {
                let edge = if forward {
                    pattern[x][y]
                } else {
                    pattern[y][x]
                };
                if edge && !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    let irreducible = reach(0, true) && reach(0, false);
    if !irreducible {
        return (false, false);
    }
    let mut level = vec![usize::MAX; m];
    level[0] = 0;
    let mut queue = VecDeque::from([0]);
    while let Some(x) = queue.pop_front() {
        for y in 0..m {
            if pattern[x][y] && level[y] == usize::MAX {
                level[y] = level[x] + 1;
                queue.push_back(y);
            }
        }
    }
    let mut g = 0usize;
    for x in 0..m {
        for y in 0..m {
            if pattern[x][y] {
                let diff = (level[x] + 1).abs_diff(level[y]);
                g = gcd(g, diff);
            }
        }
    }
    (true, g == 1)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn pattern(q: &StochasticMatrix) -> Vec<Vec<bool>> {
    q.rows()
        .iter()
        .map(|r| r.iter().map(|v| !v.is_zero()).collect())
        .collect()
}

/// Stationary law of an irreducible chain by the Markov chain tree theorem:
/// `λ(r)` is proportional to the total weight of spanning trees directed
/// towards `r`.
pub fn tree_stationary(q: &StochasticMatrix) -> Vec<Rational> {
    let m = q.size();
    let mut weights = vec![Rational::zero(); m];
    for (root, w) in weights.iter_mut().enumerate() {
        let others: Vec<usize> = (0..m).filter(|&x| x != root).collect();
        let mut parent = vec![0usize; others.len()];
        'trees: loop {
            let acyclic = (0..others.len()).all(|i| {
                let mut cur = i;
                for _ in 0..m {
                    let p = parent[cur];
                    if p == root {
                        return true;
                    }
                    cur = others.iter().position(|&o| o == p).unwrap();
                }
                false
            });
            if acyclic {
                let mut prod = Rational::one();
                for (i, &x) in others.iter().enumerate() {
                    prod *= q.get(x, parent[i]);
                }
                *w += prod;
            }
            for digit in parent.iter_mut() {
                *digit += 1;
                if *digit < m {
                    continue 'trees;
                }
                *digit = 0;
            }
            break;
        }
    }
    let total: Rational = weights.iter().sum();
    weights.into_iter().map(|w| w / &total).collect()
}

/// `Σ_σ μ(σ) 1{σ x = y}` accumulated independently of the library.
pub fn marginal(law: &MappingLaw) -> Vec<Vec<Rational>> {
    let m = law.size();
    let mut rows = vec![vec![Rational::zero(); m]; m];
    for (sigma, w) in law.iter() {
        for (x, row) in rows.iter_mut().enumerate() {
            row[sigma.apply(x)] += w;
        }
    }
    rows
}

/// Random stochastic matrix with `m` states and row denominators at most
/// `max_den`, roughly `density` of entries positive.
pub fn random_matrix(r: &mut impl Rng, m: usize, max_den: i64, density: f64) -> StochasticMatrix {
    let rows = (0..m)
        .map(|_| {
            let den = r.random_range(1..=max_den);
            let mut cells: Vec<usize> = (0..m).filter(|_| r.random_bool(density)).collect();
            if cells.is_empty() {
                cells.push(r.random_range(0..m));
            }
            let mut counts = vec![0i64; m];
            for _ in 0..den {
                counts[cells[r.random_range(0..cells.len())]] += 1;
            }
            counts.into_iter().map(|c| ratio(c, den)).collect()
        })
        .collect();
    StochasticMatrix::new(rows).unwrap()
}

/// Denominator 1 only allows 0/1 rows, which are never mixing for `m > 1`,
/// so `max_den` is raised to 2 there.
pub fn random_mixing_matrix(r: &mut impl Rng, m: usize, max_den: i64) -> StochasticMatrix {
    let max_den = if m > 1 { max_den.max(2) } else { max_den };
    loop {
        let density = r.random_range(0.3..1.0);
        let q = random_matrix(r, m, max_den, density);
        if brute_mixing(&pattern(&q)) == (true, true) {
            return q;
        }
    }
}

pub fn random_map(r: &mut impl Rng, m: usize) -> MappingTable {
    MappingTable::new((0..m).map(|_| r.random_range(0..m)).collect()).unwrap()
}

/// Random law on `k` distinct random maps with weights over denominator `den`.
pub fn random_law(r: &mut impl Rng, m: usize, k: usize, den: i64) -> MappingLaw {
    let mut maps = BTreeSet::new();
    while maps.len() < k {
        maps.insert(random_map(r, m));
    }
    let maps: Vec<MappingTable> = maps.into_iter().collect();
    let mut counts = vec![1i64; k];
    for _ in k as i64..den {
        counts[r.random_range(0..k)] += 1;
    }
    let den = counts.iter().sum::<i64>();
    MappingLaw::new(
        maps.into_iter()
            .zip(counts)
            .map(|(s, c)| (s, ratio(c, den))),
    )
    .unwrap()
}

pub fn random_synchronizing_law(r: &mut impl Rng, m: usize) -> MappingLaw {
    loop {
        let k = r.random_range(1..=4usize.min(m.pow(m as u32)));
        let law = random_law(r, m, k, 24);
        if subset_synchronizing(&law.support()) {
            return law;
        }
    }
}

pub fn phi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        -t * t.ln()
    }
}
