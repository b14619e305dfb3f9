//! Constant-outdegree graphs, road colorings and synchronization.
//!
//! Adjacency matrices follow the column-as-source convention: `A(y, x)` is
//! the number of edges from `x` to `y`, so a 1-out matrix is exactly a
//! [`MappingTable`].

use std::collections::{BTreeSet, VecDeque};

use num_traits::{Signed, ToPrimitive};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{wielandt_bound, BoolMatrix, StochasticMatrix};
use crate::error::{Error, Result};
use crate::mapping::{compose, MappingTable, Word};

/// Adjacency matrix of a `d`-out multigraph; `A(y, x)` counts edges `x -> y`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdjacencyMatrix {
    entries: Vec<Vec<u64>>,
    outdegree: u64,
}

impl AdjacencyMatrix {
    /// `entries[y][x]`; every column must sum to the same positive `d`.
    pub fn new(entries: Vec<Vec<u64>>) -> Result<Self> {
        let m = entries.len();
        if m == 0 {
            return Err(Error::InvalidMatrix("empty adjacency matrix".into()));
        }
        if entries.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidMatrix(
                "adjacency matrix is not square".into(),
            ));
        }
        let sums = column_sums(&entries);
        let d = sums[0];
        if d == 0 {
            return Err(Error::InvalidMatrix("vertex 1 has no outgoing edge".into()));
        }
        if let Some(x) = sums.iter().position(|&s| s != d) {
            return Err(Error::InvalidMatrix(format!(
                "vertex {} has outdegree {}, vertex 1 has {d}",
                x + 1,
                sums[x]
            )));
        }
        Ok(Self {
            entries,
            outdegree: d,
        })
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn outdegree(&self) -> u64 {
        self.outdegree
    }

    /// Number of edges from `x` to `y`.
    pub fn get(&self, y: usize, x: usize) -> u64 {
        self.entries[y][x]
    }

    pub fn entries(&self) -> &[Vec<u64>] {
        &self.entries
    }

    /// Targets of the edges leaving `x`, ascending, repeated by multiplicity.
    pub fn targets(&self, x: usize) -> Vec<usize> {
        (0..self.size())
            .flat_map(|y| std::iter::repeat_n(y, self.entries[y][x] as usize))
            .collect()
    }

    /// `pattern[x][y]` iff there is an edge `x -> y`.
    pub fn pattern(&self) -> BoolMatrix {
        pattern_of(&self.entries)
    }
}

fn column_sums(entries: &[Vec<u64>]) -> Vec<u64> {
    let m = entries.len();
    (0..m)
        .map(|x| entries.iter().map(|row| row[x]).sum())
        .collect()
}

fn pattern_of(entries: &[Vec<u64>]) -> BoolMatrix {
    let m = entries.len();
    BoolMatrix(
        (0..m)
            .map(|x| (0..m).map(|y| entries[y][x] >= 1).collect())
            .collect(),
    )
}

/// Choice of the designated edge `σ(x)` that absorbs the surplus weight
/// `d - d(x)` in [`build_support_graph`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Smallest `y` with `q[x][y] > 0`.
    #[default]
    SmallestIndex,
    /// `y` with the largest `q[x][y]`, smallest index among ties.
    LargestProbability,
}

/// Constant-outdegree graph whose edges are exactly the support of `q`.
///
/// With `d(x)` the number of positive entries in row `x` and `d = max d(x)`,
/// the designated edge `x -> σ(x)` gets multiplicity `d - d(x) + 1` and every
/// other support edge gets multiplicity one.
#[allow(clippy::needless_range_loop)]
pub fn build_support_graph(q: &StochasticMatrix, tiebreak: TieBreak) -> Result<AdjacencyMatrix> {
    let m = q.size();
    let support = q.support();
    let d = (0..m).map(|x| support.outdegree(x)).max().unwrap_or(0) as u64;
    let mut entries = vec![vec![0u64; m]; m];
    for x in 0..m {
        let row = q.row(x);
        let positive: Vec<usize> = (0..m).filter(|&y| row[y].is_positive()).collect();
        if positive.is_empty() {
            return Err(Error::ZeroRow { row: x + 1 });
        }
        let designated = match tiebreak {
            TieBreak::SmallestIndex => positive[0],
            TieBreak::LargestProbability => *positive
                .iter()
                .max_by(|&&a, &&b| row[a].cmp(&row[b]).then(b.cmp(&a)))
                .expect("non-empty"),
        };
        let dx = positive.len() as u64;
        for &y in &positive {
            entries[y][x] = if y == designated { d - dx + 1 } else { 1 };
        }
    }
    AdjacencyMatrix::new(entries)
}

/// Outcome of testing assumption (A): constant outdegree, strongly connected
/// and aperiodic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AssumptionCheck {
    /// `A^exponent` has every entry at least one.
    Holds { exponent: usize },
    NotConstantOutdegree {
        vertex: usize,
        degree: u64,
        expected: u64,
    },
    /// No path of length `m^2 - 2m + 2` from `from` to `to` (0-based).
    NotPrimitive { from: usize, to: usize },
}

impl AssumptionCheck {
    pub fn holds(&self) -> bool {
        matches!(self, Self::Holds { .. })
    }

    pub fn exponent(&self) -> Option<usize> {
        match self {
            Self::Holds { exponent } => Some(*exponent),
            _ => None,
        }
    }
}

pub fn check_assumption_a(a: &AdjacencyMatrix) -> AssumptionCheck {
    check_assumption_a_raw(a.entries())
}

/// Same as [`check_assumption_a`] for an unvalidated square matrix.
pub fn check_assumption_a_raw(entries: &[Vec<u64>]) -> AssumptionCheck {
    let sums = column_sums(entries);
    let expected = sums.first().copied().unwrap_or(0);
    if let Some(x) = sums.iter().position(|&s| s != expected || s == 0) {
        return AssumptionCheck::NotConstantOutdegree {
            vertex: x,
            degree: sums[x],
            expected,
        };
    }
    let pattern = pattern_of(entries);
    if let Some(exponent) = pattern.primitivity_exponent() {
        return AssumptionCheck::Holds { exponent };
    }
    let bound = wielandt_bound(pattern.size());
    let mut power = pattern.clone();
    for _ in 1..bound {
        power = power.mul(&pattern);
    }
    let (from, to) = (0..pattern.size())
        .flat_map(|x| (0..pattern.size()).map(move |y| (x, y)))
        .find(|&(x, y)| !power.0[x][y])
        .expect("non-primitive pattern has a zero entry");
    AssumptionCheck::NotPrimitive { from, to }
}

/// An ordered family of maps `(σ(1), ..., σ(d))` summing to a `d`-out matrix.
/// Repeated maps are allowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RoadColoring {
    colors: Vec<MappingTable>,
}

impl RoadColoring {
    pub fn new(colors: Vec<MappingTable>) -> Result<Self> {
        let m = colors.first().map(MappingTable::size).ok_or_else(|| {
            Error::InvalidMapping("a road coloring needs at least one color".into())
        })?;
        if let Some(c) = colors.iter().find(|c| c.size() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: c.size(),
            });
        }
        Ok(Self { colors })
    }

    /// Checks `σ(1) + ... + σ(d) = a` entrywise.
    pub fn for_graph(a: &AdjacencyMatrix, colors: Vec<MappingTable>) -> Result<Self> {
        let coloring = Self::new(colors)?;
        if coloring.size() != a.size() {
            return Err(Error::DimensionMismatch {
                expected: a.size(),
                found: coloring.size(),
            });
        }
        if &coloring.adjacency() != a {
            return Err(Error::InvalidMapping(
                "colors do not sum to the adjacency matrix".into(),
            ));
        }
        Ok(coloring)
    }

    pub fn colors(&self) -> &[MappingTable] {
        &self.colors
    }

    pub fn degree(&self) -> usize {
        self.colors.len()
    }

    pub fn size(&self) -> usize {
        self.colors[0].size()
    }

    /// The induced `d`-out graph.
    pub fn adjacency(&self) -> AdjacencyMatrix {
        let m = self.size();
        let mut entries = vec![vec![0u64; m]; m];
        for sigma in &self.colors {
            for x in 0..m {
                entries[sigma.apply(x)][x] += 1;
            }
        }
        AdjacencyMatrix::new(entries).expect("every color is a total map")
    }

    /// The distinct colors.
    pub fn color_set(&self) -> BTreeSet<MappingTable> {
        self.colors.iter().cloned().collect()
    }

    pub fn is_synchronizing(&self) -> bool {
        is_synchronizing(&self.colors)
    }
}

/// The automaton on unordered pairs `{u, v}`, `u != v`, with one transition
/// per letter. `dist[p]` is the length of a shortest word merging `p`.
struct PairAutomaton<'a> {
    m: usize,
    letters: &'a [MappingTable],
    dist: Vec<Option<usize>>,
    next_letter: Vec<usize>,
}

impl<'a> PairAutomaton<'a> {
    fn index(m: usize, u: usize, v: usize) -> usize {
        let (u, v) = if u < v { (u, v) } else { (v, u) };
        u * m + v
    }

    fn new(letters: &'a [MappingTable]) -> Self {
        let m = letters[0].size();
        let n = m * m;
        let mut dist = vec![None; n];
        let mut next_letter = vec![usize::MAX; n];
        let mut preds: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        let mut queue = VecDeque::new();
        for u in 0..m {
            for v in (u + 1)..m {
                let p = Self::index(m, u, v);
                for (c, sigma) in letters.iter().enumerate() {
                    let (a, b) = (sigma.apply(u), sigma.apply(v));
                    if a == b {
                        if dist[p].is_none() {
                            dist[p] = Some(1);
                            next_letter[p] = c;
                            queue.push_back(p);
                        }
                    } else {
                        preds[Self::index(m, a, b)].push((p, c));
                    }
                }
            }
        }
        while let Some(p) = queue.pop_front() {
            let dp = dist[p].expect("queued pairs have a distance");
            for &(q, c) in &preds[p] {
                if dist[q].is_none() {
                    dist[q] = Some(dp + 1);
                    next_letter[q] = c;
                    queue.push_back(q);
                }
            }
        }
        Self {
            m,
            letters,
            dist,
            next_letter,
        }
    }

    fn all_pairs_mergeable(&self) -> bool {
        (0..self.m)
            .all(|u| ((u + 1)..self.m).all(|v| self.dist[Self::index(self.m, u, v)].is_some()))
    }

    /// Letters (in application order) of a shortest word merging `{u, v}`.
    fn merging_letters(&self, mut u: usize, mut v: usize) -> Option<Vec<usize>> {
        let mut out = Vec::new();
        while u != v {
            let p = Self::index(self.m, u, v);
            self.dist[p]?;
            let c = self.next_letter[p];
            out.push(c);
            u = self.letters[c].apply(u);
            v = self.letters[c].apply(v);
        }
        Some(out)
    }

    /// Greedy reset word: repeatedly merge the closest pair of the current image.
    fn greedy_word(&self, limit: usize) -> Result<Vec<usize>> {
        let mut current: BTreeSet<usize> = (0..self.m).collect();
        let mut applied: Vec<usize> = Vec::new();
        while current.len() > 1 {
            let states: Vec<usize> = current.iter().copied().collect();
            // closest pair first, then the pair whose first letter comes first
            let mut best: Option<((usize, usize), usize, usize)> = None;
            for (i, &u) in states.iter().enumerate() {
                for &v in &states[i + 1..] {
                    let p = Self::index(self.m, u, v);
                    let key = (
                        self.dist[p].ok_or(Error::NotSynchronizing)?,
                        self.next_letter[p],
                    );
                    if best.is_none_or(|(bk, _, _)| key < bk) {
                        best = Some((key, u, v));
                    }
                }
            }
            let (_, u, v) = best.expect("at least two states");
            let letters = self.merging_letters(u, v).ok_or(Error::NotSynchronizing)?;
            for &c in &letters {
                current = current.iter().map(|&x| self.letters[c].apply(x)).collect();
            }
            applied.extend(letters);
            if applied.len() > limit {
                return Err(Error::WordBudget { limit });
            }
        }
        Ok(applied)
    }
}

fn distinct_letters(colors: &[MappingTable]) -> Result<Vec<MappingTable>> {
    let set: BTreeSet<MappingTable> = colors.iter().cloned().collect();
    let letters: Vec<MappingTable> = set.into_iter().collect();
    let m = letters
        .first()
        .map(MappingTable::size)
        .ok_or_else(|| Error::InvalidMapping("empty set of maps".into()))?;
    if let Some(l) = letters.iter().find(|l| l.size() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: l.size(),
        });
    }
    Ok(letters)
}

/// Whether some word over `colors` maps every state to one state.
///
/// Pairwise mergeability is decided on the pair automaton, and the answer is
/// confirmed by building the greedy reset word and evaluating it.
pub fn is_synchronizing(colors: &[MappingTable]) -> bool {
    let Ok(letters) = distinct_letters(colors) else {
        return false;
    };
    let automaton = PairAutomaton::new(&letters);
    if !automaton.all_pairs_mergeable() {
        return false;
    }
    synchronizing_word(&letters).is_ok()
}

/// A reset word over `colors`, verified to have a singleton image.
///
/// The greedy construction is bounded by `m^3` letters.
pub fn synchronizing_word(colors: &[MappingTable]) -> Result<Word> {
    let letters = distinct_letters(colors)?;
    let m = letters[0].size();
    let automaton = PairAutomaton::new(&letters);
    let applied = automaton.greedy_word(m.pow(3))?;
    let word = Word::new(applied.iter().rev().map(|&c| letters[c].clone()).collect());
    if compose(&word, m).is_constant() {
        Ok(word)
    } else {
        Err(Error::NotSynchronizing)
    }
}

/// Colors edge `i` (in ascending target order) at every vertex with color `i`.
pub fn canonical_coloring(a: &AdjacencyMatrix) -> RoadColoring {
    let assignment: Vec<Vec<usize>> = (0..a.size()).map(|x| a.targets(x)).collect();
    coloring_from_assignment(&assignment)
}

/// `assignment[x][c]` is the target of the color-`c` edge leaving `x`.
fn coloring_from_assignment(assignment: &[Vec<usize>]) -> RoadColoring {
    let d = assignment[0].len();
    let colors = (0..d)
        .map(|c| {
            MappingTable::new(assignment.iter().map(|t| t[c]).collect())
                .expect("targets are states")
        })
        .collect();
    RoadColoring::new(colors).expect("non-empty")
}

/// Limits and seed for [`find_synchronizing_coloring`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub random_restarts: u64,
    /// Maximum number of candidate colorings tested over all phases.
    pub budget: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            random_restarts: 64,
            budget: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchPhase {
    Heuristic,
    Random,
    Exhaustive,
}

/// A synchronizing road coloring together with its reset-word certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringSearch {
    pub coloring: RoadColoring,
    pub word: Word,
    pub phase: SearchPhase,
    pub candidates: u64,
}

struct Search<'a> {
    config: &'a SearchConfig,
    tried: u64,
}

impl Search<'_> {
    fn test(&mut self, assignment: &[Vec<usize>]) -> Result<Option<(RoadColoring, Word)>> {
        if self.tried >= self.config.budget {
            return Err(Error::SearchBudget {
                budget: self.config.budget,
            });
        }
        self.tried += 1;
        let coloring = coloring_from_assignment(assignment);
        let letters: Vec<MappingTable> = coloring.color_set().into_iter().collect();
        if !PairAutomaton::new(&letters).all_pairs_mergeable() {
            return Ok(None);
        }
        match synchronizing_word(&letters) {
            Ok(word) => Ok(Some((coloring, word))),
            Err(Error::NotSynchronizing) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// Finds a synchronizing road coloring of a graph satisfying assumption (A).
///
/// Candidates are tried in three phases: deterministic heuristics (the
/// canonical coloring, then for each vertex `r` a coloring whose first color
/// is a shortest-path in-tree to `r` closed by a shortest cycle through `r`),
/// seeded random shuffles of each vertex's edges, and finally exhaustive
/// enumeration with vertex 1's colors fixed. The result is always checked by
/// an explicit reset word.
pub fn find_synchronizing_coloring(
    a: &AdjacencyMatrix,
    config: &SearchConfig,
) -> Result<ColoringSearch> {
    let check = check_assumption_a(a);
    if !check.holds() {
        return Err(Error::AssumptionA(format!("{check:?}")));
    }
    let m = a.size();
    let targets: Vec<Vec<usize>> = (0..m).map(|x| a.targets(x)).collect();
    let mut search = Search { config, tried: 0 };
    let found = |search: &Search, phase, (coloring, word)| ColoringSearch {
        coloring,
        word,
        phase,
        candidates: search.tried,
    };

    if let Some(hit) = search.test(&targets)? {
        return Ok(found(&search, SearchPhase::Heuristic, hit));
    }
    for root in 0..m {
        let assignment = in_tree_assignment(&targets, root);
        if let Some(hit) = search.test(&assignment)? {
            return Ok(found(&search, SearchPhase::Heuristic, hit));
        }
    }

    let exhaustive_size = exhaustive_count(&targets);
    if exhaustive_size > u128::from(config.random_restarts) {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for _ in 0..config.random_restarts {
            let mut assignment = targets.clone();
            for t in assignment.iter_mut() {
                t.shuffle(&mut rng);
            }
            if let Some(hit) = search.test(&assignment)? {
                return Ok(found(&search, SearchPhase::Random, hit));
            }
        }
    }

    // vertex 0 keeps ascending order: relabeling colors does not change the color set
    let mut assignment = targets.clone();
    loop {
        if let Some(hit) = search.test(&assignment)? {
            return Ok(found(&search, SearchPhase::Exhaustive, hit));
        }
        let mut advanced = false;
        for x in (1..m).rev() {
            if next_permutation(&mut assignment[x]) {
                advanced = true;
                break;
            }
        }
        if !advanced {
            // every coloring tested; impossible under assumption (A)
            return Err(Error::AssumptionA(
                "no synchronizing road coloring exists".into(),
            ));
        }
    }
}

/// First color follows shortest paths to `root`; the rest keep ascending order.
fn in_tree_assignment(targets: &[Vec<usize>], root: usize) -> Vec<Vec<usize>> {
    let m = targets.len();
    let mut dist = vec![usize::MAX; m];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(y) = queue.pop_front() {
        for x in 0..m {
            if dist[x] == usize::MAX && targets[x].contains(&y) {
                dist[x] = dist[y] + 1;
                queue.push_back(x);
            }
        }
    }
    targets
        .iter()
        .map(|t| {
            let (pos, _) = t
                .iter()
                .enumerate()
                .min_by_key(|&(_, &y)| (dist[y], y))
                .expect("outdegree is positive");
            let mut row = t.clone();
            let first = row.remove(pos);
            row.insert(0, first);
            row
        })
        .collect()
}

/// Number of distinct colorings with vertex 0 fixed, saturating.
fn exhaustive_count(targets: &[Vec<usize>]) -> u128 {
    targets
        .iter()
        .skip(1)
        .fold(1u128, |acc, t| acc.saturating_mul(multiset_permutations(t)))
}

fn multiset_permutations(items: &[usize]) -> u128 {
    let mut counts = std::collections::BTreeMap::new();
    for &i in items {
        *counts.entry(i).or_insert(0u32) += 1;
    }
    // multinomial coefficient built incrementally to stay exact
    let mut total = 0u32;
    let mut result = num_bigint::BigUint::from(1u32);
    for &k in counts.values() {
        for j in 1..=k {
            total += 1;
            result = result * total / j;
        }
    }
    result.to_u128().unwrap_or(u128::MAX)
}

/// Lexicographic successor; on the last permutation resets to sorted and returns false.
fn next_permutation(items: &mut [usize]) -> bool {
    if items.len() < 2 {
        return false;
    }
    let Some(i) = (0..items.len() - 1)
        .rev()
        .find(|&i| items[i] < items[i + 1])
    else {
        items.sort_unstable();
        return false;
    };
    let j = (i + 1..items.len())
        .rev()
        .find(|&j| items[j] > items[i])
        .expect("exists");
    items.swap(i, j);
    items[i + 1..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma(img: &[usize]) -> MappingTable {
        MappingTable::from_one_based(img).unwrap()
    }

    fn cyclic_three() -> StochasticMatrix {
        StochasticMatrix::from_ratios(&[
            &[(0, 1), (2, 3), (1, 3)],
            &[(1, 3), (0, 1), (2, 3)],
            &[(2, 3), (1, 3), (0, 1)],
        ])
        .unwrap()
    }

    /// Subset construction: is a singleton reachable from the full set?
    fn subset_oracle(colors: &[MappingTable]) -> bool {
        let m = colors[0].size();
        let full: u32 = (1 << m) - 1;
        let mut seen = vec![false; 1 << m];
        let mut queue = VecDeque::from([full]);
        seen[full as usize] = true;
        while let Some(s) = queue.pop_front() {
            if s.count_ones() == 1 {
                return true;
            }
            for c in colors {
                let t = (0..m)
                    .filter(|&x| s >> x & 1 == 1)
                    .fold(0u32, |acc, x| acc | 1 << c.apply(x));
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    queue.push_back(t);
                }
            }
        }
        false
    }

    #[test]
    fn support_graph_of_cyclic_three() {
        let a = build_support_graph(&cyclic_three(), TieBreak::SmallestIndex).unwrap();
        assert_eq!(a.outdegree(), 2);
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(a.get(y, x), u64::from(x != y));
            }
        }
    }

    #[test]
    fn support_graph_surplus_on_designated_edge() {
        // row 1 has one positive entry, row 2 has three
        let q = StochasticMatrix::from_ratios(&[
            &[(0, 1), (1, 1), (0, 1)],
            &[(1, 3), (1, 3), (1, 3)],
            &[(1, 2), (0, 1), (1, 2)],
        ])
        .unwrap();
        let a = build_support_graph(&q, TieBreak::SmallestIndex).unwrap();
        assert_eq!(a.outdegree(), 3);
        assert_eq!(a.targets(0), vec![1, 1, 1]);
        assert_eq!(a.targets(1), vec![0, 1, 2]);
        assert_eq!(a.targets(2), vec![0, 0, 2]);
        let b = build_support_graph(&q, TieBreak::LargestProbability).unwrap();
        assert_eq!(b.targets(2), vec![0, 0, 2]);
    }

    #[test]
    fn support_graph_small_cases() {
        let one = StochasticMatrix::identity(1).unwrap();
        let a = build_support_graph(&one, TieBreak::default()).unwrap();
        assert_eq!(a.entries(), &[vec![1]]);
        let q = StochasticMatrix::from_ratios(&[&[(7, 10), (3, 10)], &[(3, 10), (7, 10)]]).unwrap();
        let a = build_support_graph(&q, TieBreak::default()).unwrap();
        assert_eq!(a.entries(), &[vec![1, 1], vec![1, 1]]);
        assert_eq!(a.outdegree(), 2);
    }

    #[test]
    fn assumption_a_examples() {
        let a = build_support_graph(&cyclic_three(), TieBreak::default()).unwrap();
        assert_eq!(
            check_assumption_a(&a),
            AssumptionCheck::Holds { exponent: 2 }
        );

        let cycle = AdjacencyMatrix::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert!(matches!(
            check_assumption_a(&cycle),
            AssumptionCheck::NotPrimitive { .. }
        ));

        let uneven = vec![vec![1, 1], vec![0, 1]];
        assert!(matches!(
            check_assumption_a_raw(&uneven),
            AssumptionCheck::NotConstantOutdegree { vertex: 1, .. }
        ));

        // graph induced by (σ1, σ2, σ3)
        let fig6 = RoadColoring::new(vec![
            sigma(&[3, 3, 1]),
            sigma(&[2, 1, 2]),
            sigma(&[2, 3, 1]),
        ])
        .unwrap()
        .adjacency();
        assert_eq!(fig6.outdegree(), 3);
        assert!(check_assumption_a(&fig6).holds());
    }

    #[test]
    fn synchronization_examples() {
        let (s1, s2, s3, s4) = (
            sigma(&[3, 3, 1]),
            sigma(&[2, 1, 2]),
            sigma(&[2, 3, 1]),
            sigma(&[3, 1, 2]),
        );
        assert!(is_synchronizing(&[s1.clone(), s2.clone()]));
        assert!(!is_synchronizing(&[s3.clone(), s4.clone()]));
        assert!(is_synchronizing(&[MappingTable::constant(4, 1)]));
        assert!(!is_synchronizing(&[]));

        let w = synchronizing_word(&[s1.clone(), s2.clone()]).unwrap();
        assert_eq!(w, Word::new(vec![s1.clone(), s2.clone()]));
        assert_eq!(compose(&w, 3), MappingTable::constant(3, 2));

        let c = MappingTable::constant(3, 0);
        assert_eq!(
            synchronizing_word(std::slice::from_ref(&c)).unwrap(),
            Word::new(vec![c])
        );
        assert_eq!(synchronizing_word(&[s3, s4]), Err(Error::NotSynchronizing));
    }

    #[test]
    fn single_state_is_trivially_synchronized() {
        let id = MappingTable::identity(1);
        assert!(is_synchronizing(std::slice::from_ref(&id)));
        assert!(synchronizing_word(&[id]).unwrap().is_empty());
    }

    #[test]
    fn agrees_with_subset_oracle_on_all_small_pairs() {
        // every pair of maps on 3 states
        let maps: Vec<MappingTable> = (0..27)
            .map(|k| MappingTable::new(vec![k % 3, k / 3 % 3, k / 9]).unwrap())
            .collect();
        for a in &maps {
            for b in &maps {
                let set = [a.clone(), b.clone()];
                assert_eq!(is_synchronizing(&set), subset_oracle(&set), "{a} {b}");
                if let Ok(w) = synchronizing_word(&set) {
                    assert!(compose(&w, 3).is_constant());
                    assert!(w.len() <= 27);
                }
            }
        }
    }

    #[test]
    fn finds_coloring_for_cyclic_three() {
        let a = build_support_graph(&cyclic_three(), TieBreak::default()).unwrap();
        let result = find_synchronizing_coloring(&a, &SearchConfig::default()).unwrap();
        assert_eq!(result.coloring.adjacency(), a);
        assert!(subset_oracle(result.coloring.colors()));
        assert!(compose(&result.word, 3).is_constant());
        // every coloring of this graph is a per-vertex permutation of (σ1, σ2)
        let reference =
            RoadColoring::for_graph(&a, vec![sigma(&[3, 3, 1]), sigma(&[2, 1, 2])]).unwrap();
        for x in 0..3 {
            let mut got: Vec<usize> = result
                .coloring
                .colors()
                .iter()
                .map(|c| c.apply(x))
                .collect();
            let mut want: Vec<usize> = reference.colors().iter().map(|c| c.apply(x)).collect();
            got.sort();
            want.sort();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn finds_loop_coloring_for_single_vertex() {
        let a = AdjacencyMatrix::new(vec![vec![1]]).unwrap();
        let result = find_synchronizing_coloring(&a, &SearchConfig::default()).unwrap();
        assert_eq!(result.coloring.colors(), &[MappingTable::identity(1)]);
    }

    #[test]
    fn refuses_graphs_without_assumption_a() {
        let cycle = AdjacencyMatrix::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert!(matches!(
            find_synchronizing_coloring(&cycle, &SearchConfig::default()),
            Err(Error::AssumptionA(_))
        ));
    }

    #[test]
    fn reports_budget_exhaustion() {
        // canonical coloring of the complete 2-state graph is the two constants
        let a = AdjacencyMatrix::new(vec![vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(
            canonical_coloring(&a).colors(),
            &[sigma(&[1, 1]), sigma(&[2, 2])]
        );
        let swap_first =
            AdjacencyMatrix::new(vec![vec![0, 2, 1], vec![1, 0, 1], vec![1, 0, 0]]).unwrap();
        let config = SearchConfig {
            budget: 0,
            ..SearchConfig::default()
        };
        assert_eq!(
            find_synchronizing_coloring(&swap_first, &config),
            Err(Error::SearchBudget { budget: 0 })
        );
    }

    #[test]
    fn rejects_colorings_that_do_not_sum_to_graph() {
        let a = AdjacencyMatrix::new(vec![vec![1, 1], vec![1, 1]]).unwrap();
        assert!(RoadColoring::for_graph(&a, vec![sigma(&[1, 1]), sigma(&[1, 2])]).is_err());
        assert!(RoadColoring::for_graph(&a, vec![sigma(&[1, 2]), sigma(&[2, 1])]).is_ok());
    }

    #[test]
    fn permutation_enumeration_counts() {
        let mut items = vec![0, 0, 1, 2];
        let mut n = 1;
        while next_permutation(&mut items) {
            n += 1;
        }
        assert_eq!(n, 12);
        assert_eq!(multiset_permutations(&[0, 0, 1, 2]), 12);
        assert_eq!(items, vec![0, 0, 1, 2]);
    }
}
