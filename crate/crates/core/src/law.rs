//! Mapping laws: probability laws on self-maps whose one-step marginal is a
//! given transition matrix.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::chain::{classify, Classification, StochasticMatrix};
use crate::coloring::{
    build_support_graph, find_synchronizing_coloring, is_synchronizing, synchronizing_word,
    AdjacencyMatrix, RoadColoring, SearchConfig, SearchPhase, TieBreak,
};
use crate::error::{Error, Result};
use crate::mapping::{MappingTable, Word};
use crate::rational::{self, Rational};

/// Probability law on maps `V -> V` with exact weights.
///
/// Only maps with positive weight are stored, in lexicographic order of their
/// image vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MappingLaw {
    size: usize,
    weights: BTreeMap<MappingTable, Rational>,
}

impl MappingLaw {
    /// Repeated maps have their weights added; zero weights are dropped.
    pub fn new(entries: impl IntoIterator<Item = (MappingTable, Rational)>) -> Result<Self> {
        let mut weights: BTreeMap<MappingTable, Rational> = BTreeMap::new();
        let mut size = None;
        for (sigma, w) in entries {
            if w.is_negative() {
                return Err(Error::InvalidDistribution(format!(
                    "negative weight on {sigma}"
                )));
            }
            match size {
                None => size = Some(sigma.size()),
                Some(m) if m != sigma.size() => {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: sigma.size(),
                    })
                }
                _ => {}
            }
            *weights.entry(sigma).or_insert_with(Rational::zero) += w;
        }
        weights.retain(|_, w| w.is_positive());
        let total: Rational = weights.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidDistribution(format!(
                "mapping law weights sum to {}",
                rational::format(&total)
            )));
        }
        Ok(Self {
            size: size.expect("positive total implies an entry"),
            weights,
        })
    }

    pub fn point_mass(sigma: MappingTable) -> Self {
        let size = sigma.size();
        Self {
            size,
            weights: BTreeMap::from([(sigma, Rational::one())]),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weight(&self, sigma: &MappingTable) -> Rational {
        self.weights
            .get(sigma)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// `(σ, μ(σ))` in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&MappingTable, &Rational)> {
        self.weights.iter()
    }

    pub fn support(&self) -> Vec<MappingTable> {
        self.weights.keys().cloned().collect()
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn has_synchronizing_support(&self) -> bool {
        is_synchronizing(&self.support())
    }

    /// `q[x][y] = Σ_{σ x = y} μ(σ)`.
    pub fn induced_matrix(&self) -> StochasticMatrix {
        let m = self.size;
        let mut rows = vec![vec![Rational::zero(); m]; m];
        for (sigma, w) in &self.weights {
            for (x, row) in rows.iter_mut().enumerate() {
                row[sigma.apply(x)] += w;
            }
        }
        StochasticMatrix::new(rows).expect("marginals of a probability law are stochastic")
    }
}

/// Exact check of `q[x][y] = Σ_{σ: σx = y} μ(σ)` for every pair.
pub fn verify_mapping_law(law: &MappingLaw, q: &StochasticMatrix) -> bool {
    law.size() == q.size() && &law.induced_matrix() == q
}

/// `μ(σ) = #{i : σ(i) = σ} / d`.
pub fn law_from_coloring(coloring: &RoadColoring) -> MappingLaw {
    let d = Rational::from_integer(BigInt::from(coloring.degree()));
    MappingLaw::new(coloring.colors().iter().map(|c| (c.clone(), d.recip())))
        .expect("uniform over colors")
}

/// Smallest `d` with `d q[x][y]` integral for all entries.
pub fn common_denominator(q: &StochasticMatrix) -> BigInt {
    rational::lcm_denominators(q.entries())
}

/// The `d`-out graph `A(y, x) = d q[x][y]` with `d` the common denominator.
pub fn rational_graph(q: &StochasticMatrix) -> Result<AdjacencyMatrix> {
    let d = Rational::from_integer(common_denominator(q));
    let m = q.size();
    let entries = (0..m)
        .map(|y| {
            (0..m)
                .map(|x| {
                    let v = (q.get(x, y) * &d).to_integer();
                    u64::try_from(v)
                        .map_err(|_| Error::OutOfRange("common denominator exceeds u64".into()))
                })
                .collect::<Result<Vec<u64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    AdjacencyMatrix::new(entries)
}

/// Mapping law for a rational matrix through a road coloring of its
/// common-denominator graph.
///
/// The coloring is the canonical one (edge `i` of every vertex, in ascending
/// target order, gets color `i`). Its law is computed from the breakpoints of
/// the cumulative row sums, so the `d` colors are never materialized; the
/// result equals `law_from_coloring(canonical_coloring(rational_graph(q)))`.
pub fn rational_mapping_law(q: &StochasticMatrix) -> MappingLaw {
    let m = q.size();
    let ascending: Vec<Vec<usize>> = vec![(0..m).collect(); m];
    quantile_coupling(q, &ascending)
}

/// Couples the rows of `q` through one uniform variable: row `x` lays its
/// entries on `[0, 1)` in the order `orders[x]`, and each piece of the common
/// refinement becomes one map with weight equal to its length.
pub fn quantile_coupling(q: &StochasticMatrix, orders: &[Vec<usize>]) -> MappingLaw {
    let m = q.size();
    assert_eq!(orders.len(), m, "one order per row");
    // bounds[x][k] = total mass of the first k states in row x's order
    let bounds: Vec<Vec<Rational>> = orders
        .iter()
        .enumerate()
        .map(|(x, order)| {
            let mut acc = Rational::zero();
            let mut out = Vec::with_capacity(m + 1);
            out.push(acc.clone());
            for &y in order {
                acc += q.get(x, y);
                out.push(acc.clone());
            }
            out
        })
        .collect();
    let mut breakpoints: Vec<Rational> = bounds.iter().flatten().cloned().collect();
    breakpoints.sort();
    breakpoints.dedup();

    let mut entries = Vec::new();
    for pair in breakpoints.windows(2) {
        let (lo, hi) = (&pair[0], &pair[1]);
        let image = (0..m)
            .map(|x| {
                let k = (0..m)
                    .find(|&k| &bounds[x][k] <= lo && lo < &bounds[x][k + 1])
                    .expect("rows sum to one");
                orders[x][k]
            })
            .collect();
        entries.push((MappingTable::new(image).expect("states"), hi - lo));
    }
    MappingLaw::new(entries).expect("breakpoint intervals cover [0, 1)")
}

/// Convex combination `(1 - t) μ1 + t μ2`.
pub fn mix(first: &MappingLaw, second: &MappingLaw, t: &Rational) -> Result<MappingLaw> {
    if t.is_negative() || t > &Rational::one() {
        return Err(Error::OutOfRange(format!(
            "mixing weight {} not in [0, 1]",
            rational::format(t)
        )));
    }
    if first.size() != second.size() {
        return Err(Error::DimensionMismatch {
            expected: first.size(),
            found: second.size(),
        });
    }
    let s = Rational::one() - t;
    MappingLaw::new(
        first
            .iter()
            .map(|(sigma, w)| (sigma.clone(), w * &s))
            .chain(second.iter().map(|(sigma, w)| (sigma.clone(), w * t))),
    )
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RealizeConfig {
    pub tiebreak: TieBreak,
    pub search: SearchConfig,
}

/// Output of [`synchronizing_mapping_law`] with its intermediate objects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Realization {
    pub law: MappingLaw,
    /// Support graph of the chain (edges exactly where `q > 0`).
    pub support_graph: AdjacencyMatrix,
    /// Synchronizing road coloring of the support graph.
    pub coloring: RoadColoring,
    pub coloring_phase: SearchPhase,
    /// Law induced by `coloring` and its marginal.
    pub coloring_law: MappingLaw,
    pub coloring_matrix: StochasticMatrix,
    /// Smallest positive entry of the chain.
    pub epsilon: Rational,
    /// `(Q - ε Q̂) / (1 - ε)`, absent when the coloring law already realizes `Q`.
    pub residual: Option<StochasticMatrix>,
    /// Reset word over the support of `law`.
    pub certificate: Word,
}

/// Mapping law for a mixing chain whose support is synchronizing.
///
/// Builds the support graph, finds a synchronizing road coloring of it with
/// law `μ̂` and marginal `Q̂`, takes `ε` as the smallest positive entry of `Q`,
/// realizes `(Q - ε Q̂) / (1 - ε)` with [`rational_mapping_law`], and returns
/// the mixture with `μ̂` at weight `ε`. When `Q = Q̂` (in particular `ε = 1`)
/// `μ̂` itself is returned.
pub fn synchronizing_mapping_law(
    q: &StochasticMatrix,
    config: &RealizeConfig,
) -> Result<Realization> {
    let class = classify(q);
    if class != Classification::Mixing {
        return Err(Error::NotMixing(class));
    }
    let support_graph = build_support_graph(q, config.tiebreak)?;
    let search = find_synchronizing_coloring(&support_graph, &config.search)?;
    let coloring_law = law_from_coloring(&search.coloring);
    let coloring_matrix = coloring_law.induced_matrix();
    let epsilon = q
        .entries()
        .filter(|v| v.is_positive())
        .min()
        .cloned()
        .expect("stochastic rows have a positive entry");

    let (law, residual) = if &coloring_matrix == q {
        (coloring_law.clone(), None)
    } else {
        let scale = (Rational::one() - &epsilon).recip();
        let m = q.size();
        let rows = (0..m)
            .map(|x| {
                (0..m)
                    .map(|y| (q.get(x, y) - &epsilon * coloring_matrix.get(x, y)) * &scale)
                    .collect()
            })
            .collect();
        let residual = StochasticMatrix::new(rows)?;
        let residual_law = rational_mapping_law(&residual);
        (mix(&residual_law, &coloring_law, &epsilon)?, Some(residual))
    };
    debug_assert!(verify_mapping_law(&law, q));
    let certificate = synchronizing_word(&law.support())?;
    Ok(Realization {
        law,
        support_graph,
        coloring: search.coloring,
        coloring_phase: search.phase,
        coloring_law,
        coloring_matrix,
        epsilon,
        residual,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coloring::canonical_coloring;
    use crate::mapping::compose;
    use crate::rational::ratio;

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

    fn mu_one() -> MappingLaw {
        MappingLaw::new([
            (sigma(&[3, 3, 1]), ratio(1, 3)),
            (sigma(&[2, 1, 2]), ratio(1, 3)),
            (sigma(&[2, 3, 1]), ratio(1, 3)),
        ])
        .unwrap()
    }

    fn mu_two() -> MappingLaw {
        MappingLaw::new([
            (sigma(&[2, 3, 1]), ratio(2, 3)),
            (sigma(&[3, 1, 2]), ratio(1, 3)),
        ])
        .unwrap()
    }

    fn two_state(p: Rational) -> StochasticMatrix {
        let r = Rational::one() - &p;
        StochasticMatrix::new(vec![vec![p.clone(), r.clone()], vec![r, p]]).unwrap()
    }

    #[test]
    fn example_laws_verify() {
        let q = cyclic_three();
        assert!(verify_mapping_law(&mu_one(), &q));
        assert!(verify_mapping_law(&mu_two(), &q));
        let id = StochasticMatrix::identity(3).unwrap();
        assert!(verify_mapping_law(
            &MappingLaw::point_mass(MappingTable::identity(3)),
            &id
        ));
        assert!(!verify_mapping_law(&mu_two(), &id));
    }

    #[test]
    fn law_validation() {
        assert!(MappingLaw::new([(sigma(&[1, 2]), ratio(1, 2))]).is_err());
        assert!(MappingLaw::new([
            (sigma(&[1, 2]), ratio(3, 2)),
            (sigma(&[2, 1]), ratio(-1, 2))
        ])
        .is_err());
        assert!(
            MappingLaw::new([(sigma(&[1, 2]), ratio(1, 2)), (sigma(&[1]), ratio(1, 2))]).is_err()
        );
        let merged = MappingLaw::new([
            (sigma(&[1, 2]), ratio(1, 2)),
            (sigma(&[1, 2]), ratio(1, 2)),
            (sigma(&[2, 1]), ratio(0, 1)),
        ])
        .unwrap();
        assert_eq!(merged.support_len(), 1);
    }

    #[test]
    fn coloring_laws() {
        let c = RoadColoring::new(vec![sigma(&[3, 3, 1]), sigma(&[2, 1, 2])]).unwrap();
        let law = law_from_coloring(&c);
        assert_eq!(law.weight(&sigma(&[3, 3, 1])), ratio(1, 2));
        assert_eq!(law.weight(&sigma(&[2, 1, 2])), ratio(1, 2));
        let a = c.adjacency();
        let q_hat = law.induced_matrix();
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(q_hat.get(x, y), &ratio(a.get(y, x) as i64, 2));
            }
        }

        let k = MappingTable::constant(3, 1);
        let repeated = RoadColoring::new(vec![k.clone(), k.clone()]).unwrap();
        assert_eq!(law_from_coloring(&repeated), MappingLaw::point_mass(k));

        let three = RoadColoring::new(vec![
            sigma(&[3, 3, 1]),
            sigma(&[2, 1, 2]),
            sigma(&[2, 3, 1]),
        ])
        .unwrap();
        assert_eq!(law_from_coloring(&three), mu_one());
    }

    #[test]
    fn rational_law_matches_materialized_coloring() {
        let q = cyclic_three();
        let a = rational_graph(&q).unwrap();
        assert_eq!(a.outdegree(), 3);
        let direct = rational_mapping_law(&q);
        assert_eq!(direct, law_from_coloring(&canonical_coloring(&a)));
        assert!(verify_mapping_law(&direct, &q));
        assert!(direct.support_len() <= 3);

        let odd = StochasticMatrix::from_ratios(&[
            &[(1, 4), (1, 6), (7, 12)],
            &[(0, 1), (5, 6), (1, 6)],
            &[(1, 2), (1, 2), (0, 1)],
        ])
        .unwrap();
        let a = rational_graph(&odd).unwrap();
        assert_eq!(a.outdegree(), 12);
        assert_eq!(
            rational_mapping_law(&odd),
            law_from_coloring(&canonical_coloring(&a))
        );
    }

    #[test]
    fn rational_law_of_permutation_is_point_mass() {
        let perm = StochasticMatrix::from_ratios(&[
            &[(0, 1), (1, 1), (0, 1)],
            &[(0, 1), (0, 1), (1, 1)],
            &[(1, 1), (0, 1), (0, 1)],
        ])
        .unwrap();
        assert_eq!(
            rational_mapping_law(&perm),
            MappingLaw::point_mass(sigma(&[2, 3, 1]))
        );
    }

    #[test]
    fn mixing_laws() {
        let (a, b) = (mu_one(), mu_two());
        assert_eq!(mix(&a, &b, &ratio(0, 1)).unwrap(), a);
        assert_eq!(mix(&a, &b, &ratio(1, 1)).unwrap(), b);
        let half = mix(&a, &b, &ratio(1, 2)).unwrap();
        assert_eq!(half.support_len(), 4);
        assert!(verify_mapping_law(&half, &cyclic_three()));
        assert!(mix(&a, &b, &ratio(3, 2)).is_err());
        assert!(mix(&a, &b, &ratio(-1, 2)).is_err());
    }

    #[test]
    fn cyclic_three_pipeline() {
        let q = cyclic_three();
        let r = synchronizing_mapping_law(&q, &RealizeConfig::default()).unwrap();
        assert!(verify_mapping_law(&r.law, &q));
        assert!(r.law.has_synchronizing_support());
        assert_eq!(r.epsilon, ratio(1, 3));
        assert!(compose(&r.certificate, 3).is_constant());
    }

    #[test]
    fn two_state_pipeline_lands_in_family() {
        let q = two_state(ratio(7, 10));
        let r = synchronizing_mapping_law(&q, &RealizeConfig::default()).unwrap();
        assert!(verify_mapping_law(&r.law, &q));
        let eps = r.law.weight(&sigma(&[1, 1]));
        assert!(eps.is_positive());
        assert_eq!(r.law.weight(&sigma(&[2, 2])), eps);
        assert_eq!(r.law.weight(&sigma(&[1, 2])), ratio(7, 10) - &eps);
        assert_eq!(r.law.weight(&sigma(&[2, 1])), ratio(3, 10) - &eps);
        assert_eq!(eps, ratio(3, 10));
        let residual = r.residual.unwrap();
        assert_eq!(residual.row(0), &[ratio(11, 14), ratio(3, 14)]);
    }

    #[test]
    fn coloring_law_returned_when_it_realizes_the_chain() {
        let one = StochasticMatrix::identity(1).unwrap();
        let r = synchronizing_mapping_law(&one, &RealizeConfig::default()).unwrap();
        assert_eq!(r.epsilon, ratio(1, 1));
        assert_eq!(r.law, r.coloring_law);
        assert!(r.residual.is_none());

        let half = two_state(ratio(1, 2));
        let r = synchronizing_mapping_law(&half, &RealizeConfig::default()).unwrap();
        assert_eq!(r.law, r.coloring_law);
    }

    #[test]
    fn pipeline_rejects_non_mixing() {
        let swap = StochasticMatrix::from_ratios(&[&[(0, 1), (1, 1)], &[(1, 1), (0, 1)]]).unwrap();
        assert_eq!(
            synchronizing_mapping_law(&swap, &RealizeConfig::default()),
            Err(Error::NotMixing(Classification::IrreduciblePeriodic))
        );
        assert_eq!(
            synchronizing_mapping_law(
                &StochasticMatrix::identity(2).unwrap(),
                &RealizeConfig::default()
            ),
            Err(Error::NotMixing(Classification::Reducible))
        );
    }
}
