//! Self-maps of the state space and words over them.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// A total function `V -> V`, stored as its image vector (0-based).
///
/// Ordering is lexicographic on the image vector, which is the canonical
/// order used for mapping-law supports.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MappingTable {
    image: Vec<usize>,
}

impl MappingTable {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let m = image.len();
        if m == 0 {
            return Err(Error::InvalidMapping("empty image vector".into()));
        }
        if let Some(x) = image.iter().position(|&y| y >= m) {
            return Err(Error::InvalidMapping(format!(
                "state {} maps outside 1..={m}",
                x + 1
            )));
        }
        Ok(Self { image })
    }

    /// Builds from 1-based labels as written in files.
    pub fn from_one_based(image: &[usize]) -> Result<Self> {
        if image.contains(&0) {
            return Err(Error::InvalidMapping("labels are 1-based".into()));
        }
        Self::new(image.iter().map(|&y| y - 1).collect())
    }

    pub fn identity(m: usize) -> Self {
        Self {
            image: (0..m).collect(),
        }
    }

    pub fn constant(m: usize, value: usize) -> Self {
        assert!(value < m);
        Self {
            image: vec![value; m],
        }
    }

    pub fn size(&self) -> usize {
        self.image.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.image[x]
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.image.iter().map(|&y| y + 1).collect()
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn after(&self, inner: &MappingTable) -> MappingTable {
        MappingTable {
            image: inner.image.iter().map(|&y| self.image[y]).collect(),
        }
    }

    /// The set `σ V`.
    pub fn range(&self) -> BTreeSet<usize> {
        self.image.iter().copied().collect()
    }

    pub fn rank(&self) -> usize {
        self.range().len()
    }

    pub fn is_constant(&self) -> bool {
        self.image.iter().all(|&y| y == self.image[0])
    }

    pub fn is_permutation(&self) -> bool {
        self.rank() == self.size()
    }

    /// `σ(y, x)` of the 1-out adjacency matrix: 1 iff `y = σ x`.
    pub fn adjacency(&self, y: usize, x: usize) -> u64 {
        u64::from(self.image[x] == y)
    }
}

impl fmt::Display for MappingTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, y) in self.image.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", y + 1)?;
        }
        write!(f, ")")
    }
}

pub fn apply(sigma: &MappingTable, x: usize) -> usize {
    sigma.apply(x)
}

/// A word `s = (σ_p, ..., σ_1)`.
///
/// Letters are stored in written order, so the last letter acts first and
/// `⟨s⟩ = σ_p ∘ ... ∘ σ_1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    letters: Vec<MappingTable>,
}

impl Word {
    pub fn new(letters: Vec<MappingTable>) -> Self {
        Self { letters }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn letters(&self) -> &[MappingTable] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Letters in the order they act on a state.
    pub fn application_order(&self) -> impl Iterator<Item = &MappingTable> {
        self.letters.iter().rev()
    }

    /// `u · self`: the letters of `outer` act after this word.
    pub fn then(&self, outer: &Word) -> Word {
        let mut letters = outer.letters.clone();
        letters.extend(self.letters.iter().cloned());
        Word { letters }
    }
}

/// `⟨s⟩`; the empty word composes to the identity on `m` states.
pub fn compose(word: &Word, m: usize) -> MappingTable {
    word.application_order()
        .fold(MappingTable::identity(m), |acc, sigma| sigma.after(&acc))
}

/// Image of a subset under a map.
pub fn image_of(sigma: &MappingTable, set: &BTreeSet<usize>) -> BTreeSet<usize> {
    set.iter().map(|&x| sigma.apply(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma(img: &[usize]) -> MappingTable {
        MappingTable::from_one_based(img).unwrap()
    }

    #[test]
    fn example_word_collapses_to_three() {
        let s1 = sigma(&[3, 3, 1]);
        let s2 = sigma(&[2, 1, 2]);
        let w = Word::new(vec![s1, s2]);
        assert_eq!(compose(&w, 3), MappingTable::constant(3, 2));
    }

    #[test]
    fn empty_word_is_identity() {
        assert_eq!(compose(&Word::empty(), 4), MappingTable::identity(4));
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(MappingTable::new(vec![0, 2]).is_err());
        assert!(MappingTable::from_one_based(&[0, 1]).is_err());
        assert!(MappingTable::new(vec![]).is_err());
    }

    #[test]
    fn adjacency_view() {
        let s = sigma(&[2, 3, 1]);
        assert_eq!(s.adjacency(1, 0), 1);
        assert_eq!(s.adjacency(0, 0), 0);
        let col_sums: Vec<u64> = (0..3)
            .map(|x| (0..3).map(|y| s.adjacency(y, x)).sum())
            .collect();
        assert_eq!(col_sums, vec![1, 1, 1]);
        assert!(s.is_permutation());
        assert_eq!(s.to_string(), "(2 3 1)");
    }
}
