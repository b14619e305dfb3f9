//! JSON file formats. States are 1-based in every file.
//!
//! * matrix: `{"m": 3, "rows": [[0, "2/3", "1/3"], ...]}`; an entry is a
//!   number or an exact `"a/b"` string. If any entry is a non-integer number
//!   the whole matrix goes through [`rationalize`].
//! * graph: `{"m": 3, "A": [[0, 1, 1], ...]}` with `A[y][x]` the number of
//!   edges from `x` to `y` (a column lists the edges leaving one vertex).
//! * coloring: `{"d": 2, "colors": [[3, 3, 1], [2, 1, 2]]}`.
//! * mapping law: `{"m": 3, "support": [{"image": [3, 3, 1], "weight": "1/3"}, ...]}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chain::{rationalize, StochasticMatrix};
use crate::coloring::{AdjacencyMatrix, RoadColoring};
use crate::error::{Error, Result};
use crate::law::MappingLaw;
use crate::mapping::{MappingTable, Word};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(serde_json::Number),
    Exact(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub m: usize,
    pub rows: Vec<Vec<Entry>>,
}

impl MatrixFile {
    pub fn from_matrix(q: &StochasticMatrix) -> Self {
        Self {
            m: q.size(),
            rows: q
                .rows()
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|v| Entry::Exact(rational::format(v)))
                        .collect()
                })
                .collect(),
        }
    }

    /// Exact entries are kept; any fractional number sends the matrix
    /// through [`rationalize`] with denominators at most `max_den`.
    pub fn to_matrix(&self, max_den: u64) -> Result<StochasticMatrix> {
        check_square(self.m, self.rows.iter().map(Vec::len), self.rows.len())?;
        let inexact = self.rows.iter().flatten().any(|e| match e {
            Entry::Number(n) => n.as_i64().is_none(),
            Entry::Exact(_) => false,
        });
        if inexact {
            let floats = self
                .rows
                .iter()
                .map(|row| row.iter().map(entry_f64).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            return rationalize(&floats, max_den);
        }
        let rows = self
            .rows
            .iter()
            .map(|row| row.iter().map(entry_exact).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        StochasticMatrix::new(rows)
    }
}

fn entry_exact(e: &Entry) -> Result<Rational> {
    match e {
        Entry::Number(n) => n
            .as_i64()
            .map(rational::int)
            .ok_or_else(|| Error::Parse(format!("entry {n} is not an integer"))),
        Entry::Exact(s) => rational::parse(s),
    }
}

fn entry_f64(e: &Entry) -> Result<f64> {
    match e {
        Entry::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Parse(format!("entry {n} is not finite"))),
        Entry::Exact(s) => Ok(rational::to_f64(&rational::parse(s)?)),
    }
}

fn check_square(m: usize, lens: impl Iterator<Item = usize>, count: usize) -> Result<()> {
    if count != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: count,
        });
    }
    for len in lens {
        if len != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: len,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub m: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<u64>>,
}

impl GraphFile {
    pub fn from_graph(a: &AdjacencyMatrix) -> Self {
        Self {
            m: a.size(),
            a: a.entries().to_vec(),
        }
    }

    pub fn to_graph(&self) -> Result<AdjacencyMatrix> {
        check_square(self.m, self.a.iter().map(Vec::len), self.a.len())?;
        AdjacencyMatrix::new(self.a.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringFile {
    pub d: usize,
    pub colors: Vec<Vec<usize>>,
}

impl ColoringFile {
    pub fn from_coloring(c: &RoadColoring) -> Self {
        Self {
            d: c.degree(),
            colors: c.colors().iter().map(MappingTable::to_one_based).collect(),
        }
    }

    pub fn to_coloring(&self) -> Result<RoadColoring> {
        if self.colors.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: self.colors.len(),
            });
        }
        let colors = self
            .colors
            .iter()
            .map(|img| MappingTable::from_one_based(img))
            .collect::<Result<Vec<_>>>()?;
        RoadColoring::new(colors)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawEntry {
    pub image: Vec<usize>,
    pub weight: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawFile {
    pub m: usize,
    pub support: Vec<LawEntry>,
}

impl LawFile {
    pub fn from_law(law: &MappingLaw) -> Self {
        Self {
            m: law.size(),
            support: law
                .iter()
                .map(|(sigma, w)| LawEntry {
                    image: sigma.to_one_based(),
                    weight: rational::format(w),
                })
                .collect(),
        }
    }

    pub fn to_law(&self) -> Result<MappingLaw> {
        let mut entries = Vec::with_capacity(self.support.len());
        for e in &self.support {
            if e.image.len() != self.m {
                return Err(Error::DimensionMismatch {
                    expected: self.m,
                    found: e.image.len(),
                });
            }
            entries.push((
                MappingTable::from_one_based(&e.image)?,
                rational::parse(&e.weight)?,
            ));
        }
        let law = MappingLaw::new(entries)?;
        if law.size() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: law.size(),
            });
        }
        Ok(law)
    }
}

/// A synchronizing word, letters in written order (the last acts first).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub m: usize,
    pub word: Vec<Vec<usize>>,
    /// The single state every start is sent to.
    pub image: usize,
}

impl CertificateFile {
    pub fn from_word(word: &Word, m: usize) -> Self {
        let composed = crate::mapping::compose(word, m);
        Self {
            m,
            word: word
                .letters()
                .iter()
                .map(MappingTable::to_one_based)
                .collect(),
            image: composed.apply(0) + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub samples: usize,
    pub empirical: BTreeMap<usize, u64>,
    pub stationary: BTreeMap<usize, String>,
    pub tv_distance: f64,
    pub chi_square_p_value: f64,
    pub mean_depth: f64,
    pub max_depth: usize,
    pub seed: u64,
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn read_matrix(text: &str, max_den: u64) -> Result<StochasticMatrix> {
    parse_json::<MatrixFile>(text)?.to_matrix(max_den)
}

pub fn write_matrix(q: &StochasticMatrix) -> String {
    to_json(&MatrixFile::from_matrix(q))
}

pub fn read_law(text: &str) -> Result<MappingLaw> {
    parse_json::<LawFile>(text)?.to_law()
}

pub fn write_law(law: &MappingLaw) -> String {
    to_json(&LawFile::from_law(law))
}
