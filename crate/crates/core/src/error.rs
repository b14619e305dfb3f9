use thiserror::Error;

use crate::chain::Classification;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid mapping: {0}")]
    InvalidMapping(String),

    #[error("dimension mismatch: expected {expected} states, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("no unique stationary law")]
    NoUniqueStationaryLaw,

    #[error("rationalize rejected input: {0}")]
    Rationalize(String),

    #[error("row {row} has no positive entry")]
    ZeroRow { row: usize },

    #[error("graph is not a primitive constant-outdegree graph: {0}")]
    AssumptionA(String),

    #[error("mapping set is not synchronizing")]
    NotSynchronizing,

    #[error("synchronizing word exceeded the length budget of {limit}")]
    WordBudget { limit: usize },

    #[error("coloring search budget of {budget} candidates exhausted")]
    SearchBudget { budget: u64 },

    #[error("chain is not mixing (classified as {0})")]
    NotMixing(Classification),

    #[error(
        "chain is not p-uniform: its entropy cannot be approached by synchronizing mapping laws"
    )]
    NotPUniform,

    #[error("family index n = {n} is below the least admissible value {n_min}")]
    FamilyIndexTooSmall { n: u64, n_min: u64 },

    #[error("coupling from the past exceeded the depth cap of {cap}")]
    DepthCap { cap: usize },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
