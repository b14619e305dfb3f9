//! Markov chains on finite state spaces realized as random walks driven by
//! IID random self-maps.
//!
//! A mapping law `μ` on `V^V` realizes a chain `Q` when
//! `q[x][y] = μ{σ : σ x = y}`. When the support of `μ` is synchronizing,
//! the walk can be sampled exactly from its stationary law by coupling from
//! the past. The crate builds such laws for mixing chains, searches road
//! colorings, samples, and compares the entropy of the chain with that of
//! the driving sequence.
//!
//! States are 0-based in the API and 1-based in files and display output.

pub mod chain;
pub mod coloring;
pub mod entropy;
pub mod error;
pub mod format;
pub mod law;
pub mod mapping;
pub mod rational;
pub mod sampler;

pub use chain::{
    classify, power, rationalize, stationary, support, Classification, Distribution,
    StochasticMatrix,
};
pub use coloring::{
    build_support_graph, canonical_coloring, check_assumption_a, find_synchronizing_coloring,
    is_synchronizing, synchronizing_word, AdjacencyMatrix, RoadColoring, SearchConfig, TieBreak,
};
pub use entropy::{
    chain_entropy, entropy_family, entropy_gap_floor, is_p_uniform, law_entropy, phi, EntropyReport,
};
pub use error::{Error, Result};
pub use law::{
    mix, rational_mapping_law, synchronizing_mapping_law, verify_mapping_law, MappingLaw,
    RealizeConfig,
};
pub use mapping::{compose, MappingTable, Word};
pub use rational::Rational;
pub use sampler::{cftp_sample, sample_many, CftpConfig, CoalescenceSampler, RngStream};
