//! A site-percolation laboratory for the hypercube `Q^d`.
//!
//! The crate samples random vertex subsets `R` with retention probability `p = (1+ε)/d`,
//! finds the components of `Q^d[R]` over the implicit graph, runs the two-round sprinkling
//! pipeline, checks the combinatorial structures that control component sizes, and records
//! reproducible experiments.

pub mod bitset;
pub mod checkers;
pub mod error;
pub mod graph;
pub mod harness;
pub mod hypercube;
pub mod percolation;
pub mod rng;
pub mod sprinkling;

pub use error::{Error, Result};
pub use graph::{external_neighborhood, external_neighborhood_within, CycleGraph, ExplicitGraph, GraphOracle};
pub use hypercube::{hamming_distance, Hypercube, Subcube, Vertex};
pub use percolation::{
    components, dfs_explore, largest_two, sample_sites, union_samples, ComponentLabeling, PercolationSample,
    TwoRoundPlan,
};
