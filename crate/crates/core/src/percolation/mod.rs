//! Site-percolation sampling and component identification on implicit graphs.

pub mod components;
pub mod dfs;
pub mod plan;
pub mod sample;
pub mod union_find;

pub use components::{closed_neighborhood, components, components_union_find, largest_two, largest_two_of, ComponentId, ComponentLabeling};
pub use dfs::{dfs_explore, DfsTrace, Epoch};
pub use plan::{union_probability, TwoRoundPlan};
pub use sample::{sample_sites, union_samples, PercolationSample, SampleOrigin, MAX_SAMPLE_DIMENSION};
pub use union_find::UnionFind;
