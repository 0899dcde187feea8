//! Verifiers and calculators for the structures that control component sizes.

pub mod cherries;
pub mod expansion;
pub mod sphere;
pub mod squid;
pub mod tail;
pub mod trees;

use serde::{Deserialize, Serialize};

use crate::hypercube::Vertex;

pub use cherries::{cherry_count, check_neighbourhood_bounds, NeighbourhoodVerdict, NeighbourhoodDiagnostic};
pub use expansion::{check_expansion, ExpansionScan, SizeThreshold};
pub use sphere::{check_sphere2_density, Sphere2Scan};
pub use squid::{check_squid, extend_connected, SquidScan};
pub use tail::{binomial_tail, chernoff_comparison, TailComparison};
pub use trees::{tree_count_bound, tree_count_exact};

/// What a violation points at.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Vertex(Vertex),
    /// A component of the sampled subgraph, named by its smallest vertex.
    Component { representative: Vertex, size: u64 },
    Vertices(Vec<Vertex>),
}

/// One checker finding: the measured quantity crossed its threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub checker: String,
    pub witness: Witness,
    pub measured: f64,
    pub threshold: f64,
}
