//! Regular-graph oracles.
//!
//! The hypercube is the performance-critical backend; small explicit graphs exist so that
//! checkers stated for arbitrary `d`-regular graphs can be cross-tested by hand.

use std::collections::BTreeSet;

use crate::error::{domain, Result};
use crate::hypercube::{Hypercube, Vertex};

/// A `d`-regular graph on vertices `0..vertex_count()`, queried one neighbour at a time.
pub trait GraphOracle {
    fn vertex_count(&self) -> u64;

    fn degree(&self) -> usize;

    /// The `i`-th neighbour of `v`, `i < degree()`. Order is fixed for a given graph.
    fn neighbor(&self, v: Vertex, i: usize) -> Vertex;

    fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        (0..self.degree()).map(move |i| self.neighbor(v, i))
    }
}

impl GraphOracle for Hypercube {
    #[inline]
    fn vertex_count(&self) -> u64 {
        self.order()
    }

    #[inline]
    fn degree(&self) -> usize {
        self.dimension() as usize
    }

    #[inline]
    fn neighbor(&self, v: Vertex, i: usize) -> Vertex {
        v.flip(i as u32)
    }
}

/// The cycle `C_n`, a 2-regular graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleGraph {
    n: u64,
}

impl CycleGraph {
    pub fn new(n: u64) -> Result<Self> {
        if n < 3 {
            return domain(format!("cycle needs at least 3 vertices, got {n}"));
        }
        Ok(Self { n })
    }
}

impl GraphOracle for CycleGraph {
    fn vertex_count(&self) -> u64 {
        self.n
    }

    fn degree(&self) -> usize {
        2
    }

    fn neighbor(&self, v: Vertex, i: usize) -> Vertex {
        match i {
            0 => Vertex((v.0 + self.n - 1) % self.n),
            _ => Vertex((v.0 + 1) % self.n),
        }
    }
}

/// A regular graph given by adjacency lists, validated on construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplicitGraph {
    adjacency: Vec<Vec<u64>>,
    degree: usize,
}

impl ExplicitGraph {
    pub fn new(adjacency: Vec<Vec<u64>>) -> Result<Self> {
        let n = adjacency.len() as u64;
        let degree = adjacency.first().map_or(0, Vec::len);
        for (v, row) in adjacency.iter().enumerate() {
            if row.len() != degree {
                return domain(format!("vertex {v} has degree {}, expected {degree}", row.len()));
            }
            let distinct: BTreeSet<_> = row.iter().collect();
            if distinct.len() != row.len() {
                return domain(format!("vertex {v} lists a neighbour twice"));
            }
            for &u in row {
                if u >= n || u == v as u64 {
                    return domain(format!("vertex {v} has invalid neighbour {u}"));
                }
                if !adjacency[u as usize].contains(&(v as u64)) {
                    return domain(format!("edge {v}-{u} is not symmetric"));
                }
            }
        }
        Ok(Self { adjacency, degree })
    }

    pub fn from_oracle<G: GraphOracle>(graph: &G) -> Self {
        let adjacency = (0..graph.vertex_count())
            .map(|v| graph.neighbors(Vertex(v)).map(|u| u.0).collect())
            .collect();
        Self { adjacency, degree: graph.degree() }
    }
}

impl GraphOracle for ExplicitGraph {
    fn vertex_count(&self) -> u64 {
        self.adjacency.len() as u64
    }

    fn degree(&self) -> usize {
        self.degree
    }

    fn neighbor(&self, v: Vertex, i: usize) -> Vertex {
        Vertex(self.adjacency[v.0 as usize][i])
    }
}

/// Vertices outside `set` adjacent to some member of `set`.
pub fn external_neighborhood<G: GraphOracle>(graph: &G, set: &BTreeSet<Vertex>) -> BTreeSet<Vertex> {
    external_neighborhood_within(graph, set, |_| true)
}

/// The external neighbourhood restricted to vertices accepted by `within`.
pub fn external_neighborhood_within<G: GraphOracle>(
    graph: &G,
    set: &BTreeSet<Vertex>,
    within: impl Fn(Vertex) -> bool,
) -> BTreeSet<Vertex> {
    set.iter()
        .flat_map(|&s| graph.neighbors(s))
        .filter(|u| !set.contains(u) && within(*u))
        .collect()
}
