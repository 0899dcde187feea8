//! Lazy depth-first exposure: the random subset is generated while its components are
//! discovered, one Bernoulli query per vertex.
//!
//! Vertices are queried at most once. A vertex found absent during one epoch is never
//! re-queried, so an epoch for a component `S` of size `k` holds exactly `k` positive answers
//! and at most `k + |N(S)|` queries in total.

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{domain, Result};
use crate::graph::GraphOracle;
use crate::hypercube::Vertex;
use crate::percolation::components::{ComponentId, ComponentLabeling};
use crate::rng::KeyedCoin;

/// The query interval that discovered one component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Epoch {
    pub component: ComponentId,
    /// Index of the root query.
    pub first_query: u64,
    /// Index of the last query made before the component closed.
    pub last_query: u64,
    pub positives: u64,
    pub negatives: u64,
}

impl Epoch {
    pub fn queries(&self) -> u64 {
        self.last_query - self.first_query + 1
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfsTrace {
    /// Total number of queries issued, i.e. the length of the consumed bit sequence.
    pub bit_sequence_length: u64,
    pub epochs: Vec<Epoch>,
    /// Root queries answered negatively; they belong to no epoch.
    pub isolated_negatives: u64,
}

/// Explores `graph` lazily, querying the coin keyed on `(seed, label)` on first contact.
///
/// Roots are tried in increasing label order and neighbours in the oracle's order
/// (increasing coordinate for the hypercube), so the labeling is bit-for-bit the one
/// `components(graph, sample_sites(.., p, seed))` produces.
pub fn dfs_explore<G: GraphOracle>(graph: &G, p: f64, seed: u64) -> Result<(ComponentLabeling, DfsTrace)> {
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("retention probability {p} outside [0, 1]"));
    }
    let n = graph.vertex_count();
    if n > u32::MAX as u64 {
        return domain("dfs exposure supports at most 2^32 vertices");
    }
    let coin = KeyedCoin::new(seed, p);
    let mut queried = BitSet::new(n);
    let mut retained = BitSet::new(n);
    let mut component_of: Vec<(u64, ComponentId)> = Vec::new();
    let mut trace = DfsTrace::default();
    let mut stack: Vec<(u64, usize)> = Vec::new();

    let query = |v: u64, queried: &mut BitSet, retained: &mut BitSet| -> bool {
        queried.insert(v);
        let hit = coin.flip(v);
        if hit {
            retained.insert(v);
        }
        hit
    };

    for root in 0..n {
        if queried.contains(root) {
            continue;
        }
        let first_query = trace.bit_sequence_length;
        let hit = query(root, &mut queried, &mut retained);
        trace.bit_sequence_length += 1;
        if !hit {
            trace.isolated_negatives += 1;
            continue;
        }
        let id = trace.epochs.len() as ComponentId;
        let mut epoch = Epoch { component: id, first_query, last_query: first_query, positives: 1, negatives: 0 };
        component_of.push((root, id));
        stack.push((root, 0));
        while let Some(top) = stack.last_mut() {
            let (v, i) = *top;
            if i == graph.degree() {
                stack.pop();
                continue;
            }
            top.1 += 1;
            let u = graph.neighbor(Vertex(v), i).0;
            if queried.contains(u) {
                continue;
            }
            epoch.last_query = trace.bit_sequence_length;
            trace.bit_sequence_length += 1;
            if query(u, &mut queried, &mut retained) {
                epoch.positives += 1;
                component_of.push((u, id));
                stack.push((u, 0));
            } else {
                epoch.negatives += 1;
            }
        }
        trace.epochs.push(epoch);
    }
    component_of.sort_unstable_by_key(|&(v, _)| v);
    let mut ids = component_of.into_iter().map(|(_, c)| c);
    let labeling = ComponentLabeling::from_assignment(retained, |_, _| ids.next().expect("one id per retained vertex") as u64);
    Ok((labeling, trace))
}
