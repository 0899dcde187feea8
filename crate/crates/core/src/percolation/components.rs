//! Connected components of the induced subgraph `G[R]`.
//!
//! Memory layout: the membership bit set plus one prefix count per 64-bit word gives a
//! rank for every retained vertex; component ids are stored per rank, so only retained
//! vertices pay for a label. The BFS keeps a separate visited bit set and a flat queue.

use crate::bitset::{BitSet, RankIndex};
use crate::error::{domain, Result};
use crate::graph::GraphOracle;
use crate::hypercube::Vertex;
use crate::percolation::sample::PercolationSample;
use crate::percolation::union_find::UnionFind;

pub type ComponentId = u32;

const UNLABELED: u32 = u32::MAX;

/// Component ids for the retained vertices of a sample.
///
/// Ids are assigned in increasing order of each component's smallest vertex label, so two
/// labelings of the same vertex set compare equal exactly when they describe the same partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentLabeling {
    index: RankIndex,
    labels: Vec<ComponentId>,
    sizes: Vec<u64>,
    order_by_size: Vec<ComponentId>,
}

impl ComponentLabeling {
    fn assemble(index: RankIndex, labels: Vec<ComponentId>, sizes: Vec<u64>) -> Self {
        let mut order_by_size: Vec<ComponentId> = (0..sizes.len() as u32).collect();
        order_by_size.sort_by(|&a, &b| sizes[b as usize].cmp(&sizes[a as usize]).then(a.cmp(&b)));
        Self { index, labels, sizes, order_by_size }
    }

    /// Builds a labeling from `(vertex, provisional id)` pairs covering every retained vertex
    /// of `membership`; provisional ids are renumbered canonically.
    pub(crate) fn from_assignment(membership: BitSet, mut provisional: impl FnMut(u64, Vertex) -> u64) -> Self {
        let index = RankIndex::new(membership);
        let mut labels = vec![UNLABELED; index.ones() as usize];
        let mut remap = std::collections::HashMap::new();
        let mut sizes = Vec::new();
        for (rank, v) in index.bits().ones().enumerate() {
            let key = provisional(rank as u64, Vertex(v));
            let id = *remap.entry(key).or_insert_with(|| {
                sizes.push(0);
                (sizes.len() - 1) as ComponentId
            });
            labels[rank] = id;
            sizes[id as usize] += 1;
        }
        Self::assemble(index, labels, sizes)
    }

    pub fn universe(&self) -> u64 {
        self.index.bits().len()
    }

    pub fn membership(&self) -> &BitSet {
        self.index.bits()
    }

    pub fn is_retained(&self, v: Vertex) -> bool {
        v.0 < self.universe() && self.index.bits().contains(v.0)
    }

    pub fn retained_count(&self) -> u64 {
        self.index.ones()
    }

    #[inline]
    pub fn label(&self, v: Vertex) -> Option<ComponentId> {
        self.index.rank(v.0).map(|r| self.labels[r as usize])
    }

    pub fn component_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn size(&self, id: ComponentId) -> u64 {
        self.sizes[id as usize]
    }

    /// Component ids by decreasing size; ties broken by id.
    pub fn order_by_size(&self) -> &[ComponentId] {
        &self.order_by_size
    }

    pub fn largest(&self) -> Option<ComponentId> {
        self.order_by_size.first().copied()
    }

    /// Sizes of the largest `k` components.
    pub fn top_sizes(&self, k: usize) -> Vec<u64> {
        self.order_by_size.iter().take(k).map(|&c| self.sizes[c as usize]).collect()
    }

    /// Retained vertices in increasing label order with their component ids.
    pub fn labeled_vertices(&self) -> impl Iterator<Item = (Vertex, ComponentId)> + '_ {
        self.index.bits().ones().zip(self.labels.iter().copied()).map(|(v, c)| (Vertex(v), c))
    }

    pub fn members(&self, id: ComponentId) -> Vec<Vertex> {
        self.labeled_vertices().filter(|&(_, c)| c == id).map(|(v, _)| v).collect()
    }

    /// Members of every component, indexed by id.
    pub fn all_members(&self) -> Vec<Vec<Vertex>> {
        let mut out: Vec<Vec<Vertex>> = self.sizes.iter().map(|&s| Vec::with_capacity(s as usize)).collect();
        for (v, c) in self.labeled_vertices() {
            out[c as usize].push(v);
        }
        out
    }
}

fn check_universe<G: GraphOracle>(graph: &G, sample: &PercolationSample) -> Result<()> {
    if graph.vertex_count() != sample.universe() {
        return domain(format!(
            "sample covers {} vertices but the graph has {}",
            sample.universe(),
            graph.vertex_count()
        ));
    }
    if sample.universe() > u32::MAX as u64 {
        return domain("component labeling supports at most 2^32 vertices");
    }
    Ok(())
}

/// Exact components of `G[R]` by frontier BFS over the implicit graph.
pub fn components<G: GraphOracle>(graph: &G, sample: &PercolationSample) -> Result<ComponentLabeling> {
    check_universe(graph, sample)?;
    let membership = sample.membership();
    let index = RankIndex::new(membership.clone());
    let mut labels = vec![UNLABELED; index.ones() as usize];
    let mut visited = BitSet::new(membership.len());
    let mut sizes = Vec::new();
    let mut queue: Vec<u64> = Vec::new();

    for root in membership.ones() {
        if !visited.test_and_set(root) {
            continue;
        }
        let id = sizes.len() as ComponentId;
        queue.clear();
        queue.push(root);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head];
            head += 1;
            for u in graph.neighbors(Vertex(v)) {
                if membership.contains(u.0) && visited.test_and_set(u.0) {
                    queue.push(u.0);
                }
            }
        }
        for &v in &queue {
            labels[index.rank(v).expect("retained") as usize] = id;
        }
        sizes.push(queue.len() as u64);
    }
    Ok(ComponentLabeling::assemble(index, labels, sizes))
}

/// The same labeling built by disjoint-set union over the retained edges.
pub fn components_union_find<G: GraphOracle>(graph: &G, sample: &PercolationSample) -> Result<ComponentLabeling> {
    check_universe(graph, sample)?;
    let index = RankIndex::new(sample.membership().clone());
    let mut uf = UnionFind::new(index.ones() as usize);
    for (rank, v) in index.bits().ones().enumerate() {
        for u in graph.neighbors(Vertex(v)) {
            if u.0 > v {
                if let Some(ru) = index.rank(u.0) {
                    uf.union(rank, ru as usize);
                }
            }
        }
    }
    Ok(ComponentLabeling::from_assignment(sample.membership().clone(), |rank, _| uf.find(rank as usize) as u64))
}

/// `C ∪ N_G(C)` for component `id`, as a bit set over all vertices.
pub fn closed_neighborhood<G: GraphOracle>(graph: &G, labeling: &ComponentLabeling, id: ComponentId) -> BitSet {
    let mut region = BitSet::new(labeling.universe());
    for (v, c) in labeling.labeled_vertices() {
        if c == id {
            region.insert(v.0);
            for u in graph.neighbors(v) {
                region.insert(u.0);
            }
        }
    }
    region
}

/// Sizes of the two largest components, zero where absent.
pub fn largest_two(labeling: &ComponentLabeling) -> (u64, u64) {
    largest_two_of(labeling.sizes())
}

pub fn largest_two_of(sizes: &[u64]) -> (u64, u64) {
    let (mut first, mut second) = (0, 0);
    for &s in sizes {
        if s > first {
            second = first;
            first = s;
        } else if s > second {
            second = s;
        }
    }
    (first, second)
}
