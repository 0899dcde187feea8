//! Counting `k`-vertex tree subgraphs of small regular graphs.
//!
//! Every tree subgraph has a unique vertex set, and is a spanning tree of the subgraph induced
//! on it, so `t_k` is the sum over connected `k`-sets of their spanning-tree counts (matrix-tree
//! theorem). Connected sets are enumerated once each with the ESU extension scheme.

use crate::error::{domain, Error, Result};
use crate::graph::GraphOracle;
use crate::hypercube::Vertex;

pub const MAX_TREE_GRAPH_ORDER: u64 = 1 << 12;
pub const MAX_TREE_SIZE: usize = 7;

/// `n (e d)^(k-1)`.
pub fn tree_count_bound(n: u64, d: usize, k: usize) -> Result<f64> {
    if k == 0 {
        return domain("tree size must be at least 1");
    }
    Ok(n as f64 * (std::f64::consts::E * d as f64).powi(k as i32 - 1))
}

/// Exact number of tree subgraphs on `k` vertices.
pub fn tree_count_exact<G: GraphOracle>(graph: &G, k: usize) -> Result<u128> {
    if k == 0 {
        return domain("tree size must be at least 1");
    }
    if graph.vertex_count() > MAX_TREE_GRAPH_ORDER || k > MAX_TREE_SIZE {
        return Err(Error::Refused(format!(
            "exhaustive enumeration limited to n <= {MAX_TREE_GRAPH_ORDER}, k <= {MAX_TREE_SIZE} (got n = {}, k = {k})",
            graph.vertex_count()
        )));
    }
    let mut total = 0u128;
    for_each_connected_set(graph, k, |set| total += spanning_trees(graph, set));
    Ok(total)
}

/// Visits every connected vertex set of size `k` exactly once.
pub fn for_each_connected_set<G: GraphOracle>(graph: &G, k: usize, mut visit: impl FnMut(&[u64])) {
    let mut sub = Vec::with_capacity(k);
    for v in 0..graph.vertex_count() {
        sub.clear();
        sub.push(v);
        let ext: Vec<u64> = graph.neighbors(Vertex(v)).map(|u| u.0).filter(|&u| u > v).collect();
        extend(graph, k, v, &mut sub, ext, &mut visit);
    }
}

fn adjacent_to_any<G: GraphOracle>(graph: &G, u: u64, set: &[u64]) -> bool {
    graph.neighbors(Vertex(u)).any(|x| set.contains(&x.0))
}

fn extend<G: GraphOracle>(
    graph: &G,
    k: usize,
    root: u64,
    sub: &mut Vec<u64>,
    mut ext: Vec<u64>,
    visit: &mut impl FnMut(&[u64]),
) {
    if sub.len() == k {
        visit(sub);
        return;
    }
    while let Some(w) = ext.pop() {
        let mut next = ext.clone();
        for u in graph.neighbors(Vertex(w)).map(|u| u.0) {
            // exclusive neighbours of w: outside sub ∪ N(sub), larger than the root
            if u > root && u != w && !sub.contains(&u) && !next.contains(&u) && !adjacent_to_any(graph, u, sub) {
                next.push(u);
            }
        }
        sub.push(w);
        extend(graph, k, root, sub, next, visit);
        sub.pop();
    }
}

/// Spanning trees of the subgraph induced on `set`, by a Bareiss determinant of the reduced Laplacian.
fn spanning_trees<G: GraphOracle>(graph: &G, set: &[u64]) -> u128 {
    let k = set.len();
    if k == 1 {
        return 1;
    }
    let mut lap = vec![vec![0i128; k]; k];
    for (i, &v) in set.iter().enumerate() {
        for u in graph.neighbors(Vertex(v)) {
            if let Some(j) = set.iter().position(|&x| x == u.0) {
                lap[i][j] -= 1;
                lap[i][i] += 1;
            }
        }
    }
    let m = k - 1;
    let mut a: Vec<Vec<i128>> = lap.into_iter().take(m).map(|row| row.into_iter().take(m).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for c in 0..m {
        if a[c][c] == 0 {
            match (c + 1..m).find(|&r| a[r][c] != 0) {
                Some(r) => {
                    a.swap(c, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for r in c + 1..m {
            for j in c + 1..m {
                a[r][j] = (a[r][j] * a[c][c] - a[r][c] * a[c][j]) / prev;
            }
        }
        prev = a[c][c];
    }
    (sign * a[m - 1][m - 1]) as u128
}
