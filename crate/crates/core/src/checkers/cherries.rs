//! Cherry counting and the neighbourhood-density diagnostic.
//!
//! A cherry is a path `s - w - s'` with `s != s'` in `S` and centre `w` in `W`. For a pair `(S, W)`
//! where `W` is small yet every vertex of `S` sends many edges into `W`, the cherry count forces
//! some `v ∈ S` to see many members of `S` at distance two.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::hypercube::{Hypercube, Vertex};

fn vertex_set(cube: &Hypercube, vs: &[Vertex]) -> Result<HashSet<Vertex>> {
    for &v in vs {
        cube.check(v)?;
    }
    Ok(vs.iter().copied().collect())
}

fn disjoint_sets(cube: &Hypercube, s: &[Vertex], w: &[Vertex]) -> Result<(HashSet<Vertex>, HashSet<Vertex>)> {
    let s = vertex_set(cube, s)?;
    let w = vertex_set(cube, w)?;
    if let Some(v) = s.intersection(&w).next() {
        return domain(format!("S and W overlap at vertex {}", v.0));
    }
    Ok((s, w))
}

fn degree_into(cube: &Hypercube, v: Vertex, set: &HashSet<Vertex>) -> u64 {
    (0..cube.dimension()).filter(|&i| set.contains(&v.flip(i))).count() as u64
}

/// `Σ_{w ∈ W} C(deg_S(w), 2)`.
pub fn cherry_count(cube: &Hypercube, s: &[Vertex], w: &[Vertex]) -> Result<u64> {
    let (s, w) = disjoint_sets(cube, s, w)?;
    Ok(w.iter()
        .map(|&x| {
            let deg = degree_into(cube, x, &s);
            deg * deg.saturating_sub(1) / 2
        })
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighbourhoodVerdict {
    /// `S` is empty.
    NotApplicable,
    /// `|W|` exceeds `ε⁴ d |S| / (9·200²)`.
    WBoundViolated,
    /// Some `v ∈ S` has fewer than `ε² d / 200` neighbours in `W`.
    DegreeBoundViolated,
    HypothesesHold,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighbourhoodDiagnostic {
    pub verdict: NeighbourhoodVerdict,
    pub s_size: usize,
    pub w_size: usize,
    pub w_bound: f64,
    pub degree_threshold: f64,
    /// `min_{v ∈ S} |N(v) ∩ W|`, zero for empty `S`.
    pub min_degree_into_w: u64,
    pub cherries: u64,
    /// `max_{v ∈ S} |N²(v) ∩ S|`.
    pub max_sphere2_multiplicity: u64,
    /// `2d`.
    pub sphere2_threshold: u64,
    pub reaches_sphere2_threshold: bool,
}

/// Evaluates the hypotheses on a supplied pair and the sphere-2 multiplicity they would force.
pub fn check_neighbourhood_bounds(
    cube: &Hypercube,
    s: &[Vertex],
    w: &[Vertex],
    epsilon: f64,
) -> Result<NeighbourhoodDiagnostic> {
    let (s_set, w_set) = disjoint_sets(cube, s, w)?;
    let d = cube.dimension() as f64;
    let w_bound = epsilon.powi(4) * d * s_set.len() as f64 / (9.0 * 200.0 * 200.0);
    let degree_threshold = epsilon * epsilon * d / 200.0;
    let sphere2_threshold = 2 * cube.dimension() as u64;

    let min_degree_into_w = s_set.iter().map(|&v| degree_into(cube, v, &w_set)).min().unwrap_or(0);
    let cherries = cherry_count(cube, s, w)?;
    let max_sphere2_multiplicity = s_set
        .iter()
        .map(|&v| cube.sphere2(v).map(|sphere| sphere.into_iter().filter(|u| s_set.contains(u)).count() as u64))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);

    let verdict = if s_set.is_empty() {
        NeighbourhoodVerdict::NotApplicable
    } else if w_set.len() as f64 > w_bound {
        NeighbourhoodVerdict::WBoundViolated
    } else if (min_degree_into_w as f64) < degree_threshold {
        NeighbourhoodVerdict::DegreeBoundViolated
    } else {
        NeighbourhoodVerdict::HypothesesHold
    };
    Ok(NeighbourhoodDiagnostic {
        verdict,
        s_size: s_set.len(),
        w_size: w_set.len(),
        w_bound,
        degree_threshold,
        min_degree_into_w,
        cherries,
        max_sphere2_multiplicity,
        sphere2_threshold,
        reaches_sphere2_threshold: max_sphere2_multiplicity >= sphere2_threshold,
    })
}
