//! Connected sets with many vertices starved of contact with the giant's closed neighbourhood.
//!
//! The quantifier over all connected `Cd`-sets is not computable, so candidates are supplied:
//! realised small components, optionally grown into larger connected sets.

use std::collections::{BTreeSet, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::checkers::{ViolationReport, Witness};
use crate::error::{domain, Result};
use crate::hypercube::{Hypercube, Vertex};

pub const SQUID_CHECKER: &str = "squid";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SquidScan {
    pub reports: Vec<ViolationReport>,
    pub checked: usize,
    /// `ε² d / 40`: fewer region neighbours than this marks a vertex as deprived.
    pub deprived_threshold: f64,
    /// `ε d / 10`: deprived vertices needed for a report.
    pub count_threshold: f64,
    /// `C d`.
    pub size_cap: f64,
    pub max_deprived: u64,
}

fn is_connected(cube: &Hypercube, set: &[Vertex]) -> bool {
    let members: HashSet<Vertex> = set.iter().copied().collect();
    let Some(&start) = set.first() else { return false };
    let mut seen = HashSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for i in 0..cube.dimension() {
            let u = v.flip(i);
            if members.contains(&u) && seen.insert(u) {
                stack.push(u);
            }
        }
    }
    seen.len() == members.len()
}

/// Counts, per candidate, vertices with fewer than `ε²d/40` neighbours in `giant_region`
/// (the caller's `L₁ ∪ N(L₁)`), and reports candidates where that count reaches `εd/10`.
pub fn check_squid(
    cube: &Hypercube,
    giant_region: &BitSet,
    candidates: &[Vec<Vertex>],
    epsilon: f64,
    c: f64,
) -> Result<SquidScan> {
    if giant_region.len() != cube.order() {
        return domain("giant region does not cover the hypercube");
    }
    let d = cube.dimension() as f64;
    let deprived_threshold = epsilon * epsilon * d / 40.0;
    let count_threshold = epsilon * d / 10.0;
    let size_cap = c * d;
    let mut scan =
        SquidScan { reports: Vec::new(), checked: 0, deprived_threshold, count_threshold, size_cap, max_deprived: 0 };
    for candidate in candidates {
        for &v in candidate {
            cube.check(v)?;
        }
        if candidate.len() as f64 > size_cap {
            return domain(format!("candidate of size {} exceeds C d = {size_cap}", candidate.len()));
        }
        if !is_connected(cube, candidate) {
            return domain("squid candidate is not connected in Q^d");
        }
        let deprived = candidate
            .iter()
            .filter(|&&v| {
                let inside = (0..cube.dimension()).filter(|&i| giant_region.contains(v.flip(i).0)).count();
                (inside as f64) < deprived_threshold
            })
            .count() as u64;
        scan.checked += 1;
        scan.max_deprived = scan.max_deprived.max(deprived);
        if deprived as f64 >= count_threshold {
            let mut witness = candidate.clone();
            witness.sort();
            scan.reports.push(ViolationReport {
                checker: SQUID_CHECKER.into(),
                witness: Witness::Vertices(witness),
                measured: deprived as f64,
                threshold: count_threshold,
            });
        }
    }
    Ok(scan)
}

/// Grows `base` (connected, non-empty) into a connected set of `target` vertices by attaching
/// random neighbours of random members.
pub fn extend_connected<R: Rng>(cube: &Hypercube, base: &[Vertex], target: usize, rng: &mut R) -> Result<Vec<Vertex>> {
    if base.is_empty() {
        return domain("cannot extend an empty set");
    }
    if target as u64 > cube.order() {
        return domain(format!("target size {target} exceeds the cube order"));
    }
    let mut members: Vec<Vertex> = base.to_vec();
    let mut present: BTreeSet<Vertex> = base.iter().copied().collect();
    while members.len() < target {
        let v = members[rng.random_range(0..members.len())];
        let u = v.flip(rng.random_range(0..cube.dimension()));
        if present.insert(u) {
            members.push(u);
        }
    }
    Ok(members)
}
