use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkers::{ViolationReport, Witness};
use crate::error::{domain, Result};
use crate::hypercube::{Hypercube, Vertex};
use crate::percolation::PercolationSample;

pub const SPHERE2_CHECKER: &str = "sphere2";

/// Outcome of scanning every vertex for a dense radius-2 sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sphere2Scan {
    pub reports: Vec<ViolationReport>,
    /// `2d`.
    pub threshold: u64,
    /// False when `C(d,2) < 2d`, i.e. `d <= 4`: no sample can violate.
    pub threshold_reachable: bool,
    pub max_measured: u64,
}

/// Reports every `v` with `|N²(v) ∩ R| >= 2d`.
///
/// Uses `|N²(v) ∩ R| = (Σ_{u ~ v} |N(u) ∩ R| - d·[v ∈ R]) / 2`: every vertex at distance two is
/// reached through exactly two middle vertices, and `v` itself through all `d` of them.
/// The scan is split across workers by label range.
pub fn check_sphere2_density(cube: &Hypercube, sample: &PercolationSample) -> Result<Sphere2Scan> {
    if sample.universe() != cube.order() {
        return domain("sample does not cover the hypercube");
    }
    let d = cube.dimension();
    let n = cube.order() as usize;
    let threshold = 2 * d as u64;
    let reachable = (d as u64) * (d as u64).saturating_sub(1) / 2 >= threshold;

    let mut retained_degree = vec![0u8; n];
    for v in sample.retained() {
        for i in 0..d {
            retained_degree[(v.0 ^ (1 << i)) as usize] += 1;
        }
    }

    const CHUNK: usize = 1 << 14;
    let per_chunk: Vec<(Vec<(u64, u64)>, u64)> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(n);
            let mut hits = Vec::new();
            let mut max = 0;
            for v in start..end {
                let through: u64 = (0..d).map(|i| retained_degree[v ^ (1 << i)] as u64).sum();
                let own = if sample.is_retained(Vertex(v as u64)) { d as u64 } else { 0 };
                let count = (through - own) / 2;
                max = max.max(count);
                if count >= threshold {
                    hits.push((v as u64, count));
                }
            }
            (hits, max)
        })
        .collect();

    let max_measured = per_chunk.iter().map(|(_, m)| *m).max().unwrap_or(0);
    let reports = per_chunk
        .into_iter()
        .flat_map(|(hits, _)| hits)
        .map(|(v, count)| ViolationReport {
            checker: SPHERE2_CHECKER.into(),
            witness: Witness::Vertex(Vertex(v)),
            measured: count as f64,
            threshold: threshold as f64,
        })
        .collect();
    Ok(Sphere2Scan { reports, threshold, threshold_reachable: reachable, max_measured })
}
