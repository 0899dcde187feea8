use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::checkers::{ViolationReport, Witness};
use crate::error::{domain, Result};
use crate::graph::GraphOracle;
use crate::hypercube::Vertex;
use crate::percolation::ComponentLabeling;

pub const EXPANSION_CHECKER: &str = "expansion";

/// Which components the expansion check applies to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeThreshold {
    /// `k > 300 ln n`.
    Asymptotic,
    /// A test-only cutoff: `k > value`.
    Override(f64),
}

impl SizeThreshold {
    pub fn value(self, n: u64) -> f64 {
        match self {
            SizeThreshold::Asymptotic => 300.0 * (n as f64).ln(),
            SizeThreshold::Override(v) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionScan {
    pub reports: Vec<ViolationReport>,
    pub size_threshold: f64,
    pub threshold_overridden: bool,
    pub epsilon: f64,
    pub checked: usize,
    pub skipped_small: usize,
    /// `min |N(S)| / (k d)` over checked components.
    pub min_ratio: Option<f64>,
}

/// Reports components `S` above the size threshold with `|N_G(S)| < 9kd/10`.
pub fn check_expansion<G: GraphOracle>(
    graph: &G,
    labeling: &ComponentLabeling,
    epsilon: f64,
    threshold: SizeThreshold,
) -> Result<ExpansionScan> {
    if labeling.universe() != graph.vertex_count() {
        return domain("labeling does not cover the graph");
    }
    let n = graph.vertex_count();
    let size_threshold = threshold.value(n);
    let d = graph.degree() as f64;
    let eligible: Vec<bool> = labeling.sizes().iter().map(|&k| k as f64 > size_threshold).collect();
    let checked = eligible.iter().filter(|&&e| e).count();
    let mut scan = ExpansionScan {
        reports: Vec::new(),
        size_threshold,
        threshold_overridden: matches!(threshold, SizeThreshold::Override(_)),
        epsilon,
        checked,
        skipped_small: labeling.component_count() - checked,
        min_ratio: None,
    };
    if checked == 0 {
        return Ok(scan);
    }

    let mut members: Vec<Vec<Vertex>> = vec![Vec::new(); labeling.component_count()];
    for (v, c) in labeling.labeled_vertices() {
        if eligible[c as usize] {
            members[c as usize].push(v);
        }
    }
    let mut seen = BitSet::new(n);
    let mut touched = Vec::new();
    for (id, set) in members.iter().enumerate().filter(|(id, _)| eligible[*id]) {
        let k = set.len() as f64;
        for &v in set {
            for u in graph.neighbors(v) {
                if labeling.label(u) != Some(id as u32) && seen.test_and_set(u.0) {
                    touched.push(u.0);
                }
            }
        }
        let boundary = touched.len() as f64;
        for &u in &touched {
            seen.remove(u);
        }
        touched.clear();
        let ratio = boundary / (k * d);
        scan.min_ratio = Some(scan.min_ratio.map_or(ratio, |m: f64| m.min(ratio)));
        let required = 0.9 * k * d;
        if boundary < required {
            scan.reports.push(ViolationReport {
                checker: EXPANSION_CHECKER.into(),
                witness: Witness::Component { representative: set[0], size: set.len() as u64 },
                measured: boundary,
                threshold: required,
            });
        }
    }
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::CycleGraph;
    use crate::hypercube::Hypercube;
    use crate::percolation::{components, PercolationSample};

    #[test]
    fn empty_labeling_has_no_reports() {
        let q = Hypercube::new(8).unwrap();
        let lab = components(&q, &PercolationSample::empty(256)).unwrap();
        let scan = check_expansion(&q, &lab, 0.1, SizeThreshold::Override(0.0)).unwrap();
        assert!(scan.reports.is_empty());
        assert_eq!(scan.checked, 0);
    }

    #[test]
    fn arc_of_a_cycle_expands_poorly() {
        let c8 = CycleGraph::new(8).unwrap();
        let sample = PercolationSample::from_vertices(8, 0.5, (2..6).map(Vertex)).unwrap();
        let lab = components(&c8, &sample).unwrap();
        let scan = check_expansion(&c8, &lab, 0.1, SizeThreshold::Override(0.0)).unwrap();
        assert_eq!(scan.reports.len(), 1);
        let r = &scan.reports[0];
        assert_eq!(r.measured, 2.0);
        assert!((r.threshold - 7.2).abs() < 1e-12);
        assert_eq!(r.witness, Witness::Component { representative: Vertex(2), size: 4 });

        // under the asymptotic cutoff 300 ln 8 nothing is checked
        let scan = check_expansion(&c8, &lab, 0.1, SizeThreshold::Asymptotic).unwrap();
        assert!(scan.reports.is_empty());
        assert_eq!(scan.skipped_small, 1);
    }

    #[test]
    fn single_vertex_expands_fully() {
        let q = Hypercube::new(6).unwrap();
        let sample = PercolationSample::from_vertices(64, 0.5, [Vertex(0)]).unwrap();
        let lab = components(&q, &sample).unwrap();
        let scan = check_expansion(&q, &lab, 0.1, SizeThreshold::Override(0.0)).unwrap();
        assert!(scan.reports.is_empty());
        assert_eq!(scan.min_ratio, Some(1.0));
    }
}
