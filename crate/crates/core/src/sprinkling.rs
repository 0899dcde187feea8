//! Two-round exposure: classify the cube against the first-round giant, reveal the second
//! round on `S ∪ M`, then on `T`, and track which components merge into the giant.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::bitset::{BitSet, RankIndex};
use crate::error::{domain, Error, Result};
use crate::hypercube::{Hypercube, Vertex};
use crate::percolation::{closed_neighborhood, sample_sites, ComponentLabeling, PercolationSample, TwoRoundPlan, UnionFind};
use crate::rng::derive_seed;

/// Draws `R₁` at `p₁` and `R₂` at `p₂` under seeds derived from the trial seed.
pub fn draw_rounds(plan: &TwoRoundPlan, seed: u64) -> Result<(PercolationSample, PercolationSample)> {
    let r1 = sample_sites(plan.d, plan.p1, derive_seed(seed, 1))?;
    let r2 = sample_sites(plan.d, plan.p2, derive_seed(seed, 2))?;
    Ok((r1, r2))
}

/// `18 · 200² / ε⁵`.
pub fn c1_constant(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return domain(format!("epsilon {epsilon} must be positive"));
    }
    Ok(18.0 * 200.0 * 200.0 / epsilon.powi(5))
}

/// Upper bound on the chance a component with `|B ∩ M| >= c d` misses `T ∩ R₂`:
/// `exp(-c ε⁵ d / (18 · 200²))`.
pub fn merge_failure_bound(c: f64, epsilon: f64, d: u32) -> f64 {
    (-c * epsilon.powi(5) * d as f64 / (18.0 * 200.0 * 200.0)).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VertexClass {
    T,
    M,
    S,
}

/// `T = L₁' ∪ N(L₁')`, `M` = vertices outside `T` with at least `ε²d/200` neighbours in `T`,
/// `S` = everything else.
#[derive(Clone, Debug, PartialEq)]
pub struct TmsPartition {
    t: BitSet,
    m: BitSet,
    pub epsilon: f64,
    pub d: u32,
    /// `ε² d / 200`.
    pub threshold: f64,
    /// Smallest vertex of `L₁'`.
    pub giant_representative: Vertex,
    pub giant_size: u64,
    pub second_size: u64,
    /// The runner-up exceeds half the first-round giant.
    pub ambiguous_giant: bool,
}

impl TmsPartition {
    pub fn class(&self, v: Vertex) -> VertexClass {
        if self.t.contains(v.0) {
            VertexClass::T
        } else if self.m.contains(v.0) {
            VertexClass::M
        } else {
            VertexClass::S
        }
    }

    pub fn t(&self) -> &BitSet {
        &self.t
    }

    pub fn m(&self) -> &BitSet {
        &self.m
    }

    pub fn counts(&self) -> (u64, u64, u64) {
        let t = self.t.count_ones();
        let m = self.m.count_ones();
        (t, m, self.t.len() - t - m)
    }
}

/// Splits `Q^d` against the largest component of the first-round labeling.
pub fn classify_tms(cube: &Hypercube, labeling_r1: &ComponentLabeling, epsilon: f64) -> Result<TmsPartition> {
    if labeling_r1.universe() != cube.order() {
        return domain("first-round labeling does not cover the hypercube");
    }
    let giant = labeling_r1.largest().ok_or_else(|| Error::Refused("no giant candidate: R1 is empty".into()))?;
    let sizes = labeling_r1.top_sizes(2);
    let (giant_size, second_size) = (sizes[0], sizes.get(1).copied().unwrap_or(0));
    let giant_representative =
        labeling_r1.labeled_vertices().find(|&(_, c)| c == giant).map(|(v, _)| v).expect("non-empty giant");

    let d = cube.dimension();
    let threshold = epsilon * epsilon * d as f64 / 200.0;
    let t = closed_neighborhood(cube, labeling_r1, giant);
    let mut m = BitSet::new(cube.order());
    for v in 0..cube.order() {
        if t.contains(v) {
            continue;
        }
        let into_t = (0..d).filter(|&i| t.contains(v ^ (1 << i))).count();
        if into_t as f64 >= threshold {
            m.insert(v);
        }
    }
    Ok(TmsPartition {
        t,
        m,
        epsilon,
        d,
        threshold,
        giant_representative,
        giant_size,
        second_size,
        ambiguous_giant: 2 * second_size > giant_size,
    })
}

/// Re-derives the class of each listed vertex from the first-round labeling alone and
/// returns the vertices whose stored class disagrees.
pub fn recount_mismatches(
    cube: &Hypercube,
    labeling_r1: &ComponentLabeling,
    partition: &TmsPartition,
    vertices: impl IntoIterator<Item = Vertex>,
) -> Result<Vec<Vertex>> {
    let giant = labeling_r1
        .label(partition.giant_representative)
        .ok_or_else(|| Error::Domain("partition does not belong to this labeling".into()))?;
    let in_giant = |v: Vertex| labeling_r1.label(v) == Some(giant);
    let in_t = |v: Vertex| in_giant(v) || (0..cube.dimension()).any(|i| in_giant(v.flip(i)));
    let mut mismatches = Vec::new();
    for v in vertices {
        cube.check(v)?;
        let expected = if in_t(v) {
            VertexClass::T
        } else if (0..cube.dimension()).filter(|&i| in_t(v.flip(i))).count() as f64 >= partition.threshold {
            VertexClass::M
        } else {
            VertexClass::S
        };
        if partition.class(v) != expected {
            mismatches.push(v);
        }
    }
    Ok(mismatches)
}

/// One component `B` of `(S ∪ M) ∩ R` and its fate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeReport {
    pub representative: Vertex,
    pub size: u64,
    pub in_m: u64,
    /// `|N_T(B)|`.
    pub t_neighbors: u64,
    /// `|N_T(B ∩ M)|`.
    pub t_neighbors_of_m: u64,
    /// `N_T(B) ∩ R₂ ≠ ∅`.
    pub merged: bool,
    /// Size of B's component in `Q^d[R₁ ∪ R₂]`.
    pub final_size: u64,
    pub joined_giant: bool,
}

#[derive(Clone, Debug)]
pub struct MergeAnalysis {
    pub reports: Vec<MergeReport>,
    pub final_labeling: ComponentLabeling,
    /// Reports whose merged flag disagrees with the final labeling.
    pub soundness_violations: usize,
    pub giant_final_size: u64,
}

/// Reveals `R₂` on `S ∪ M`, records the components `B` of `(S ∪ M) ∩ R`, then reveals `R₂ ∩ T`
/// and completes the union-find over `Q^d[R₁ ∪ R₂]`.
pub fn merge_analysis(
    cube: &Hypercube,
    partition: &TmsPartition,
    r1: &PercolationSample,
    r2: &PercolationSample,
) -> Result<MergeAnalysis> {
    let n = cube.order();
    if r1.universe() != n || r2.universe() != n || partition.t.len() != n {
        return domain("samples and partition must cover the same hypercube");
    }
    let d = cube.dimension();
    let t = &partition.t;
    let mut union = r1.membership().clone();
    union.union_with(r2.membership());
    let index = RankIndex::new(union);
    let rank = |v: u64| index.rank(v).map(|r| r as usize);
    let mut uf = UnionFind::new(index.ones() as usize);

    // first exposure phase: R₂ on S ∪ M
    let outside_t: Vec<u64> = index.bits().ones().filter(|&v| !t.contains(v)).collect();
    for &v in &outside_t {
        let rv = rank(v).expect("retained");
        for i in 0..d {
            let u = v ^ (1 << i);
            if u > v && !t.contains(u) {
                if let Some(ru) = rank(u) {
                    uf.union(rv, ru);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<u64>> = BTreeMap::new();
    for &v in &outside_t {
        groups.entry(uf.find(rank(v).expect("retained"))).or_default().push(v);
    }
    let mut reports = Vec::with_capacity(groups.len());
    for members in groups.values() {
        let mut t_nbrs = HashSet::new();
        let mut t_nbrs_of_m = HashSet::new();
        let mut in_m = 0;
        for &v in members {
            let is_m = partition.m.contains(v);
            in_m += is_m as u64;
            for i in 0..d {
                let u = v ^ (1 << i);
                if t.contains(u) {
                    t_nbrs.insert(u);
                    if is_m {
                        t_nbrs_of_m.insert(u);
                    }
                }
            }
        }
        // R₂ ∩ T is consulted only here, after every B is fixed
        let merged = t_nbrs.iter().any(|&u| r2.membership().contains(u));
        reports.push(MergeReport {
            representative: Vertex(members[0]),
            size: members.len() as u64,
            in_m,
            t_neighbors: t_nbrs.len() as u64,
            t_neighbors_of_m: t_nbrs_of_m.len() as u64,
            merged,
            final_size: 0,
            joined_giant: false,
        });
    }
    reports.sort_by_key(|r| r.representative);

    // second phase: reveal R₂ ∩ T and every remaining edge
    for (rv, v) in index.bits().ones().enumerate() {
        for i in 0..d {
            let u = v ^ (1 << i);
            if u > v && (t.contains(u) || t.contains(v)) {
                if let Some(ru) = rank(u) {
                    uf.union(rv, ru);
                }
            }
        }
    }

    let giant_rank = rank(partition.giant_representative.0)
        .ok_or_else(|| Error::Domain("first-round giant is not contained in R1".into()))?;
    let giant_root = uf.find(giant_rank);
    let giant_final_size = uf.set_size(giant_rank) as u64;
    let mut soundness_violations = 0;
    for report in &mut reports {
        let r = rank(report.representative.0).expect("retained");
        report.final_size = uf.set_size(r) as u64;
        report.joined_giant = uf.find(r) == giant_root;
        // merged ⇒ joins L₁'; not merged ⇒ B is already a full component of R
        let consistent = if report.merged { report.joined_giant } else { report.final_size == report.size };
        if !consistent {
            soundness_violations += 1;
        }
    }
    let final_labeling =
        ComponentLabeling::from_assignment(index.bits().clone(), |rank, _| uf.find(rank as usize) as u64);
    Ok(MergeAnalysis { reports, final_labeling, soundness_violations, giant_final_size })
}

/// One row of the merge-rate table: components with `|B ∩ M| >= c d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeRateRow {
    pub c: f64,
    pub min_in_m: f64,
    pub eligible: u64,
    pub merged: u64,
    pub failure_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeSummary {
    pub t_size: u64,
    pub m_size: u64,
    pub s_size: u64,
    pub first_round_giant: u64,
    pub first_round_second: u64,
    pub ambiguous_giant: bool,
    pub components: u64,
    pub merged: u64,
    pub max_unmerged: u64,
    pub soundness_violations: u64,
    pub c1: f64,
    /// Rows use sub-asymptotic constants `c` in place of `C₁`.
    pub rates: Vec<MergeRateRow>,
}

pub fn merge_summary(partition: &TmsPartition, analysis: &MergeAnalysis, c_grid: &[f64]) -> Result<MergeSummary> {
    let (t_size, m_size, s_size) = partition.counts();
    let d = partition.d as f64;
    let rates = c_grid
        .iter()
        .map(|&c| {
            let min_in_m = c * d;
            let eligible: Vec<&MergeReport> = analysis.reports.iter().filter(|r| r.in_m as f64 >= min_in_m).collect();
            MergeRateRow {
                c,
                min_in_m,
                eligible: eligible.len() as u64,
                merged: eligible.iter().filter(|r| r.merged).count() as u64,
                failure_bound: merge_failure_bound(c, partition.epsilon, partition.d),
            }
        })
        .collect();
    Ok(MergeSummary {
        t_size,
        m_size,
        s_size,
        first_round_giant: partition.giant_size,
        first_round_second: partition.second_size,
        ambiguous_giant: partition.ambiguous_giant,
        components: analysis.reports.len() as u64,
        merged: analysis.reports.iter().filter(|r| r.merged).count() as u64,
        max_unmerged: analysis.reports.iter().filter(|r| !r.merged).map(|r| r.size).max().unwrap_or(0),
        soundness_violations: analysis.soundness_violations as u64,
        c1: c1_constant(partition.epsilon)?,
        rates,
    })
}

/// Non-giant component sizes after the full exposure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalCensus {
    pub giant: u64,
    /// Decreasing.
    pub nongiant_sizes: Vec<u64>,
    pub max_nongiant: u64,
    pub max_over_d: f64,
}

pub fn survival_census(final_labeling: &ComponentLabeling, d: u32) -> SurvivalCensus {
    survival_census_of_sizes(final_labeling.sizes(), d)
}

pub fn survival_census_of_sizes(sizes: &[u64], d: u32) -> SurvivalCensus {
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let giant = sorted.first().copied().unwrap_or(0);
    let nongiant_sizes: Vec<u64> = sorted.into_iter().skip(1).collect();
    let max_nongiant = nongiant_sizes.first().copied().unwrap_or(0);
    SurvivalCensus { giant, max_over_d: max_nongiant as f64 / d as f64, nongiant_sizes, max_nongiant }
}
