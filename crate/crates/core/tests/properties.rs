use std::collections::BTreeSet;

use proptest::prelude::*;

use cubeperc::checkers::{tree_count_bound, tree_count_exact};
use cubeperc::harness::{run_trial, Check, Mode, TrialConfig};
use cubeperc::percolation::{components_union_find, MAX_SAMPLE_DIMENSION};
use cubeperc::sprinkling::{classify_tms, draw_rounds, merge_analysis, recount_mismatches, VertexClass};
use cubeperc::{
    components, dfs_explore, external_neighborhood, hamming_distance, sample_sites, union_samples, CycleGraph,
    Hypercube, PercolationSample, TwoRoundPlan, Vertex,
};

fn distinct_labels(d: u32) -> impl Strategy<Value = Vec<u64>> {
    let max = (1u64 << d) - 1;
    (1..=d as usize).prop_flat_map(move |k| proptest::collection::btree_set(0..=max, k))
        .prop_map(|s| s.into_iter().collect::<Vec<_>>())
        .prop_shuffle()
}

fn check_separation(d: u32, labels: &[u64]) -> Result<(), TestCaseError> {
    let cube = Hypercube::new(d).unwrap();
    let set: Vec<Vertex> = labels.iter().map(|&l| Vertex(l)).collect();
    let parts = cube.separate_into_subcubes(&set).unwrap();
    let k = set.len() as u32;
    prop_assert_eq!(parts.len(), set.len());
    for (i, (cube_i, v_i)) in parts.iter().enumerate() {
        prop_assert_eq!(*v_i, set[i]);
        prop_assert!(cube_i.dimension() >= d - k + 1);
        // exactly one vertex of S inside each subcube
        prop_assert_eq!(set.iter().filter(|&&v| cube_i.contains(v)).count(), 1);
        prop_assert!(cube_i.contains(*v_i));
        for (cube_j, _) in &parts[i + 1..] {
            prop_assert!(cube_i.is_disjoint(cube_j));
            // independent disjointness test: two subcubes meet iff their fixed values agree on shared fixed coordinates
            let shared = cube_i.fixed_mask() & cube_j.fixed_mask();
            prop_assert!((cube_i.fixed_values() ^ cube_j.fixed_values()) & shared != 0);
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn separation_d8(labels in distinct_labels(8)) {
        check_separation(8, &labels)?;
    }

    #[test]
    fn separation_d16(labels in distinct_labels(16)) {
        check_separation(16, &labels)?;
    }

    #[test]
    fn separation_d32(labels in distinct_labels(32)) {
        check_separation(32, &labels)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn neighbors_are_symmetric(d in 1u32..=63, raw in any::<u64>()) {
        let cube = Hypercube::new(d).unwrap();
        let v = Vertex(raw & (u64::MAX >> (64 - d)));
        let ns = cube.neighbors(v).unwrap();
        prop_assert_eq!(ns.len(), d as usize);
        for u in ns {
            prop_assert_eq!(hamming_distance(u, v), 1);
            prop_assert!(cube.neighbors(u).unwrap().contains(&v));
        }
    }

    #[test]
    fn sphere2_has_binomial_size(d in 2u32..=40, raw in any::<u64>()) {
        let cube = Hypercube::new(d).unwrap();
        let v = Vertex(raw & (u64::MAX >> (64 - d)));
        let sphere = cube.sphere2(v).unwrap();
        prop_assert_eq!(sphere.len() as u64, d as u64 * (d as u64 - 1) / 2);
        prop_assert!(sphere.iter().all(|&u| hamming_distance(u, v) == 2));
        prop_assert_eq!(sphere.iter().collect::<BTreeSet<_>>().len(), sphere.len());
    }

    #[test]
    fn pivot_subcubes(d in 2u32..=20, fixed in any::<u64>(), values in any::<u64>(), raw in any::<u64>(), m_frac in 0.0f64..=1.0) {
        let full = u64::MAX >> (64 - d);
        // host keeps at least one free coordinate
        let fixed_mask = fixed & full & !(1u64 << (raw % d as u64));
        let host = cubeperc::Subcube::new(d, fixed_mask, values & fixed_mask).unwrap();
        let v = Vertex((raw & full & !fixed_mask) | host.fixed_values());
        let m = ((host.dimension() as f64 * m_frac).floor() as usize).max(1);
        let cube = Hypercube::new(d).unwrap();
        let parts = cube.build_pivot_subcubes(&host, v, m).unwrap();
        prop_assert_eq!(parts.len(), m);
        for (i, (sub, pivot)) in parts.iter().enumerate() {
            prop_assert_eq!(hamming_distance(*pivot, v), 1);
            prop_assert!(sub.contains(*pivot));
            prop_assert!(host.contains(*pivot));
            prop_assert_eq!(sub.dimension(), host.dimension() - m as u32);
            prop_assert!(!sub.contains(v));
            for (other, _) in &parts[i + 1..] {
                prop_assert!(sub.is_disjoint(other));
            }
        }
    }
}

#[test]
fn common_neighbor_law_exhaustive() {
    for d in 1..=8u32 {
        let cube = Hypercube::new(d).unwrap();
        for u in cube.vertices() {
            for v in cube.vertices() {
                if u == v {
                    assert!(cube.common_neighbors(u, v).is_err());
                    continue;
                }
                // brute force: count w adjacent to both
                let brute = cube.vertices().filter(|&w| hamming_distance(w, u) == 1 && hamming_distance(w, v) == 1).count();
                let expected = if hamming_distance(u, v) == 2 { 2 } else { 0 };
                assert_eq!(brute, expected);
                assert_eq!(cube.common_neighbors(u, v).unwrap(), expected as u32, "d={d} u={} v={}", u.0, v.0);
            }
        }
    }
}

#[test]
fn union_law_exhaustive() {
    // every pair of subsets of Q^2 and Q^3, and sampled pairs up to Q^6
    for d in 2..=3u32 {
        let n = 1u64 << d;
        for a in 0..(1u64 << n) {
            for b in 0..(1u64 << n) {
                let sa = PercolationSample::from_vertices(n, 0.3, (0..n).filter(|i| a >> i & 1 == 1).map(Vertex)).unwrap();
                let sb = PercolationSample::from_vertices(n, 0.4, (0..n).filter(|i| b >> i & 1 == 1).map(Vertex)).unwrap();
                let u = union_samples(&sa, &sb).unwrap();
                let expected: Vec<Vertex> = (0..n).filter(|i| (a | b) >> i & 1 == 1).map(Vertex).collect();
                assert_eq!(u.retained().collect::<Vec<_>>(), expected);
            }
        }
    }
    for d in 4..=6u32 {
        for seed in 0..50 {
            let a = sample_sites(d, 0.3, seed).unwrap();
            let b = sample_sites(d, 0.2, seed + 1000).unwrap();
            let u = union_samples(&a, &b).unwrap();
            for v in Hypercube::new(d).unwrap().vertices() {
                assert_eq!(u.is_retained(v), a.is_retained(v) || b.is_retained(v));
            }
            assert!((u.p() - (1.0 - 0.7 * 0.8)).abs() < 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dfs_is_coupled_with_eager_sampling(d in 1u32..=10, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let cube = Hypercube::new(d).unwrap();
        let (lazy, trace) = dfs_explore(&cube, p, seed).unwrap();
        let eager = components(&cube, &sample_sites(d, p, seed).unwrap()).unwrap();
        prop_assert_eq!(&lazy, &eager);
        prop_assert_eq!(trace.bit_sequence_length, cube.order());
        let members = eager.all_members();
        let mut previous_end = None;
        for epoch in &trace.epochs {
            prop_assert_eq!(epoch.positives, eager.size(epoch.component));
            let set: BTreeSet<Vertex> = members[epoch.component as usize].iter().copied().collect();
            let boundary = external_neighborhood(&cube, &set).len() as u64;
            prop_assert!(epoch.queries() <= epoch.positives + boundary);
            if let Some(end) = previous_end {
                prop_assert!(epoch.first_query > end);
            }
            previous_end = Some(epoch.last_query);
        }
    }

    #[test]
    fn sampling_is_reproducible(d in 1u32..=14, p in 0.0f64..=1.0, seed in any::<u64>()) {
        let a = sample_sites(d, p, seed).unwrap();
        let b = sample_sites(d, p, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.membership().len(), 1u64 << d);
        let cube = Hypercube::new(d).unwrap();
        let la = components(&cube, &a).unwrap();
        prop_assert_eq!(&la, &components(&cube, &b).unwrap());
        prop_assert_eq!(&la, &components_union_find(&cube, &a).unwrap());
        prop_assert_eq!(la.sizes().iter().sum::<u64>(), a.retained_count());
    }

    #[test]
    fn two_round_identity(epsilon in 1e-9f64..0.999, d in 2u32..=1000) {
        // at d = 2 the rounds stay ordered only for epsilon below 2 sqrt(2) - 2
        let ordered = d >= 3 || epsilon < 8f64.sqrt() - 2.0;
        match TwoRoundPlan::new(epsilon, d) {
            Ok(plan) => {
                prop_assert!(ordered);
                prop_assert!(plan.identity_defect() <= 1e-12);
                prop_assert!(0.0 < plan.p2 && plan.p2 < plan.p1 && plan.p1 < plan.p && plan.p < 1.0);
            }
            Err(_) => prop_assert!(!ordered),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trials_rerun_identically(d in 4u32..=12, epsilon in 0.01f64..0.9, seed in any::<u64>(), two in any::<bool>()) {
        let mode = if two { Mode::TwoRound } else { Mode::SingleRound };
        let config = TrialConfig::new(d, epsilon, seed).with_mode(mode).with_checks([Check::Sphere2, Check::Expansion, Check::Squid]);
        let a = run_trial(&config).unwrap();
        let b = run_trial(&config).unwrap();
        prop_assert_eq!(a.reproducible_part(), b.reproducible_part());
        let predicted = 2.0 * epsilon * (1u64 << d) as f64 / d as f64;
        prop_assert_eq!(a.giant_predicted, predicted);
    }

    #[test]
    fn partition_and_merge_soundness(d in 6u32..=13, epsilon in 0.05f64..0.6, seed in any::<u64>()) {
        let cube = Hypercube::new(d).unwrap();
        let plan = TwoRoundPlan::new(epsilon, d).unwrap();
        let (r1, r2) = draw_rounds(&plan, seed).unwrap();
        let lab1 = components(&cube, &r1).unwrap();
        let Ok(part) = classify_tms(&cube, &lab1, epsilon) else {
            prop_assert_eq!(r1.retained_count(), 0);
            return Ok(());
        };
        let (t, m, s) = part.counts();
        prop_assert_eq!(t + m + s, cube.order());
        for v in cube.vertices() {
            let in_t = part.t().contains(v.0);
            let in_m = part.m().contains(v.0);
            prop_assert!(!(in_t && in_m));
            let into_t = cube.neighbors(v).unwrap().iter().filter(|u| part.t().contains(u.0)).count() as f64;
            match part.class(v) {
                VertexClass::M => prop_assert!(into_t >= part.threshold),
                VertexClass::S => prop_assert!(into_t < part.threshold),
                VertexClass::T => prop_assert!(in_t),
            }
        }
        prop_assert!(recount_mismatches(&cube, &lab1, &part, cube.vertices()).unwrap().is_empty());
        let analysis = merge_analysis(&cube, &part, &r1, &r2).unwrap();
        prop_assert_eq!(analysis.soundness_violations, 0);
        let direct = components(&cube, &union_samples(&r1, &r2).unwrap()).unwrap();
        prop_assert_eq!(&analysis.final_labeling, &direct);
        let giant = direct.label(part.giant_representative).unwrap();
        for r in &analysis.reports {
            if r.merged {
                prop_assert_eq!(direct.label(r.representative), Some(giant));
            }
        }
    }
}

#[test]
fn tree_counts_respect_bound() {
    let q3 = Hypercube::new(3).unwrap();
    let q4 = Hypercube::new(4).unwrap();
    let c8 = CycleGraph::new(8).unwrap();
    for k in 1..=6 {
        assert!(tree_count_exact(&q3, k).unwrap() as f64 <= tree_count_bound(8, 3, k).unwrap());
        assert!(tree_count_exact(&q4, k).unwrap() as f64 <= tree_count_bound(16, 4, k).unwrap());
        assert!(tree_count_exact(&c8, k).unwrap() as f64 <= tree_count_bound(8, 2, k).unwrap());
    }
    assert_eq!(tree_count_exact(&q3, 3).unwrap(), 24);
    assert!(tree_count_exact(&q4, 4).unwrap() as f64 <= 16.0 * (4.0 * std::f64::consts::E).powi(3));
}

#[test]
fn half_retention_concentrates_over_1000_seeds() {
    assert!(MAX_SAMPLE_DIMENSION >= 20);
    let n = 1u64 << 20;
    let band = 4.0 * (n as f64 * 0.25).sqrt();
    let within = (0..1000u64)
        .filter(|&i| {
            let count = sample_sites(20, 0.5, 42 + i).unwrap().retained_count() as f64;
            (count - n as f64 / 2.0).abs() <= band
        })
        .count();
    assert!(within >= 990, "{within}/1000 within 4 sd");
}
