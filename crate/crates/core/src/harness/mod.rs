//! Trial orchestration, sweeps, summary statistics and record persistence.

mod records;
mod stats;
mod sweep;

use std::collections::BTreeSet;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checkers::expansion::EXPANSION_CHECKER;
use crate::checkers::sphere::SPHERE2_CHECKER;
use crate::checkers::squid::SQUID_CHECKER;
use crate::checkers::{check_expansion, check_sphere2_density, check_squid, extend_connected, SizeThreshold, ViolationReport};
use crate::error::{domain, Error, Result};
use crate::hypercube::{Hypercube, Vertex};
use crate::percolation::{closed_neighborhood, components, sample_sites, ComponentLabeling, PercolationSample, TwoRoundPlan};
use crate::rng::derive_seed;
use crate::sprinkling::{classify_tms, draw_rounds, merge_analysis, merge_summary, MergeSummary};

pub use records::{read_records, write_census_csv, write_record, RecordFile, CENSUS_HEADER};
pub use stats::{giant_statistics, group_by_parameters, second_component_scaling, GiantStatistics, ScalingFit, ScalingRow, UNIQUENESS_FACTOR};
pub use sweep::{build_grid, error_kind, manifest, sweep, ManifestEntry, SweepOutcome, TrialFailure};

pub const SCHEMA_VERSION: u32 = 1;
/// Largest dimension a trial will run at regardless of budget.
pub const MAX_TRIAL_DIMENSION: u32 = 26;
pub const DEFAULT_MEMORY_GB: f64 = 8.0;
pub const MEMORY_ENV: &str = "CUBEPERC_MEM_GB";
pub const TOP_SIZES: usize = 10;
/// Merge-rate constants; all far below the asymptotic `C₁`.
pub const DEFAULT_C_GRID: [f64; 7] = [0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0];
/// Non-giant components fed to the squid checker per trial.
pub const SQUID_CANDIDATES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    SingleRound,
    TwoRound,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single-round" | "single" => Ok(Mode::SingleRound),
            "two-round" | "two" => Ok(Mode::TwoRound),
            other => domain(format!("unknown mode '{other}' (expected single-round or two-round)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Sphere2,
    Expansion,
    Squid,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Sphere2 => SPHERE2_CHECKER,
            Check::Expansion => EXPANSION_CHECKER,
            Check::Squid => SQUID_CHECKER,
        }
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sphere2" => Ok(Check::Sphere2),
            "expansion" => Ok(Check::Expansion),
            "squid" => Ok(Check::Squid),
            other => domain(format!("unknown check '{other}' (expected sphere2, expansion or squid)")),
        }
    }
}

/// Parses a comma-separated check list; empty items are ignored.
pub fn parse_checks(list: &str) -> Result<BTreeSet<Check>> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub d: u32,
    pub epsilon: f64,
    pub seed: u64,
    pub mode: Mode,
    pub checks: BTreeSet<Check>,
    /// Constants `c` for the merge-rate rows, eligibility `|B ∩ M| >= c d`.
    pub c_grid: Vec<f64>,
    /// Squid candidates are grown to `squid_c · d` vertices.
    pub squid_c: f64,
    pub expansion_threshold: SizeThreshold,
    /// Replaces `(1+ε)/d`; single-round only, for degenerate test trials.
    pub retention_override: Option<f64>,
    /// Adds `2d` vertices of this vertex's radius-2 sphere to the sample.
    pub plant_sphere2: Option<Vertex>,
}

impl TrialConfig {
    pub fn new(d: u32, epsilon: f64, seed: u64) -> Self {
        Self {
            d,
            epsilon,
            seed,
            mode: Mode::SingleRound,
            checks: BTreeSet::new(),
            c_grid: DEFAULT_C_GRID.to_vec(),
            squid_c: 2.0,
            expansion_threshold: SizeThreshold::Asymptotic,
            retention_override: None,
            plant_sphere2: None,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_checks(mut self, checks: impl IntoIterator<Item = Check>) -> Self {
        self.checks = checks.into_iter().collect();
        self
    }
}

/// One checker's outcome inside a record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckerSummary {
    pub checker: String,
    pub violations: u64,
    pub witnesses: Vec<ViolationReport>,
    pub examined: u64,
    pub skipped: u64,
    /// Largest measured value (sphere2, squid) or smallest `|N(S)|/(kd)` (expansion).
    pub extreme: Option<f64>,
    pub note: Option<String>,
}

mod precise {
    //! Probabilities are written with 17 significant digits.

    use serde::{Deserialize, Deserializer, Serializer};
    use serde_json::value::RawValue;

    fn raw(x: f64) -> Box<RawValue> {
        RawValue::from_string(format!("{x:.16e}")).expect("finite float is valid JSON")
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        serde::Serialize::serialize(&raw(*x), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        f64::deserialize(d)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
            serde::Serialize::serialize(&x.map(raw), s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
            Option::<f64>::deserialize(d)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentRecord {
    pub schema_version: u32,
    pub d: u32,
    pub epsilon: f64,
    pub seed: u64,
    pub mode: Mode,
    #[serde(with = "precise")]
    pub p: f64,
    #[serde(with = "precise::option")]
    pub p1: Option<f64>,
    #[serde(with = "precise::option")]
    pub p2: Option<f64>,
    pub retained: u64,
    pub giant: u64,
    pub second: u64,
    pub components_total: u64,
    pub top_sizes: Vec<u64>,
    /// `2 ε 2^d / d`.
    pub giant_predicted: f64,
    pub checker_summaries: Vec<CheckerSummary>,
    pub merge_summary: Option<MergeSummary>,
    pub wall_ms: u64,
    pub version: String,
}

impl ExperimentRecord {
    /// The record with wall time and version blanked, for reproduction checks.
    pub fn reproducible_part(&self) -> ExperimentRecord {
        ExperimentRecord { wall_ms: 0, version: String::new(), ..self.clone() }
    }

    pub fn total_violations(&self) -> u64 {
        self.checker_summaries.iter().map(|c| c.violations).sum()
    }

    pub fn vertex_count(&self) -> u64 {
        1u64 << self.d
    }
}

pub fn giant_predicted(d: u32, epsilon: f64) -> f64 {
    2.0 * epsilon * (1u64 << d) as f64 / d as f64
}

/// Memory ceiling for a single trial.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MemoryBudget {
    pub bytes: f64,
}

impl MemoryBudget {
    pub fn gigabytes(gb: f64) -> Self {
        Self { bytes: gb * (1u64 << 30) as f64 }
    }

    /// `CUBEPERC_MEM_GB` if set and valid, else 8 GB.
    pub fn from_env() -> Result<Self> {
        match std::env::var(MEMORY_ENV) {
            Ok(v) => match v.trim().parse::<f64>() {
                Ok(gb) if gb > 0.0 => Ok(Self::gigabytes(gb)),
                _ => domain(format!("{MEMORY_ENV}='{v}' is not a positive number")),
            },
            Err(_) => Ok(Self::gigabytes(DEFAULT_MEMORY_GB)),
        }
    }

    /// Conservative peak estimate: bit sets, per-vertex sphere counts, labels and union-find arrays.
    pub fn estimate(d: u32) -> f64 {
        8.0 * (1u64 << d.min(63)) as f64
    }

    pub fn admit(&self, d: u32) -> Result<()> {
        if d > MAX_TRIAL_DIMENSION {
            return Err(Error::Resource(format!("d = {d} exceeds the hard cap of {MAX_TRIAL_DIMENSION}")));
        }
        let need = Self::estimate(d);
        if need > self.bytes {
            return Err(Error::Resource(format!(
                "d = {d} needs about {:.2} GB, budget is {:.2} GB",
                need / (1u64 << 30) as f64,
                self.bytes / (1u64 << 30) as f64
            )));
        }
        Ok(())
    }
}

struct Probabilities {
    p: f64,
    plan: Option<TwoRoundPlan>,
}

fn probabilities(config: &TrialConfig) -> Result<Probabilities> {
    if let Some(p) = config.retention_override {
        if config.mode == Mode::TwoRound {
            return domain("a retention override applies to single-round trials only");
        }
        if !(0.0..=1.0).contains(&p) {
            return domain(format!("retention override {p} outside [0, 1]"));
        }
        return Ok(Probabilities { p, plan: None });
    }
    if !(config.epsilon > 0.0 && config.epsilon < 1.0) {
        return domain(format!("epsilon {} outside (0, 1)", config.epsilon));
    }
    match config.mode {
        Mode::SingleRound => {
            let p = (1.0 + config.epsilon) / config.d as f64;
            if !(p > 0.0 && p < 1.0) {
                return domain(format!("p = (1+ε)/d = {p} outside (0, 1)"));
            }
            Ok(Probabilities { p, plan: None })
        }
        Mode::TwoRound => {
            let plan = TwoRoundPlan::new(config.epsilon, config.d)?;
            Ok(Probabilities { p: plan.p, plan: Some(plan) })
        }
    }
}

fn plant_sphere2(cube: &Hypercube, sample: &mut PercolationSample, center: Vertex) -> Result<()> {
    let sphere = cube.sphere2(center)?;
    let need = 2 * cube.dimension() as usize;
    if sphere.len() < need {
        return domain(format!("radius-2 sphere has {} vertices, fewer than 2d = {need}", sphere.len()));
    }
    for &v in &sphere[..need] {
        sample.insert(v)?;
    }
    Ok(())
}

fn summarize_sphere2(cube: &Hypercube, sample: &PercolationSample) -> Result<CheckerSummary> {
    let scan = check_sphere2_density(cube, sample)?;
    Ok(CheckerSummary {
        checker: SPHERE2_CHECKER.into(),
        violations: scan.reports.len() as u64,
        witnesses: scan.reports,
        examined: cube.order(),
        skipped: 0,
        extreme: Some(scan.max_measured as f64),
        note: (!scan.threshold_reachable).then(|| format!("threshold unreachable: C(d,2) < 2d = {}", scan.threshold)),
    })
}

fn summarize_expansion(cube: &Hypercube, labeling: &ComponentLabeling, config: &TrialConfig) -> Result<CheckerSummary> {
    let scan = check_expansion(cube, labeling, config.epsilon, config.expansion_threshold)?;
    Ok(CheckerSummary {
        checker: EXPANSION_CHECKER.into(),
        violations: scan.reports.len() as u64,
        witnesses: scan.reports,
        examined: scan.checked as u64,
        skipped: scan.skipped_small as u64,
        extreme: scan.min_ratio,
        note: scan.threshold_overridden.then(|| format!("size threshold overridden to {} (test setting)", scan.size_threshold)),
    })
}

/// Grows the largest non-giant components into connected sets of `squid_c · d` vertices and
/// checks them against the giant's closed neighbourhood.
fn summarize_squid(cube: &Hypercube, labeling: &ComponentLabeling, config: &TrialConfig) -> Result<CheckerSummary> {
    let d = cube.dimension();
    let target = ((config.squid_c * d as f64).floor() as u64).min(cube.order()) as usize;
    let mut summary = CheckerSummary {
        checker: SQUID_CHECKER.into(),
        violations: 0,
        witnesses: Vec::new(),
        examined: 0,
        skipped: 0,
        extreme: None,
        note: Some(format!("candidates grown to C d = {target} vertices, C = {}", config.squid_c)),
    };
    let Some(giant) = labeling.largest() else {
        summary.note = Some("no giant: squid check skipped".into());
        return Ok(summary);
    };
    let region = closed_neighborhood(cube, labeling, giant);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 3));
    let members = labeling.all_members();
    let mut candidates = Vec::new();
    for &id in labeling.order_by_size().iter().skip(1) {
        if candidates.len() == SQUID_CANDIDATES {
            break;
        }
        let base = &members[id as usize];
        if base.len() > target || target == 0 {
            summary.skipped += 1;
            continue;
        }
        candidates.push(extend_connected(cube, base, target, &mut rng)?);
    }
    let scan = check_squid(cube, &region, &candidates, config.epsilon, config.squid_c)?;
    summary.violations = scan.reports.len() as u64;
    summary.witnesses = scan.reports;
    summary.examined = scan.checked as u64;
    summary.extreme = (scan.checked > 0).then_some(scan.max_deprived as f64);
    Ok(summary)
}

/// Runs one trial under the memory budget from the environment.
pub fn run_trial(config: &TrialConfig) -> Result<ExperimentRecord> {
    run_trial_with_budget(config, MemoryBudget::from_env()?)
}

pub fn run_trial_with_budget(config: &TrialConfig, budget: MemoryBudget) -> Result<ExperimentRecord> {
    let started = Instant::now();
    if config.d == 0 {
        return domain("dimension must be at least 1");
    }
    budget.admit(config.d)?;
    let cube = Hypercube::new(config.d)?;
    let probs = probabilities(config)?;

    let (labeling, final_sample, merge) = match &probs.plan {
        None => {
            let mut sample = sample_sites(config.d, probs.p, config.seed)?;
            if let Some(center) = config.plant_sphere2 {
                plant_sphere2(&cube, &mut sample, center)?;
            }
            (components(&cube, &sample)?, sample, None)
        }
        Some(plan) => {
            let (mut r1, r2) = draw_rounds(plan, config.seed)?;
            if let Some(center) = config.plant_sphere2 {
                plant_sphere2(&cube, &mut r1, center)?;
            }
            let labeling_r1 = components(&cube, &r1)?;
            let partition = classify_tms(&cube, &labeling_r1, config.epsilon)?;
            let analysis = merge_analysis(&cube, &partition, &r1, &r2)?;
            let summary = merge_summary(&partition, &analysis, &config.c_grid)?;
            let union = crate::percolation::union_samples(&r1, &r2)?;
            (analysis.final_labeling, union, Some(summary))
        }
    };

    let mut checker_summaries = Vec::new();
    for check in &config.checks {
        checker_summaries.push(match check {
            Check::Sphere2 => summarize_sphere2(&cube, &final_sample)?,
            Check::Expansion => summarize_expansion(&cube, &labeling, config)?,
            Check::Squid => summarize_squid(&cube, &labeling, config)?,
        });
    }

    let top = labeling.top_sizes(TOP_SIZES);
    Ok(ExperimentRecord {
        schema_version: SCHEMA_VERSION,
        d: config.d,
        epsilon: config.epsilon,
        seed: config.seed,
        mode: config.mode,
        p: probs.p,
        p1: probs.plan.map(|p| p.p1),
        p2: probs.plan.map(|p| p.p2),
        retained: labeling.retained_count(),
        giant: top.first().copied().unwrap_or(0),
        second: top.get(1).copied().unwrap_or(0),
        components_total: labeling.component_count() as u64,
        top_sizes: top,
        giant_predicted: giant_predicted(config.d, config.epsilon),
        checker_summaries,
        merge_summary: merge,
        wall_ms: started.elapsed().as_millis() as u64,
        version: env!("CARGO_PKG_VERSION").into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_full_retention() {
        let mut config = TrialConfig::new(3, 0.1, 0);
        config.retention_override = Some(1.0);
        let r = run_trial(&config).unwrap();
        assert_eq!((r.giant, r.second), (8, 0));
        assert_eq!(r.p, 1.0);
    }

    #[test]
    fn rerun_is_identical() {
        let config = TrialConfig::new(10, 0.2, 1).with_checks([Check::Sphere2, Check::Expansion, Check::Squid]);
        let a = run_trial(&config).unwrap();
        let b = run_trial(&config).unwrap();
        assert_eq!(a.reproducible_part(), b.reproducible_part());
        let two = config.clone().with_mode(Mode::TwoRound);
        assert_eq!(run_trial(&two).unwrap().reproducible_part(), run_trial(&two).unwrap().reproducible_part());
    }

    #[test]
    fn limits_and_domains() {
        assert!(matches!(run_trial(&TrialConfig::new(99, 0.1, 0)), Err(Error::Resource(_))));
        assert!(matches!(run_trial(&TrialConfig::new(27, 0.1, 0)), Err(Error::Resource(_))));
        assert!(matches!(
            run_trial_with_budget(&TrialConfig::new(20, 0.1, 0), MemoryBudget::gigabytes(0.001)),
            Err(Error::Resource(_))
        ));
        assert!(matches!(run_trial(&TrialConfig::new(0, 0.1, 0)), Err(Error::Domain(_))));
        assert!(matches!(run_trial(&TrialConfig::new(1, 0.1, 0)), Err(Error::Domain(_))));
        assert!(matches!(run_trial(&TrialConfig::new(8, 1.5, 0)), Err(Error::Domain(_))));
    }

    #[test]
    fn probabilities_use_seventeen_digits() {
        let r = run_trial(&TrialConfig::new(10, 0.1, 4).with_mode(Mode::TwoRound)).unwrap();
        let line = serde_json::to_string(&r).unwrap();
        assert!(line.contains("\"p\":1.1000000000000001e-1"), "{line}");
        let back: ExperimentRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.giant_predicted, 2.0 * 0.1 * 1024.0 / 10.0);
    }

    #[test]
    fn planted_sphere_is_reported() {
        let mut config = TrialConfig::new(12, 0.1, 2).with_checks([Check::Sphere2]);
        config.plant_sphere2 = Some(Vertex(5));
        let r = run_trial(&config).unwrap();
        let s = &r.checker_summaries[0];
        assert!(s.violations >= 1);
        assert!(s.witnesses.iter().any(|w| w.witness == crate::checkers::Witness::Vertex(Vertex(5))));
    }

    #[test]
    fn check_lists_parse() {
        let checks = parse_checks("sphere2, expansion").unwrap();
        assert_eq!(checks.into_iter().collect::<Vec<_>>(), vec![Check::Sphere2, Check::Expansion]);
        assert!(parse_checks("sphere3").is_err());
        assert!(parse_checks("").unwrap().is_empty());
        assert_eq!("two-round".parse::<Mode>().unwrap(), Mode::TwoRound);
    }
}
