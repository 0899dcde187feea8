use std::sync::mpsc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_trial_with_budget, ExperimentRecord, MemoryBudget, TrialConfig};
use crate::error::{Error, Result};
use crate::rng::derive_seed;

/// Grid position paired with the seed it ran under.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub index: usize,
    pub d: u32,
    pub epsilon: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub index: usize,
    pub d: u32,
    pub epsilon: f64,
    pub seed: u64,
    /// `domain`, `refused`, `resource`, `io` or `json`.
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub index: usize,
    pub result: std::result::Result<ExperimentRecord, TrialFailure>,
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::Refused(_) => "refused",
        Error::Resource(_) => "resource",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    }
}

/// `ds × epsilons × trials` configs cloned from `template`, seeded by `derive_seed(master, index)`.
pub fn build_grid(template: &TrialConfig, ds: &[u32], epsilons: &[f64], trials: usize, master_seed: u64) -> Vec<TrialConfig> {
    let mut grid = Vec::with_capacity(ds.len() * epsilons.len() * trials);
    for &d in ds {
        for &epsilon in epsilons {
            for _ in 0..trials {
                let index = grid.len() as u64;
                grid.push(TrialConfig { d, epsilon, seed: derive_seed(master_seed, index), ..template.clone() });
            }
        }
    }
    grid
}

pub fn manifest(grid: &[TrialConfig]) -> Vec<ManifestEntry> {
    grid.iter()
        .enumerate()
        .map(|(index, c)| ManifestEntry { index, d: c.d, epsilon: c.epsilon, seed: c.seed })
        .collect()
}

/// Runs every config on a pool of `jobs` workers and hands outcomes to `emit` on the calling
/// thread in completion order. A failing trial becomes a [`TrialFailure`]; the sweep goes on.
pub fn sweep(grid: &[TrialConfig], jobs: usize, budget: MemoryBudget, mut emit: impl FnMut(SweepOutcome)) -> Result<()> {
    if grid.is_empty() {
        return Ok(());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker pool: {e}")))?;
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|scope| {
        scope.spawn(move || {
            pool.install(|| {
                grid.par_iter().enumerate().for_each_with(tx, |tx, (index, config)| {
                    let result = run_trial_with_budget(config, budget).map_err(|e| TrialFailure {
                        index,
                        d: config.d,
                        epsilon: config.epsilon,
                        seed: config.seed,
                        kind: error_kind(&e).into(),
                        message: e.to_string(),
                    });
                    // the receiver outlives every worker
                    let _ = tx.send(SweepOutcome { index, result });
                });
            });
        });
        for outcome in rx {
            emit(outcome);
        }
    });
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::run_trial;

    #[test]
    fn empty_grid() {
        let mut seen = 0;
        sweep(&[], 2, MemoryBudget::gigabytes(1.0), |_| seen += 1).unwrap();
        assert_eq!(seen, 0);
    }

    #[test]
    fn matches_sequential_runs() {
        let grid = build_grid(&TrialConfig::new(8, 0.1, 0), &[8, 9], &[0.1], 2, 42)
            .into_iter()
            .take(3)
            .collect::<Vec<_>>();
        let mut parallel = Vec::new();
        sweep(&grid, 2, MemoryBudget::gigabytes(1.0), |o| parallel.push((o.index, o.result.unwrap().reproducible_part())))
            .unwrap();
        parallel.sort_by_key(|(i, _)| *i);
        let sequential: Vec<_> =
            grid.iter().enumerate().map(|(i, c)| (i, run_trial(c).unwrap().reproducible_part())).collect();
        assert_eq!(parallel, sequential);
    }

    #[test]
    fn failures_are_recorded_per_trial() {
        let grid = vec![TrialConfig::new(8, 0.1, 1), TrialConfig::new(40, 0.1, 2), TrialConfig::new(8, 0.1, 3)];
        let mut ok = 0;
        let mut failed = Vec::new();
        sweep(&grid, 3, MemoryBudget::gigabytes(1.0), |o| match o.result {
            Ok(_) => ok += 1,
            Err(f) => failed.push(f),
        })
        .unwrap();
        assert_eq!(ok, 2);
        assert_eq!(failed.len(), 1);
        assert_eq!((failed[0].index, failed[0].kind.as_str()), (1, "resource"));
    }

    #[test]
    fn grid_seeds_are_distinct() {
        let grid = build_grid(&TrialConfig::new(8, 0.1, 0), &[8, 10], &[0.1, 0.2], 5, 7);
        assert_eq!(grid.len(), 20);
        let seeds: std::collections::HashSet<u64> = grid.iter().map(|c| c.seed).collect();
        assert_eq!(seeds.len(), 20);
        let m = manifest(&grid);
        assert_eq!(m[13].seed, grid[13].seed);
        assert_eq!(m[13].index, 13);
    }
}
