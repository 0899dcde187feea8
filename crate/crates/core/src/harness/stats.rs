use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{giant_predicted, ExperimentRecord};
use crate::error::{domain, Error, Result};

/// A giant counts as unique when it exceeds this multiple of the second component.
pub const UNIQUENESS_FACTOR: u64 = 10;
/// Above this ε the run is outside the small-ε regime the asymptotics describe.
pub const SMALL_EPSILON_LIMIT: f64 = 0.3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GiantStatistics {
    pub d: u32,
    pub epsilon: f64,
    pub trials: usize,
    pub mean_giant: f64,
    /// Sample standard deviation; zero for a single record.
    pub std_giant: f64,
    pub predicted: f64,
    pub ratio: f64,
    pub uniqueness_rate: f64,
    pub uniqueness_factor: u64,
    /// Every record retained the whole cube.
    pub degenerate: bool,
    pub epsilon_outside_small_regime: bool,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Records grouped by `(d, ε)`, ε compared by bit pattern.
pub fn group_by_parameters(records: &[ExperimentRecord]) -> BTreeMap<(u32, u64), Vec<&ExperimentRecord>> {
    let mut groups: BTreeMap<(u32, u64), Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.d, r.epsilon.to_bits())).or_default().push(r);
    }
    groups
}

pub fn giant_statistics(records: &[&ExperimentRecord]) -> Result<GiantStatistics> {
    let first = records.first().ok_or_else(|| Error::Domain("no records".into()))?;
    let (d, epsilon) = (first.d, first.epsilon);
    if records.iter().any(|r| r.d != d || r.epsilon.to_bits() != epsilon.to_bits()) {
        return domain("records mix different (d, epsilon)");
    }
    let giants: Vec<f64> = records.iter().map(|r| r.giant as f64).collect();
    let (mean_giant, std_giant) = mean_std(&giants);
    let predicted = giant_predicted(d, epsilon);
    let unique = records.iter().filter(|r| r.giant > UNIQUENESS_FACTOR * r.second).count();
    Ok(GiantStatistics {
        d,
        epsilon,
        trials: records.len(),
        mean_giant,
        std_giant,
        predicted,
        ratio: mean_giant / predicted,
        uniqueness_rate: unique as f64 / records.len() as f64,
        uniqueness_factor: UNIQUENESS_FACTOR,
        degenerate: records.iter().all(|r| r.giant == r.vertex_count()),
        epsilon_outside_small_regime: epsilon > SMALL_EPSILON_LIMIT,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub d: u32,
    pub trials: usize,
    pub mean_max_nongiant: f64,
    pub min_max_nongiant: u64,
    pub max_max_nongiant: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub epsilon: f64,
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of the mean max non-giant size against `d`.
    pub linear_slope: f64,
    /// Slope of `ln(mean)` against `ln d`; absent when some mean is zero.
    pub loglog_slope: Option<f64>,
    /// Log-log slope above 1.5.
    pub superlinear: bool,
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Fits how the largest non-giant component grows with `d` at fixed ε.
pub fn second_component_scaling(records: &[&ExperimentRecord]) -> Result<ScalingFit> {
    let first = records.first().ok_or_else(|| Error::Refused("no records".into()))?;
    let epsilon = first.epsilon;
    if records.iter().any(|r| r.epsilon.to_bits() != epsilon.to_bits()) {
        return domain("records mix different epsilon values");
    }
    let mut by_d: BTreeMap<u32, Vec<u64>> = BTreeMap::new();
    for r in records {
        by_d.entry(r.d).or_default().push(r.second);
    }
    if by_d.len() < 3 {
        return Err(Error::Refused(format!("scaling fit needs at least 3 distinct d, got {}", by_d.len())));
    }
    let rows: Vec<ScalingRow> = by_d
        .iter()
        .map(|(&d, sizes)| ScalingRow {
            d,
            trials: sizes.len(),
            mean_max_nongiant: sizes.iter().sum::<u64>() as f64 / sizes.len() as f64,
            min_max_nongiant: *sizes.iter().min().expect("non-empty"),
            max_max_nongiant: *sizes.iter().max().expect("non-empty"),
        })
        .collect();
    let linear: Vec<(f64, f64)> = rows.iter().map(|r| (r.d as f64, r.mean_max_nongiant)).collect();
    let loglog_slope = rows
        .iter()
        .all(|r| r.mean_max_nongiant > 0.0)
        .then(|| least_squares_slope(&linear.iter().map(|&(x, y)| (x.ln(), y.ln())).collect::<Vec<_>>()));
    Ok(ScalingFit {
        epsilon,
        linear_slope: least_squares_slope(&linear),
        superlinear: loglog_slope.is_some_and(|s| s > 1.5),
        loglog_slope,
        rows,
    })
}
