use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Decomposition of `p = (1+ε)/d` into two exposure rounds with `(1-p1)(1-p2) = 1-p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoRoundPlan {
    pub epsilon: f64,
    pub d: u32,
    pub p: f64,
    pub p1: f64,
    pub p2: f64,
}

/// Largest tolerated floating-point defect in `(1-p1)(1-p2) = 1-p`.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

impl TwoRoundPlan {
    pub fn new(epsilon: f64, d: u32) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return domain(format!("epsilon {epsilon} outside (0, 1)"));
        }
        if d < 2 {
            return domain(format!("two-round plan needs d >= 2, got {d}"));
        }
        let df = d as f64;
        let p = (1.0 + epsilon) / df;
        let p1 = (1.0 + epsilon / 2.0) / df;
        let p2 = epsilon / (2.0 * df - 2.0 - epsilon);
        if !(0.0 < p2 && p2 < p1 && p1 < p && p < 1.0) {
            return domain(format!("round probabilities out of order: p2={p2}, p1={p1}, p={p}"));
        }
        let plan = Self { epsilon, d, p, p1, p2 };
        let defect = plan.identity_defect();
        if defect > IDENTITY_TOLERANCE {
            return domain(format!("(1-p1)(1-p2) misses 1-p by {defect:e}"));
        }
        Ok(plan)
    }

    /// `|(1-p1)(1-p2) - (1-p)|`.
    pub fn identity_defect(&self) -> f64 {
        ((1.0 - self.p1) * (1.0 - self.p2) - (1.0 - self.p)).abs()
    }
}

/// Retention probability of a union of independent samples.
pub fn union_probability(a: f64, b: f64) -> f64 {
    1.0 - (1.0 - a) * (1.0 - b)
}
