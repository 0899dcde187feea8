//! Binomial upper tails and the comparison against an `exp(-k/100)` bound.
//!
//! Point masses use Loader's saddle-point expansion (Stirling remainder plus the deviance
//! term `bd0`), which keeps relative accuracy near machine precision for large `m`; tails are
//! summed outward from the threshold with the term ratio and Neumaier compensation.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

// stirlerr(n) = ln(n!) - ln(sqrt(2πn) (n/e)^n), tabulated at half-integers up to 15;
// callers only pass integers
const STIRLERR_HALVES: [f64; 31] = [
    0.0,
    0.15342640972002734529,
    0.08106146679532725822,
    0.054814121051917653896,
    0.041340695955409294094,
    0.033162873519936287485,
    0.027677925684998339149,
    0.023746163656297495971,
    0.020790672103765093112,
    0.018488450532673185231,
    0.016644691189821192163,
    0.015134973221917378874,
    0.013876128823070747999,
    0.012810465242920226924,
    0.011896709945891770095,
    0.011104559758206917327,
    0.010411265261972096497,
    0.0097994161261588032984,
    0.0092554621827127329177,
    0.008768700134139385463,
    0.0083305634333628712565,
    0.0079341145643140205472,
    0.007573675487951840795,
    0.0072445543013203831795,
    0.0069428401072095298657,
    0.0066652470327076824424,
    0.0064089941880042070684,
    0.0061717122630394576475,
    0.0059513701127588477356,
    0.005746216513010115682,
    0.005554733551962801371,
];

fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        debug_assert_eq!(n, n.floor(), "integer arguments only");
        return STIRLERR_HALVES[(n + n) as usize];
    }
    let nn = n * n;
    if n > 500.0 {
        return (S0 - S1 / nn) / n;
    }
    if n > 80.0 {
        return (S0 - (S1 - S2 / nn) / nn) / n;
    }
    if n > 35.0 {
        return (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n;
    }
    (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
}

/// Deviance term `x ln(x/np) + np - x`, evaluated without cancellation.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// `P[Bin(m, q) = x]` by Loader's method.
pub fn binomial_pmf(x: u64, m: u64, q: f64) -> f64 {
    if x > m {
        return 0.0;
    }
    if q == 0.0 {
        return if x == 0 { 1.0 } else { 0.0 };
    }
    if q == 1.0 {
        return if x == m { 1.0 } else { 0.0 };
    }
    let (xf, mf) = (x as f64, m as f64);
    let r = 1.0 - q;
    if x == 0 {
        return (mf * (-q).ln_1p()).exp();
    }
    if x == m {
        return (mf * q.ln()).exp();
    }
    let lc = stirlerr(mf) - stirlerr(xf) - stirlerr(mf - xf) - bd0(xf, mf * q) - bd0(mf - xf, mf * r);
    let lf = std::f64::consts::LN_2 + std::f64::consts::PI.ln() + xf.ln() + (-xf / mf).ln_1p();
    (lc - 0.5 * lf).exp()
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

// Sums pmf(j) from `start` outward, away from the mode, until terms stop contributing.
fn sum_away_from_mode(m: u64, q: f64, start: u64, upward: bool) -> f64 {
    let odds = q / (1.0 - q);
    let mut term = binomial_pmf(start, m, q);
    let mut acc = Neumaier::default();
    let mut j = start;
    loop {
        acc.add(term);
        if term == 0.0 || term < acc.value() * 1e-18 {
            break;
        }
        if upward {
            if j == m {
                break;
            }
            term *= (m - j) as f64 / (j + 1) as f64 * odds;
            j += 1;
        } else {
            if j == 0 {
                break;
            }
            term *= j as f64 / (m - j + 1) as f64 / odds;
            j -= 1;
        }
    }
    acc.value()
}

/// Exact `P[Bin(m, q) >= k]`.
pub fn binomial_tail(m: u64, q: f64, k: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return domain(format!("success probability {q} outside [0, 1]"));
    }
    if k > m {
        return domain(format!("threshold {k} exceeds trial count {m}"));
    }
    if k == 0 {
        return Ok(1.0);
    }
    if q == 0.0 {
        return Ok(0.0);
    }
    if q == 1.0 {
        return Ok(1.0);
    }
    let mean = m as f64 * q;
    let value = if k as f64 > mean {
        sum_away_from_mode(m, q, k, true)
    } else {
        1.0 - sum_away_from_mode(m, q, k - 1, false)
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Exact binomial tail beside `exp(-k/100)` for components of size `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailComparison {
    pub k: u64,
    pub d: u32,
    pub epsilon: f64,
    /// `ceil(9kd/10) + k`.
    pub trials: u64,
    /// `(1+ε)/d`.
    pub q: f64,
    pub exact_tail: f64,
    pub chernoff_value: f64,
    pub bound_holds: bool,
}

/// Trial count `9kd/10 + k`, rounded up when `kd` is not a multiple of ten.
pub fn expansion_trials(k: u64, d: u32) -> u64 {
    (9 * k * d as u64).div_ceil(10) + k
}

pub fn chernoff_comparison(k: u64, d: u32, epsilon: f64) -> Result<TailComparison> {
    if k == 0 {
        return domain("component size must be at least 1");
    }
    if d == 0 {
        return domain("degree must be positive");
    }
    let q = (1.0 + epsilon) / d as f64;
    let trials = expansion_trials(k, d);
    let exact_tail = binomial_tail(trials, q, k)?;
    let chernoff_value = (-(k as f64) / 100.0).exp();
    Ok(TailComparison { k, d, epsilon, trials, q, exact_tail, chernoff_value, bound_holds: exact_tail <= chernoff_value })
}
