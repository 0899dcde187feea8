use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::error::{domain, Error, Result};
use crate::graph::GraphOracle;
use crate::hypercube::{Hypercube, Vertex};
use crate::percolation::plan::union_probability;
use crate::rng::KeyedCoin;

/// Largest dimension the sampler will allocate a membership array for.
pub const MAX_SAMPLE_DIMENSION: u32 = 32;

/// How a sample came to be; only keyed samples can be regenerated from a seed alone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleOrigin {
    Keyed { seed: u64 },
    Union { left: Box<SampleOrigin>, right: Box<SampleOrigin> },
    Explicit,
}

/// A random vertex subset `R`: one membership bit per vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct PercolationSample {
    membership: BitSet,
    p: f64,
    origin: SampleOrigin,
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        domain(format!("retention probability {p} outside [0, 1]"))
    }
}

/// Retains each vertex of `Q^d` independently with probability `p`, keyed on `(seed, label)`.
pub fn sample_sites(d: u32, p: f64, seed: u64) -> Result<PercolationSample> {
    let cube = Hypercube::new(d)?;
    if d > MAX_SAMPLE_DIMENSION {
        return Err(Error::Resource(format!("refusing to allocate 2^{d} membership bits")));
    }
    PercolationSample::keyed(cube.order(), p, seed)
}

/// Bitwise union of two samples over the same vertex set.
pub fn union_samples(a: &PercolationSample, b: &PercolationSample) -> Result<PercolationSample> {
    if a.universe() != b.universe() {
        return domain(format!("union of samples over {} and {} vertices", a.universe(), b.universe()));
    }
    let mut membership = a.membership.clone();
    membership.union_with(&b.membership);
    Ok(PercolationSample {
        membership,
        p: union_probability(a.p, b.p),
        origin: SampleOrigin::Union { left: Box::new(a.origin.clone()), right: Box::new(b.origin.clone()) },
    })
}

impl PercolationSample {
    /// Keyed sample over vertices `0..universe`.
    pub fn keyed(universe: u64, p: f64, seed: u64) -> Result<Self> {
        check_probability(p)?;
        let coin = KeyedCoin::new(seed, p);
        let mut membership = BitSet::new(universe);
        for v in 0..universe {
            if coin.flip(v) {
                membership.insert(v);
            }
        }
        Ok(Self { membership, p, origin: SampleOrigin::Keyed { seed } })
    }

    /// Keyed sample sized for an arbitrary oracle.
    pub fn for_graph<G: GraphOracle>(graph: &G, p: f64, seed: u64) -> Result<Self> {
        Self::keyed(graph.vertex_count(), p, seed)
    }

    /// A hand-built sample; `p` is recorded as given.
    pub fn from_vertices(universe: u64, p: f64, vertices: impl IntoIterator<Item = Vertex>) -> Result<Self> {
        check_probability(p)?;
        let mut membership = BitSet::new(universe);
        for v in vertices {
            if v.0 >= universe {
                return domain(format!("vertex {} outside 0..{universe}", v.0));
            }
            membership.insert(v.0);
        }
        Ok(Self { membership, p, origin: SampleOrigin::Explicit })
    }

    pub fn empty(universe: u64) -> Self {
        Self { membership: BitSet::new(universe), p: 0.0, origin: SampleOrigin::Explicit }
    }

    pub fn full(universe: u64) -> Self {
        Self { membership: BitSet::full(universe), p: 1.0, origin: SampleOrigin::Explicit }
    }

    pub fn universe(&self) -> u64 {
        self.membership.len()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn origin(&self) -> &SampleOrigin {
        &self.origin
    }

    /// The seed for keyed samples.
    pub fn seed(&self) -> Option<u64> {
        match self.origin {
            SampleOrigin::Keyed { seed } => Some(seed),
            _ => None,
        }
    }

    pub fn membership(&self) -> &BitSet {
        &self.membership
    }

    #[inline]
    pub fn is_retained(&self, v: Vertex) -> bool {
        self.membership.contains(v.0)
    }

    pub fn retained_count(&self) -> u64 {
        self.membership.count_ones()
    }

    /// Retained vertices in increasing label order.
    pub fn retained(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.membership.ones().map(Vertex)
    }

    /// Adds vertices, e.g. to plant a structure for checker tests.
    pub fn insert(&mut self, v: Vertex) -> Result<()> {
        if v.0 >= self.universe() {
            return domain(format!("vertex {} outside 0..{}", v.0, self.universe()));
        }
        self.membership.insert(v.0);
        self.origin = SampleOrigin::Explicit;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extreme_probabilities() {
        let all = sample_sites(3, 1.0, 77).unwrap();
        assert_eq!(all.retained_count(), 8);
        let none = sample_sites(3, 0.0, 77).unwrap();
        assert_eq!(none.retained_count(), 0);
        assert!(sample_sites(3, 1.5, 0).is_err());
        assert!(sample_sites(3, -0.1, 0).is_err());
        assert!(sample_sites(0, 0.5, 0).is_err());
        assert!(matches!(sample_sites(40, 0.5, 0), Err(Error::Resource(_))));
    }

    #[test]
    fn same_key_same_bits() {
        let a = sample_sites(12, 0.3, 5).unwrap();
        let b = sample_sites(12, 0.3, 5).unwrap();
        let c = sample_sites(12, 0.3, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.membership(), c.membership());
        assert_eq!(a.seed(), Some(5));
    }

    #[test]
    fn half_retention_concentrates() {
        // 4 standard deviations around 2^19, 100 seeds (full 1000-seed sweep lives in the integration tests)
        let n = 1u64 << 20;
        let sd = (n as f64 * 0.25).sqrt();
        let within = (0..100)
            .filter(|&seed| {
                let count = sample_sites(20, 0.5, seed).unwrap().retained_count() as f64;
                (count - n as f64 / 2.0).abs() <= 4.0 * sd
            })
            .count();
        assert!(within >= 99, "{within}/100 within 4 sd");
    }

    #[test]
    fn union_examples() {
        let x = sample_sites(6, 0.4, 1).unwrap();
        let empty = PercolationSample::empty(64);
        assert_eq!(union_samples(&empty, &x).unwrap().membership(), x.membership());
        assert_eq!(union_samples(&x, &x).unwrap().membership(), x.membership());
        let plan = crate::TwoRoundPlan::new(0.1, 10).unwrap();
        let a = sample_sites(10, plan.p1, 1).unwrap();
        let b = sample_sites(10, plan.p2, 2).unwrap();
        let u = union_samples(&a, &b).unwrap();
        assert!((u.p() - 0.11).abs() < 1e-15);
        assert_eq!(u.seed(), None);
        assert!(union_samples(&x, &PercolationSample::empty(32)).is_err());
    }

    #[test]
    fn explicit_samples_validate() {
        assert!(PercolationSample::from_vertices(4, 0.5, [Vertex(4)]).is_err());
        let s = PercolationSample::from_vertices(4, 0.5, [Vertex(0), Vertex(3)]).unwrap();
        assert_eq!(s.retained().collect::<Vec<_>>(), vec![Vertex(0), Vertex(3)]);
    }
}
