//! The implicit hypercube `Q^d` and its subcube constructions.
//!
//! Vertices are `d`-bit labels; coordinate `i` is bit `i`. Two vertices are adjacent
//! exactly when their labels differ in one bit.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Largest ambient dimension representable with `u64` labels.
pub const MAX_DIMENSION: u32 = 63;

/// A hypercube vertex label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vertex(pub u64);

impl Vertex {
    #[inline]
    pub fn label(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn flip(self, coordinate: u32) -> Vertex {
        Vertex(self.0 ^ (1u64 << coordinate))
    }

    #[inline]
    pub fn coordinate(self, i: u32) -> bool {
        (self.0 >> i) & 1 == 1
    }
}

impl From<u64> for Vertex {
    fn from(label: u64) -> Self {
        Vertex(label)
    }
}

/// Number of coordinates on which `u` and `v` differ.
#[inline]
pub fn hamming_distance(u: Vertex, v: Vertex) -> u32 {
    (u.0 ^ v.0).count_ones()
}

/// The `d`-dimensional hypercube, `n = 2^d` vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypercube {
    d: u32,
}

impl Hypercube {
    pub fn new(d: u32) -> Result<Self> {
        if d == 0 || d > MAX_DIMENSION {
            return domain(format!("dimension {d} outside 1..={MAX_DIMENSION}"));
        }
        Ok(Self { d })
    }

    #[inline]
    pub fn dimension(&self) -> u32 {
        self.d
    }

    #[inline]
    pub fn order(&self) -> u64 {
        1u64 << self.d
    }

    #[inline]
    pub fn contains(&self, v: Vertex) -> bool {
        v.0 < self.order()
    }

    pub fn check(&self, v: Vertex) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            domain(format!("vertex {} outside Q^{}", v.0, self.d))
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = Vertex> {
        (0..self.order()).map(Vertex)
    }

    pub fn whole(&self) -> Subcube {
        Subcube { fixed_mask: 0, fixed_values: 0, ambient_d: self.d }
    }

    /// The `d` vertices adjacent to `v`, in increasing coordinate order.
    pub fn neighbors(&self, v: Vertex) -> Result<Vec<Vertex>> {
        self.check(v)?;
        Ok((0..self.d).map(|i| v.flip(i)).collect())
    }

    /// Vertices at Hamming distance exactly two from `v`; empty when `d < 2`.
    pub fn sphere2(&self, v: Vertex) -> Result<Vec<Vertex>> {
        self.check(v)?;
        let mut out = Vec::with_capacity((self.d as usize * self.d.saturating_sub(1) as usize) / 2);
        for i in 0..self.d {
            for j in i + 1..self.d {
                out.push(Vertex(v.0 ^ (1 << i) ^ (1 << j)));
            }
        }
        Ok(out)
    }

    /// Number of vertices adjacent to both `u` and `v`.
    pub fn common_neighbors(&self, u: Vertex, v: Vertex) -> Result<u32> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return domain("common_neighbors needs distinct vertices");
        }
        Ok(if hamming_distance(u, v) == 2 { 2 } else { 0 })
    }

    /// Splits `S` (`1 <= |S| <= d`, distinct) into pairwise disjoint subcubes of dimension
    /// at least `d - |S| + 1`, each holding exactly one vertex of `S`.
    ///
    /// Pairs come back in the order of `S`. At each step the two smallest labels still sharing
    /// a subcube are split on their lowest differing coordinate.
    pub fn separate_into_subcubes(&self, set: &[Vertex]) -> Result<Vec<(Subcube, Vertex)>> {
        let k = set.len();
        if k == 0 || k > self.d as usize {
            return domain(format!("separation needs 1 <= |S| <= d, got |S| = {k}, d = {}", self.d));
        }
        for &v in set {
            self.check(v)?;
        }
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return domain("separation needs distinct vertices");
        }

        let mut done = Vec::with_capacity(k);
        let mut pending = vec![(self.whole(), sorted)];
        while let Some((cube, members)) = pending.pop() {
            if members.len() == 1 {
                done.push((cube, members[0]));
                continue;
            }
            let coordinate = (members[0].0 ^ members[1].0).trailing_zeros();
            let (zero, one): (Vec<_>, Vec<_>) = members.into_iter().partition(|v| !v.coordinate(coordinate));
            pending.push((cube.fix(coordinate, true), one));
            pending.push((cube.fix(coordinate, false), zero));
        }
        done.sort_by_key(|&(_, v)| set.iter().position(|&s| s == v));
        Ok(done)
    }

    /// `m` pairwise disjoint subcubes of `host`, each adjacent to `v` through one of the first `m`
    /// free coordinates of `host`.
    ///
    /// With `v` translated to the origin, subcube `j` fixes free coordinate `j` to one and the
    /// other `m - 1` leading free coordinates to zero. Each pair carries the neighbour of `v` it
    /// contains.
    pub fn build_pivot_subcubes(&self, host: &Subcube, v: Vertex, m: usize) -> Result<Vec<(Subcube, Vertex)>> {
        if host.ambient_d != self.d {
            return domain("host subcube lives in a different ambient cube");
        }
        self.check(v)?;
        if !host.contains(v) {
            return domain(format!("vertex {} not in host subcube", v.0));
        }
        let free: Vec<u32> = host.free_coordinates().take(m).collect();
        if free.len() < m {
            return domain(format!("m = {m} exceeds host dimension {}", host.dimension()));
        }
        let lead_mask = free.iter().fold(0u64, |acc, &c| acc | (1 << c));
        Ok(free
            .iter()
            .map(|&c| {
                let pivot = v.flip(c);
                let cube = Subcube {
                    fixed_mask: host.fixed_mask | lead_mask,
                    fixed_values: host.fixed_values | (pivot.0 & lead_mask),
                    ambient_d: self.d,
                };
                (cube, pivot)
            })
            .collect())
    }
}

/// The vertices of `Q^d` agreeing with `fixed_values` on `fixed_mask`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subcube {
    fixed_mask: u64,
    fixed_values: u64,
    ambient_d: u32,
}

impl Subcube {
    pub fn new(ambient_d: u32, fixed_mask: u64, fixed_values: u64) -> Result<Self> {
        if ambient_d == 0 || ambient_d > MAX_DIMENSION {
            return domain(format!("dimension {ambient_d} outside 1..={MAX_DIMENSION}"));
        }
        if fixed_mask >> ambient_d != 0 {
            return domain("fixed mask has coordinates beyond the ambient dimension");
        }
        if fixed_values & !fixed_mask != 0 {
            return domain("fixed values set outside the fixed mask");
        }
        Ok(Self { fixed_mask, fixed_values, ambient_d })
    }

    pub fn fixed_mask(&self) -> u64 {
        self.fixed_mask
    }

    pub fn fixed_values(&self) -> u64 {
        self.fixed_values
    }

    pub fn ambient_dimension(&self) -> u32 {
        self.ambient_d
    }

    pub fn dimension(&self) -> u32 {
        self.ambient_d - self.fixed_mask.count_ones()
    }

    pub fn order(&self) -> u64 {
        1u64 << self.dimension()
    }

    #[inline]
    pub fn contains(&self, v: Vertex) -> bool {
        v.0 >> self.ambient_d == 0 && v.0 & self.fixed_mask == self.fixed_values
    }

    /// Free coordinates in increasing index order.
    pub fn free_coordinates(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.ambient_d).filter(move |&i| self.fixed_mask >> i & 1 == 0)
    }

    /// Two subcubes are disjoint iff they are both fixed on some coordinate with opposite values.
    pub fn is_disjoint(&self, other: &Subcube) -> bool {
        let both = self.fixed_mask & other.fixed_mask;
        (self.fixed_values ^ other.fixed_values) & both != 0
    }

    fn fix(&self, coordinate: u32, value: bool) -> Subcube {
        let bit = 1u64 << coordinate;
        debug_assert_eq!(self.fixed_mask & bit, 0);
        Subcube {
            fixed_mask: self.fixed_mask | bit,
            fixed_values: if value { self.fixed_values | bit } else { self.fixed_values },
            ambient_d: self.ambient_d,
        }
    }

    /// Enumerates the members; only sensible for small subcubes.
    pub fn vertices(&self) -> impl Iterator<Item = Vertex> + '_ {
        let free: Vec<u32> = self.free_coordinates().collect();
        (0..self.order()).map(move |idx| {
            let mut label = self.fixed_values;
            for (b, &c) in free.iter().enumerate() {
                label |= ((idx >> b) & 1) << c;
            }
            Vertex(label)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(d: u32) -> Hypercube {
        Hypercube::new(d).unwrap()
    }

    fn labels(vs: &[Vertex]) -> Vec<u64> {
        let mut out: Vec<u64> = vs.iter().map(|v| v.0).collect();
        out.sort();
        out
    }

    #[test]
    fn neighbor_examples() {
        assert_eq!(labels(&q(3).neighbors(Vertex(0)).unwrap()), vec![0b001, 0b010, 0b100]);
        assert_eq!(labels(&q(1).neighbors(Vertex(0)).unwrap()), vec![1]);
        assert_eq!(labels(&q(4).neighbors(Vertex(0b1010)).unwrap()), vec![0b0010, 0b1000, 0b1011, 0b1110]);
        assert!(q(3).neighbors(Vertex(8)).is_err());
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_distance(Vertex(0), Vertex(0)), 0);
        assert_eq!(hamming_distance(Vertex(0), Vertex(0b111)), 3);
        assert_eq!(hamming_distance(Vertex(0b0110), Vertex(0b0101)), 2);
    }

    #[test]
    fn sphere2_examples() {
        let cube = q(4);
        let s = cube.sphere2(Vertex(0)).unwrap();
        assert_eq!(s.len(), 6);
        assert!(s.iter().all(|v| v.0.count_ones() == 2));
        assert_eq!(labels(&q(2).sphere2(Vertex(0)).unwrap()), vec![0b11]);
        // brute force over Q^3
        let brute: Vec<Vertex> = q(3).vertices().filter(|&u| hamming_distance(u, Vertex(0b101)) == 2).collect();
        assert_eq!(labels(&q(3).sphere2(Vertex(0b101)).unwrap()), labels(&brute));
        assert_eq!(labels(&brute), vec![0b000, 0b011, 0b110]);
        assert!(q(1).sphere2(Vertex(0)).unwrap().is_empty());
    }

    #[test]
    fn common_neighbor_examples() {
        assert_eq!(q(3).common_neighbors(Vertex(0), Vertex(0b011)).unwrap(), 2);
        assert_eq!(q(3).common_neighbors(Vertex(0), Vertex(0b001)).unwrap(), 0);
        let cube = q(5);
        let (u, v) = (Vertex(0), Vertex(0b11110));
        let brute = cube
            .vertices()
            .filter(|&w| hamming_distance(w, u) == 1 && hamming_distance(w, v) == 1)
            .count();
        assert_eq!(brute, 0);
        assert_eq!(cube.common_neighbors(u, v).unwrap(), 0);
        assert!(cube.common_neighbors(u, u).is_err());
    }

    fn assert_separated(cube: Hypercube, set: &[Vertex], pairs: &[(Subcube, Vertex)]) {
        let k = set.len() as u32;
        assert_eq!(pairs.len(), set.len());
        for (i, (a, va)) in pairs.iter().enumerate() {
            assert_eq!(*va, set[i]);
            assert!(a.dimension() >= cube.dimension() - k + 1);
            let inside: Vec<_> = set.iter().filter(|&&s| a.contains(s)).collect();
            assert_eq!(inside, vec![va]);
            for (b, _) in &pairs[i + 1..] {
                assert!(a.is_disjoint(b));
                // exhaustive membership, small cubes only
                if cube.dimension() <= 8 {
                    assert!(cube.vertices().all(|v| !(a.contains(v) && b.contains(v))));
                }
            }
        }
    }

    #[test]
    fn separation_examples() {
        let cube = q(5);
        let one = cube.separate_into_subcubes(&[Vertex(0)]).unwrap();
        assert_eq!(one, vec![(cube.whole(), Vertex(0))]);

        let cube = q(3);
        let set = [Vertex(0), Vertex(0b111)];
        let pairs = cube.separate_into_subcubes(&set).unwrap();
        assert_separated(cube, &set, &pairs);
        assert_eq!(pairs[0].0, Subcube::new(3, 1, 0).unwrap());
        assert_eq!(pairs[1].0, Subcube::new(3, 1, 1).unwrap());

        let cube = q(4);
        let set = [Vertex(0), Vertex(0b0011), Vertex(0b1100)];
        let pairs = cube.separate_into_subcubes(&set).unwrap();
        assert_separated(cube, &set, &pairs);
        assert!(pairs.iter().all(|(s, _)| s.dimension() >= 2));
    }

    #[test]
    fn separation_errors() {
        let cube = q(3);
        assert!(cube.separate_into_subcubes(&[]).is_err());
        assert!(cube.separate_into_subcubes(&[Vertex(0), Vertex(1), Vertex(2), Vertex(3)]).is_err());
        assert!(cube.separate_into_subcubes(&[Vertex(1), Vertex(1)]).is_err());
        assert!(cube.separate_into_subcubes(&[Vertex(9)]).is_err());
    }

    #[test]
    fn pivot_examples() {
        let cube = q(4);
        let pivots = cube.build_pivot_subcubes(&cube.whole(), Vertex(0), 2).unwrap();
        assert_eq!(pivots.len(), 2);
        assert_eq!(pivots[0].0, Subcube::new(4, 0b11, 0b01).unwrap());
        assert_eq!(pivots[0].1, Vertex(0b0001));
        assert_eq!(pivots[1].0, Subcube::new(4, 0b11, 0b10).unwrap());
        assert_eq!(pivots[1].1, Vertex(0b0010));
        for (s, pivot) in &pivots {
            assert_eq!(s.dimension(), 2);
            assert!(s.contains(*pivot));
        }
        assert!(cube.vertices().all(|v| !(pivots[0].0.contains(v) && pivots[1].0.contains(v))));

        // dimension-3 host inside Q^5, its origin is the smallest member
        let cube = q(5);
        let host = Subcube::new(5, 0b10010, 0b10000).unwrap();
        let origin = host.vertices().min().unwrap();
        let pivots = cube.build_pivot_subcubes(&host, origin, 1).unwrap();
        assert_eq!(pivots.len(), 1);
        assert_eq!(pivots[0].0.dimension(), 2);
        assert_eq!(pivots[0].1, origin.flip(0));

        let pivots = cube.build_pivot_subcubes(&cube.whole(), Vertex(0), 5).unwrap();
        assert_eq!(pivots.len(), 5);
        for (i, (s, pivot)) in pivots.iter().enumerate() {
            assert_eq!(s.order(), 1);
            assert_eq!(s.vertices().collect::<Vec<_>>(), vec![*pivot]);
            assert_eq!(hamming_distance(*pivot, Vertex(0)), 1);
            for (t, _) in &pivots[i + 1..] {
                assert!(s.is_disjoint(t));
            }
        }
    }

    #[test]
    fn pivots_translate_nonzero_origin() {
        let cube = q(6);
        let v = Vertex(0b101101);
        let pivots = cube.build_pivot_subcubes(&cube.whole(), v, 3).unwrap();
        for (i, (s, pivot)) in pivots.iter().enumerate() {
            assert!(s.contains(*pivot));
            assert!(!s.contains(v));
            assert_eq!(hamming_distance(*pivot, v), 1);
            assert_eq!(s.dimension(), 3);
            for (t, _) in &pivots[i + 1..] {
                assert!(cube.vertices().all(|x| !(s.contains(x) && t.contains(x))));
            }
        }
    }

    #[test]
    fn pivot_errors() {
        let cube = q(4);
        assert!(cube.build_pivot_subcubes(&cube.whole(), Vertex(0), 5).is_err());
        let host = Subcube::new(4, 1, 1).unwrap();
        assert!(cube.build_pivot_subcubes(&host, Vertex(0), 1).is_err());
    }

    #[test]
    fn subcube_validation() {
        assert!(Subcube::new(3, 0b001, 0b010).is_err());
        assert!(Subcube::new(3, 0b1000, 0).is_err());
        let s = Subcube::new(4, 0b0101, 0b0001).unwrap();
        assert_eq!(s.dimension(), 2);
        assert_eq!(s.vertices().count(), 4);
        assert!(s.vertices().all(|v| s.contains(v)));
        assert_eq!(q(4).vertices().filter(|&v| s.contains(v)).count(), 4);
    }
}
