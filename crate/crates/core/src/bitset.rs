//! Word-packed bit sets, one bit per vertex label.

/// A fixed-length set of bits backed by `u64` words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    words: Vec<u64>,
    len: u64,
}

impl BitSet {
    pub fn new(len: u64) -> Self {
        let words = len.div_ceil(64) as usize;
        Self { words: vec![0; words], len }
    }

    pub fn full(len: u64) -> Self {
        let mut set = Self::new(len);
        for w in &mut set.words {
            *w = !0;
        }
        set.clear_tail();
        set
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> u64 {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, i: u64) -> bool {
        debug_assert!(i < self.len);
        (self.words[(i >> 6) as usize] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: u64) {
        debug_assert!(i < self.len);
        self.words[(i >> 6) as usize] |= 1 << (i & 63);
    }

    #[inline]
    pub fn remove(&mut self, i: u64) {
        debug_assert!(i < self.len);
        self.words[(i >> 6) as usize] &= !(1 << (i & 63));
    }

    /// Sets bit `i` and reports whether it was previously clear.
    #[inline]
    pub fn test_and_set(&mut self, i: u64) -> bool {
        let word = &mut self.words[(i >> 6) as usize];
        let mask = 1 << (i & 63);
        let fresh = *word & mask == 0;
        *word |= mask;
        fresh
    }

    pub fn from_ones(len: u64, ones: impl IntoIterator<Item = u64>) -> Self {
        let mut set = Self::new(len);
        for i in ones {
            set.insert(i);
        }
        set
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn union_with(&mut self, other: &BitSet) {
        assert_eq!(self.len, other.len, "bit set length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Iterates over the set bits in increasing order.
    pub fn ones(&self) -> Ones<'_> {
        Ones { words: &self.words, index: 0, current: self.words.first().copied().unwrap_or(0) }
    }
}

impl std::fmt::Debug for BitSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BitSet").field("len", &self.len).field("ones", &self.count_ones()).finish()
    }
}

pub struct Ones<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Ones<'_> {
    type Item = u64;

    #[inline]
    fn next(&mut self) -> Option<u64> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as u64;
                self.current &= self.current - 1;
                return Some(((self.index as u64) << 6) | bit);
            }
            self.index += 1;
            self.current = *self.words.get(self.index)?;
        }
    }
}

/// Constant-time rank queries over a bit set: the number of set bits below a position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankIndex {
    bits: BitSet,
    prefix: Vec<u64>,
}

impl RankIndex {
    pub fn new(bits: BitSet) -> Self {
        let mut prefix = Vec::with_capacity(bits.words.len() + 1);
        let mut acc = 0u64;
        for w in &bits.words {
            prefix.push(acc);
            acc += w.count_ones() as u64;
        }
        prefix.push(acc);
        Self { bits, prefix }
    }

    pub fn bits(&self) -> &BitSet {
        &self.bits
    }

    pub fn ones(&self) -> u64 {
        *self.prefix.last().unwrap_or(&0)
    }

    /// Rank of `i` among the set bits, or `None` when bit `i` is clear.
    #[inline]
    pub fn rank(&self, i: u64) -> Option<u64> {
        if i >= self.bits.len || !self.bits.contains(i) {
            return None;
        }
        let w = (i >> 6) as usize;
        let below = self.bits.words[w] & ((1u64 << (i & 63)) - 1);
        Some(self.prefix[w] + below.count_ones() as u64)
    }
}
