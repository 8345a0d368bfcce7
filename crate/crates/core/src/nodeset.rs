//! Fixed-width bitsets over node indices.

use std::fmt;

const WORD: usize = 64;

/// A set of node indices drawn from `0..capacity`.
///
/// Two sets only compare equal when their capacities match, which keeps
/// sets from different graphs from being confused with each other.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeSet {
    capacity: usize,
    words: Vec<u64>,
}

impl NodeSet {
    pub fn empty(capacity: usize) -> Self {
        NodeSet {
            capacity,
            words: vec![0; capacity.div_ceil(WORD)],
        }
    }

    pub fn full(capacity: usize) -> Self {
        let mut set = NodeSet {
            capacity,
            words: vec![u64::MAX; capacity.div_ceil(WORD)],
        };
        set.trim();
        set
    }

    pub fn singleton(capacity: usize, node: usize) -> Self {
        let mut set = Self::empty(capacity);
        set.insert(node);
        set
    }

    pub fn from_nodes<I: IntoIterator<Item = usize>>(capacity: usize, nodes: I) -> Self {
        let mut set = Self::empty(capacity);
        for node in nodes {
            set.insert(node);
        }
        set
    }

    fn trim(&mut self) {
        let tail = self.capacity % WORD;
        if tail != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
    }

    #[inline]
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Panics when `node >= capacity`.
    #[inline]
    pub fn insert(&mut self, node: usize) -> bool {
        assert!(node < self.capacity, "node {node} out of range {}", self.capacity);
        let (w, b) = (node / WORD, node % WORD);
        let was = self.words[w] >> b & 1 == 1;
        self.words[w] |= 1 << b;
        !was
    }

    #[inline]
    pub fn remove(&mut self, node: usize) -> bool {
        if node >= self.capacity {
            return false;
        }
        let (w, b) = (node / WORD, node % WORD);
        let was = self.words[w] >> b & 1 == 1;
        self.words[w] &= !(1 << b);
        was
    }

    #[inline]
    pub fn contains(&self, node: usize) -> bool {
        node < self.capacity && self.words[node / WORD] >> (node % WORD) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    fn check(&self, other: &NodeSet) {
        assert_eq!(self.capacity, other.capacity, "node sets of different width");
    }

    pub fn union_with(&mut self, other: &NodeSet) {
        self.check(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &NodeSet) {
        self.check(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &NodeSet) {
        self.check(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn symmetric_difference_with(&mut self, other: &NodeSet) {
        self.check(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        let mut out = self.clone();
        out.intersect_with(other);
        out
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        let mut out = self.clone();
        out.difference_with(other);
        out
    }

    pub fn symmetric_difference(&self, other: &NodeSet) -> NodeSet {
        let mut out = self.clone();
        out.symmetric_difference_with(other);
        out
    }

    /// `|self ∩ other|` without allocating.
    pub fn intersection_len(&self, other: &NodeSet) -> usize {
        self.check(other);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// `|self △ other|` without allocating.
    pub fn symmetric_difference_len(&self, other: &NodeSet) -> usize {
        self.check(other);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn intersects(&self, other: &NodeSet) -> bool {
        self.check(other);
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.check(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// The `rank`-th smallest member, if there are that many.
    pub fn select(&self, mut rank: usize) -> Option<usize> {
        for (i, &word) in self.words.iter().enumerate() {
            let ones = word.count_ones() as usize;
            if rank < ones {
                let mut w = word;
                for _ in 0..rank {
                    w &= w - 1;
                }
                return Some(i * WORD + w.trailing_zeros() as usize);
            }
            rank -= ones;
        }
        None
    }

    pub fn first(&self) -> Option<usize> {
        self.select(0)
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

pub struct Iter<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * WORD + bit);
            }
            self.index += 1;
            if self.index >= self.words.len() {
                return None;
            }
            self.current = self.words[self.index];
        }
    }
}

impl<'a> IntoIterator for &'a NodeSet {
    type Item = usize;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}
