//! Fixed-capacity bitset over a dense ground set `0..n`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

/// A subset of the ground set `{0, .., n-1}`.
///
/// Equality is by membership (and capacity). Iteration yields ids in increasing order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ElementSet {
    n: usize,
    words: Vec<u64>,
}

impl ElementSet {
    pub fn empty(n: usize) -> Self {
        ElementSet {
            n,
            words: vec![0; n.div_ceil(WORD)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for j in 0..n {
            s.insert(j);
        }
        s
    }

    /// Builds a set from element ids, rejecting ids `>= n`. Duplicates are merged.
    pub fn from_ids<I: IntoIterator<Item = usize>>(n: usize, ids: I) -> Result<Self> {
        let mut s = Self::empty(n);
        for id in ids {
            if id >= n {
                return Err(Error::ElementOutOfRange { id, n });
            }
            s.insert(id);
        }
        Ok(s)
    }

    /// Builds a set from the low `n` bits of a mask. Requires `n <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        debug_assert!(n <= WORD);
        let mut s = Self::empty(n);
        if n > 0 {
            let keep = if n == WORD { u64::MAX } else { (1u64 << n) - 1 };
            s.words[0] = mask & keep;
        }
        s
    }

    /// Low word of the bitset; meaningful only when `n <= 64`.
    pub fn mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn capacity(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn contains(&self, j: usize) -> bool {
        j < self.n && self.words[j / WORD] & (1u64 << (j % WORD)) != 0
    }

    /// Adds `j`; returns true if it was absent. Panics if `j >= n`.
    pub fn insert(&mut self, j: usize) -> bool {
        assert!(j < self.n, "element {j} out of range for capacity {}", self.n);
        let bit = 1u64 << (j % WORD);
        let w = &mut self.words[j / WORD];
        let fresh = *w & bit == 0;
        *w |= bit;
        fresh
    }

    pub fn remove(&mut self, j: usize) -> bool {
        if j >= self.n {
            return false;
        }
        let bit = 1u64 << (j % WORD);
        let w = &mut self.words[j / WORD];
        let present = *w & bit != 0;
        *w &= !bit;
        present
    }

    pub fn toggle(&mut self, j: usize) {
        assert!(j < self.n);
        self.words[j / WORD] ^= 1u64 << (j % WORD);
    }

    /// Copy of `self` with `j` added.
    pub fn with(&self, j: usize) -> Self {
        let mut s = self.clone();
        s.insert(j);
        s
    }

    pub fn union(&self, other: &ElementSet) -> Self {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn union_with(&mut self, other: &ElementSet) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn intersection(&self, other: &ElementSet) -> Self {
        let mut s = self.clone();
        for (a, b) in s.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
        s
    }

    pub fn difference(&self, other: &ElementSet) -> Self {
        let mut s = self.clone();
        for (a, b) in s.words.iter_mut().zip(&other.words) {
            *a &= !*b;
        }
        s
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            words: &self.words,
            idx: 0,
            cur: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Lexicographic order on the sorted id lists (`{} < {0} < {0,1} < {0,2} < {1}`).
    pub fn lex_cmp(&self, other: &ElementSet) -> Ordering {
        self.iter().cmp(other.iter())
    }
}

#[derive(Clone)]
pub struct Iter<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl Iterator for Iter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let bit = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.idx * WORD + bit);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
    }
}

impl<'a> IntoIterator for &'a ElementSet {
    type Item = usize;
    type IntoIter = Iter<'a>;

    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, j) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_and_iteration() {
        let s = ElementSet::from_ids(130, [3, 64, 129, 3]).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.to_vec(), vec![3, 64, 129]);
        assert!(s.contains(64) && !s.contains(65));
        assert!(ElementSet::from_ids(4, [4]).is_err());
    }

    #[test]
    fn lexicographic_order() {
        let a = ElementSet::from_ids(4, [0, 2]).unwrap();
        let b = ElementSet::from_ids(4, [1]).unwrap();
        let e = ElementSet::empty(4);
        assert_eq!(a.lex_cmp(&b), Ordering::Less);
        assert_eq!(e.lex_cmp(&a), Ordering::Less);
    }

    #[test]
    fn set_algebra() {
        let a = ElementSet::from_ids(70, [1, 2, 68]).unwrap();
        let b = ElementSet::from_ids(70, [2, 3]).unwrap();
        assert_eq!(a.union(&b).to_vec(), vec![1, 2, 3, 68]);
        assert_eq!(a.intersection(&b).to_vec(), vec![2]);
        assert_eq!(a.difference(&b).to_vec(), vec![1, 68]);
        assert!(a.intersection(&b).is_subset(&a));
        assert_eq!(ElementSet::from_mask(3, 0b101).to_vec(), vec![0, 2]);
    }
}
