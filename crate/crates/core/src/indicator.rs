//! Fixed-length bit vector over the candidate variables.

use std::fmt;

const WORD: usize = 64;

/// Inclusion indicator γ: bit `j` set means variable `j` is in the model.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelIndicator {
    words: Vec<u64>,
    len: usize,
    size: usize,
}

impl ModelIndicator {
    /// The empty model over `p` variables.
    pub fn empty(p: usize) -> Self {
        Self {
            words: vec![0; p.div_ceil(WORD)],
            len: p,
            size: 0,
        }
    }

    pub fn from_indices(p: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut m = Self::empty(p);
        for j in indices {
            m.set(j, true);
        }
        m
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self::from_indices(bits.len(), bits.iter().enumerate().filter(|(_, b)| **b).map(|(j, _)| j))
    }

    /// Model whose inclusion pattern is the low `p` bits of `code`.
    pub fn from_code(p: usize, code: u64) -> Self {
        assert!(p <= 64, "code form only covers p <= 64");
        let mut m = Self::empty(p);
        if p > 0 {
            let mask = if p == 64 { u64::MAX } else { (1u64 << p) - 1 };
            m.words[0] = code & mask;
            m.size = m.words[0].count_ones() as usize;
        }
        m
    }

    /// Inverse of [`ModelIndicator::from_code`].
    pub fn code(&self) -> u64 {
        assert!(self.len <= 64);
        self.words.first().copied().unwrap_or(0)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Model size p_γ.
    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        debug_assert!(j < self.len);
        (self.words[j / WORD] >> (j % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, j: usize, on: bool) {
        assert!(j < self.len, "index {j} out of range for {} variables", self.len);
        if self.get(j) != on {
            self.flip(j);
        }
    }

    #[inline]
    pub fn flip(&mut self, j: usize) {
        assert!(j < self.len, "index {j} out of range for {} variables", self.len);
        let w = &mut self.words[j / WORD];
        let bit = 1u64 << (j % WORD);
        if *w & bit == 0 {
            self.size += 1;
        } else {
            self.size -= 1;
        }
        *w ^= bit;
    }

    /// Indices of included variables, ascending.
    pub fn ones(&self) -> Ones<'_> {
        Ones {
            words: &self.words,
            idx: 0,
            cur: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_indices(&self) -> Vec<usize> {
        self.ones().collect()
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|j| self.get(j)).collect()
    }

    /// Number of coordinates where the two models differ.
    pub fn hamming(&self, other: &Self) -> usize {
        assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// `0`/`1` string, variable 0 first.
    pub fn to_bit_string(&self) -> String {
        (0..self.len).map(|j| if self.get(j) { '1' } else { '0' }).collect()
    }

    /// Permute variables: variable `j` of `self` becomes variable `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.len);
        Self::from_indices(self.len, self.ones().map(|j| perm[j]))
    }
}

impl fmt::Debug for ModelIndicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModelIndicator({:?})", self.to_indices())
    }
}

impl fmt::Display for ModelIndicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.ones().map(|j| j.to_string()).collect();
        write!(f, "{{{}}}", idx.join(" "))
    }
}

pub struct Ones<'a> {
    words: &'a [u64],
    idx: usize,
    cur: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.cur != 0 {
                let tz = self.cur.trailing_zeros() as usize;
                self.cur &= self.cur - 1;
                return Some(self.idx * WORD + tz);
            }
            self.idx += 1;
            if self.idx >= self.words.len() {
                return None;
            }
            self.cur = self.words[self.idx];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn flip_tracks_size() {
        let mut m = ModelIndicator::empty(130);
        m.flip(0);
        m.flip(64);
        m.flip(129);
        assert_eq!(m.size(), 3);
        assert_eq!(m.to_indices(), vec![0, 64, 129]);
        m.flip(64);
        assert_eq!(m.size(), 2);
        assert!(!m.get(64));
    }

    #[test]
    fn code_round_trip() {
        let m = ModelIndicator::from_code(5, 0b10110);
        assert_eq!(m.to_indices(), vec![1, 2, 4]);
        assert_eq!(m.code(), 0b10110);
        assert_eq!(m.to_bit_string(), "01101");
    }

    proptest! {
        #[test]
        fn size_equals_popcount(bits in proptest::collection::vec(any::<bool>(), 1..300)) {
            let m = ModelIndicator::from_bools(&bits);
            prop_assert_eq!(m.size(), bits.iter().filter(|b| **b).count());
            prop_assert_eq!(m.to_bools(), bits);
            prop_assert!(m.size() <= m.len());
        }
    }
}
