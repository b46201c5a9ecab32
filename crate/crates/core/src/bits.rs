//! Fixed-width bit sets over grid sites.
//!
//! Everything downstream (occupancy vectors, stripe masks, neighbor masks)
//! is a `SiteSet`; enumeration and MCMC hot loops reduce to word-wise
//! AND/OR/XOR plus popcounts.

use serde::{Deserialize, Serialize};

/// A set of site indices, packed 64 per word. Bit `i` of word `i / 64`
/// corresponds to site index `i`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteSet {
    words: Box<[u64]>,
}

impl SiteSet {
    pub fn empty(n_sites: usize) -> Self {
        let n_words = n_sites.div_ceil(64).max(1);
        Self {
            words: vec![0u64; n_words].into_boxed_slice(),
        }
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.words[i >> 6] |= 1u64 << (i & 63);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.words[i >> 6] &= !(1u64 << (i & 63));
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// True iff `self` and `other` share no site.
    #[inline]
    pub fn is_disjoint(&self, other: &SiteSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & b == 0)
    }

    /// Number of sites in the intersection.
    #[inline]
    pub fn intersection_len(&self, other: &SiteSet) -> usize {
        self.words
            .iter()
            .zip(other.words.iter())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// True iff the two sets agree on every site of `mask`.
    #[inline]
    pub fn eq_on(&self, other: &SiteSet, mask: &SiteSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .zip(mask.words.iter())
            .all(|((a, b), m)| (a ^ b) & m == 0)
    }

    pub fn union_with(&mut self, other: &SiteSet) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a |= b;
        }
    }

    pub fn subtract(&mut self, other: &SiteSet) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a &= !b;
        }
    }

    pub fn intersect_with(&mut self, other: &SiteSet) {
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a &= b;
        }
    }

    /// Indices of the contained sites, ascending.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some((wi << 6) | b)
                }
            })
        })
    }

    /// Packs the set into a single `u64`; only valid for site counts ≤ 64.
    pub fn as_u64(&self) -> u64 {
        debug_assert!(self.words.iter().skip(1).all(|&w| w == 0));
        self.words[0]
    }

    pub fn from_u64(n_sites: usize, bits: u64) -> Self {
        let mut s = Self::empty(n_sites);
        s.words[0] = bits;
        s
    }

    /// Lowercase hex literal, most significant nibble first, exactly
    /// `ceil(n_sites / 4)` digits. Bit `i` is site `i`.
    pub fn to_hex(&self, n_sites: usize) -> String {
        let digits = n_sites.div_ceil(4).max(1);
        let mut out = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let bit = d * 4;
            let nibble = (self.words[bit >> 6] >> (bit & 63)) & 0xf;
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        out
    }

    pub fn from_hex(n_sites: usize, hex: &str) -> Option<Self> {
        let digits = n_sites.div_ceil(4).max(1);
        if hex.len() != digits {
            return None;
        }
        let mut s = Self::empty(n_sites);
        for (pos, ch) in hex.chars().rev().enumerate() {
            let nibble = ch.to_digit(16)? as u64;
            let bit = pos * 4;
            s.words[bit >> 6] |= nibble << (bit & 63);
        }
        // Reject set bits beyond the site range.
        for i in n_sites..s.words.len() * 64 {
            if s.contains(i) {
                return None;
            }
        }
        Some(s)
    }
}

impl std::fmt::Debug for SiteSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SiteSet{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn insert_remove_contains() {
        let mut s = SiteSet::empty(100);
        s.insert(0);
        s.insert(63);
        s.insert(64);
        s.insert(99);
        assert!(s.contains(0) && s.contains(63) && s.contains(64) && s.contains(99));
        assert_eq!(s.len(), 4);
        s.remove(63);
        assert!(!s.contains(63));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 64, 99]);
    }

    proptest! {
        #[test]
        fn hex_round_trip(bits in proptest::collection::vec(any::<bool>(), 1..130)) {
            let n = bits.len();
            let mut s = SiteSet::empty(n);
            for (i, &b) in bits.iter().enumerate() {
                if b { s.insert(i); }
            }
            let hex = s.to_hex(n);
            prop_assert_eq!(SiteSet::from_hex(n, &hex).unwrap(), s);
        }
    }
}
