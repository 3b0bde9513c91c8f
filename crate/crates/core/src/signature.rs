//! Peer signatures: the subset of file blocks a peer holds.
//!
//! Blocks are numbered `1..=K`; block `j` is stored in bit `j - 1` of the mask.

use std::fmt;

/// Largest block count supported by state-based models (the occupancy vector
/// has `2^K - 1` slots).
pub const MAX_BLOCKS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Signature(u32);

impl Signature {
    pub const EMPTY: Signature = Signature(0);

    pub const fn from_mask(mask: u32) -> Self {
        Signature(mask)
    }

    pub const fn mask(self) -> u32 {
        self.0
    }

    /// The complete file `{1..K}`.
    pub fn full(blocks: usize) -> Self {
        debug_assert!(blocks <= 31);
        Signature((1u32 << blocks) - 1)
    }

    pub fn from_blocks<I: IntoIterator<Item = usize>>(blocks: I) -> Self {
        let mut mask = 0u32;
        for j in blocks {
            debug_assert!((1..=31).contains(&j));
            mask |= 1 << (j - 1);
        }
        Signature(mask)
    }

    pub fn contains(self, block: usize) -> bool {
        (1..=32).contains(&block) && self.0 & (1 << (block - 1)) != 0
    }

    #[must_use]
    pub fn with(self, block: usize) -> Self {
        Signature(self.0 | (1 << (block - 1)))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Blocks of `self` not held by `other` (`self ∖ other`).
    #[must_use]
    pub fn difference(self, other: Signature) -> Signature {
        Signature(self.0 & !other.0)
    }

    pub fn blocks(self) -> impl Iterator<Item = usize> {
        let mask = self.0;
        (0..32usize).filter(move |b| mask & (1 << b) != 0).map(|b| b + 1)
    }

    /// Blocks in `1..=k` that this signature lacks.
    pub fn missing(self, k: usize) -> impl Iterator<Item = usize> {
        let mask = self.0;
        (0..k).filter(move |b| mask & (1 << b) == 0).map(|b| b + 1)
    }

    /// All storable signatures for a `k`-block file, i.e. every proper subset
    /// of `{1..k}`, in mask order.
    pub fn all_partial(k: usize) -> impl Iterator<Item = Signature> {
        (0..(1u32 << k) - 1).map(Signature)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, b) in self.blocks().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_layout() {
        let s = Signature::from_blocks([1, 3]);
        assert_eq!(s.mask(), 0b101);
        assert!(s.contains(1) && !s.contains(2) && s.contains(3));
        assert_eq!(s.len(), 2);
        assert_eq!(s.missing(3).collect::<Vec<_>>(), vec![2]);
        assert_eq!(s.with(2), Signature::full(3));
        assert_eq!(s.to_string(), "{1,3}");
        assert_eq!(Signature::EMPTY.to_string(), "{}");
    }

    #[test]
    fn partial_signatures_exclude_full_set() {
        let all: Vec<_> = Signature::all_partial(3).collect();
        assert_eq!(all.len(), 7);
        assert!(!all.contains(&Signature::full(3)));
    }
}
