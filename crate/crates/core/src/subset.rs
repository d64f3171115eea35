//! Fixed-width bitsets over sensor ids.
//!
//! A `SensorSubset` names a state of information: bit `m` is set once sensor
//! `m` has been acquired. Subsets order by cardinality first and bitmask value
//! second, which is the node numbering used throughout the crate.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

const WORD_BITS: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SensorSubset {
    width: usize,
    words: Vec<u64>,
}

impl SensorSubset {
    pub fn empty(width: usize) -> Self {
        SensorSubset {
            width,
            words: vec![0; width.div_ceil(WORD_BITS)],
        }
    }

    pub fn full(width: usize) -> Self {
        let mut s = Self::empty(width);
        for id in 0..width {
            s.insert(id);
        }
        s
    }

    /// Builds a subset from sensor ids. Panics if an id is `>= width`.
    pub fn from_ids(width: usize, ids: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(width);
        for id in ids {
            s.insert(id);
        }
        s
    }

    /// Subset whose bits are the low `width` bits of `mask`.
    pub fn from_mask(width: usize, mask: u64) -> Self {
        let mut s = Self::empty(width);
        if width > 0 {
            let keep = if width >= WORD_BITS {
                u64::MAX
            } else {
                (1u64 << width) - 1
            };
            s.words[0] = mask & keep;
        }
        s
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Low 64 bits of the mask.
    pub fn low_mask(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn insert(&mut self, id: usize) -> bool {
        assert!(id < self.width, "sensor id {id} out of range for width {}", self.width);
        let (w, b) = (id / WORD_BITS, id % WORD_BITS);
        let was = self.words[w] >> b & 1 == 1;
        self.words[w] |= 1 << b;
        !was
    }

    pub fn contains(&self, id: usize) -> bool {
        id < self.width && self.words[id / WORD_BITS] >> (id % WORD_BITS) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &SensorSubset) -> bool {
        debug_assert_eq!(self.width, other.width);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn union(&self, other: &SensorSubset) -> SensorSubset {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &SensorSubset) -> SensorSubset {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &SensorSubset) -> SensorSubset {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn with(&self, id: usize) -> SensorSubset {
        let mut s = self.clone();
        s.insert(id);
        s
    }

    fn zip_with(&self, other: &SensorSubset, f: impl Fn(u64, u64) -> u64) -> SensorSubset {
        debug_assert_eq!(self.width, other.width);
        SensorSubset {
            width: self.width,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Sensor ids in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD_BITS + b)
            })
        })
    }

    /// Every subset of `width` sensors in (cardinality, mask) order. `width` must be < 64.
    pub fn enumerate_all(width: usize) -> Vec<SensorSubset> {
        assert!(width < WORD_BITS);
        let mut all: Vec<SensorSubset> = (0..1u64 << width)
            .map(|m| SensorSubset::from_mask(width, m))
            .collect();
        all.sort();
        all
    }
}

impl Ord for SensorSubset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
            .then_with(|| self.width.cmp(&other.width))
    }
}

impl PartialOrd for SensorSubset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SensorSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, id) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for SensorSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SensorSubset{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn containment_and_set_ops() {
        let a = SensorSubset::from_ids(5, [0, 2]);
        let b = SensorSubset::from_ids(5, [0, 1, 2]);
        assert!(a.is_subset(&b));
        assert!(!b.is_subset(&a));
        assert_eq!(b.difference(&a), SensorSubset::from_ids(5, [1]));
        assert_eq!(a.union(&SensorSubset::from_ids(5, [4])).len(), 3);
        assert_eq!(a.to_string(), "{0,2}");
    }

    #[test]
    fn wide_subsets_span_words() {
        let s = SensorSubset::from_ids(130, [0, 63, 64, 129]);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
        assert_eq!(s.len(), 4);
        assert!(s.contains(129));
        assert!(!s.contains(128));
    }

    #[test]
    fn enumeration_order_is_cardinality_then_mask() {
        let all = SensorSubset::enumerate_all(3);
        let masks: Vec<u64> = all.iter().map(|s| s.low_mask()).collect();
        assert_eq!(masks, vec![0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111]);
    }

    proptest! {
        #[test]
        fn difference_union_partition(a in 0u64..1 << 10, b in 0u64..1 << 10) {
            let (a, b) = (SensorSubset::from_mask(10, a), SensorSubset::from_mask(10, b));
            let u = a.union(&b);
            prop_assert_eq!(b.difference(&a).len() + a.len(), u.len());
            prop_assert!(a.is_subset(&u) && b.is_subset(&u));
            prop_assert_eq!(a.intersection(&b).is_subset(&a), true);
        }
    }
}
