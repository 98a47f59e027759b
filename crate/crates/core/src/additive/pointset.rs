use std::fmt;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::group::{Group, GroupElement};
use crate::harmonic::{GroupFunction, Measure, Side};

/// A subset of a finite abelian group, stored as a bitset over canonical indices.
///
/// The same type holds sets of characters (spectra, span bases on the dual)
/// since both sides share one indexing.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    group: Group,
    bits: Vec<u64>,
    size: usize,
}

impl PointSet {
    pub fn empty(group: &Group) -> Self {
        PointSet {
            group: group.clone(),
            bits: vec![0; group.order().div_ceil(64)],
            size: 0,
        }
    }

    pub fn full(group: &Group) -> Self {
        Self::from_indices(group, group.indices())
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(group: &Group, indices: I) -> Self {
        let mut s = Self::empty(group);
        for i in indices {
            s.insert(i);
        }
        s
    }

    pub fn from_elements(group: &Group, elements: &[GroupElement]) -> Result<Self> {
        let mut s = Self::empty(group);
        for e in elements {
            s.insert(group.element_index(e)?);
        }
        Ok(s)
    }

    /// The subgroup generated by `gens`.
    pub fn subgroup(group: &Group, gens: &[usize]) -> Self {
        let mut s = Self::from_indices(group, [0]);
        let mut frontier = vec![0usize];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = group.add_idx(x, g);
                if s.insert(y) {
                    frontier.push(y);
                }
            }
        }
        s
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn contains(&self, idx: usize) -> bool {
        idx < self.group.order() && self.bits[idx / 64] >> (idx % 64) & 1 == 1
    }

    /// Returns true if the index was newly inserted.
    pub fn insert(&mut self, idx: usize) -> bool {
        assert!(idx < self.group.order(), "index {idx} outside group");
        let (w, b) = (idx / 64, idx % 64);
        let fresh = self.bits[w] >> b & 1 == 0;
        if fresh {
            self.bits[w] |= 1 << b;
            self.size += 1;
        }
        fresh
    }

    pub fn remove(&mut self, idx: usize) -> bool {
        if !self.contains(idx) {
            return false;
        }
        self.bits[idx / 64] &= !(1 << (idx % 64));
        self.size -= 1;
        true
    }

    /// Members in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let b = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + b)
            })
        })
    }

    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        self.iter().map(|i| self.group.element_at(i)).collect()
    }

    /// `|A| / |G|`.
    pub fn density(&self) -> Ratio<u64> {
        Ratio::new(self.size as u64, self.group.order() as u64)
    }

    pub fn density_f64(&self) -> f64 {
        self.size as f64 / self.group.order() as f64
    }

    pub fn negate(&self) -> Self {
        Self::from_indices(&self.group, self.iter().map(|i| self.group.neg_idx(i)))
    }

    pub fn translate(&self, x: usize) -> Self {
        Self::from_indices(&self.group, self.iter().map(|i| self.group.add_idx(i, x)))
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.group == other.group
            && self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn intersection_len(&self, other: &PointSet) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn union(&self, other: &PointSet) -> Self {
        let bits: Vec<u64> = self.bits.iter().zip(&other.bits).map(|(a, b)| a | b).collect();
        let size = bits.iter().map(|w| w.count_ones() as usize).sum();
        PointSet {
            group: self.group.clone(),
            bits,
            size,
        }
    }

    pub fn check_same_group(&self, other: &PointSet) -> Result<()> {
        if self.group == other.group {
            Ok(())
        } else {
            Err(Error::GroupMismatch)
        }
    }

    /// `1_A` on the primal side.
    pub fn indicator(&self, measure: Measure) -> GroupFunction {
        GroupFunction::indicator(self.group.clone(), Side::Primal, measure, self.iter())
    }

    /// `1_S` for a set of characters.
    pub fn dual_indicator(&self, measure: Measure) -> GroupFunction {
        GroupFunction::indicator(self.group.clone(), Side::Dual, measure, self.iter())
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointSet[{}]{}", self.group, self)
    }
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.elements().iter().map(|e| e.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}
