//! Rate-region evaluation and search for both coding schemes.

pub mod fb;
pub mod nofb;

use std::collections::HashMap;

use crate::prob::{entropy_of_table, JointPmf};

/// x if x >= 0, else 0.
pub fn positive_part(x: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        0.0
    }
}

/// Memoized subset entropies over a fixed joint, with subsets as bitmasks
/// over the joint's variable order. The region evaluators hit the same
/// handful of subsets thousands of times during search, so this is the hot
/// path.
pub(crate) struct MaskEntropy<'a> {
    joint: &'a JointPmf,

    cards: Vec<usize>,
    cache: HashMap<u32, f64>,
}

impl<'a> MaskEntropy<'a> {
    pub fn new(joint: &'a JointPmf) -> Self {
        let cards = joint.variables().iter().map(|v| v.cardinality).collect();
        Self { joint, cards, cache: HashMap::new() }
    }

    /// Joint entropy of the variables selected by `mask`, in bits.
    pub fn h(&mut self, mask: u32) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        if let Some(&v) = self.cache.get(&mask) {
            return v;
        }
        let mut contributions = vec![0usize; self.cards.len()];
        let mut size = 1usize;
        for i in (0..self.cards.len()).rev() {
            if mask & (1 << i) != 0 {
                contributions[i] = size;
                size *= self.cards[i];
            }
        }
        let mut acc = vec![0.0f64; size];
        let mass = self.joint.mass();
        crate::prob::walk_projected(&self.cards, &[contributions], |flat, idx| {
            acc[idx[0]] += mass[flat];
        });
        let h = entropy_of_table(&acc);
        self.cache.insert(mask, h);
        h
    }

    /// I(a ; b | c) with disjoint masks.
    pub fn mi(&mut self, a: u32, b: u32, c: u32) -> f64 {
        debug_assert_eq!(a & b, 0);
        debug_assert_eq!(a & c, 0);
        debug_assert_eq!(b & c, 0);
        self.h(a | c) + self.h(b | c) - self.h(a | b | c) - self.h(c)
    }
}
