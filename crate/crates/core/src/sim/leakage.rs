//! Leakage measurement support: sparse joints with deterministic iteration
//! order, product-space enumeration with a work budget, and the plug-in
//! fallback estimator.
//!
//! Exact leakage for a fixed codebook integrates the per-symbol channel and
//! input randomness analytically and enumerates only the discrete choices
//! (state sequences, observation sequences); the per-trial exact values are
//! then averaged over trials, i.e. over the codebook ensemble.

use std::collections::BTreeMap;

/// Enumeration state cap: exact leakage is attempted only when the number of
/// enumerated sequences stays under this.
pub const ENUMERATION_CAP: f64 = 1e6;
/// Work cap (inner accumulation steps) for one exact-leakage evaluation.
pub const WORK_CAP: u64 = 200_000_000;

/// Sparse joint distribution between a key tuple and an observation blob.
/// BTreeMap keeps summation order deterministic, which keeps reports
/// bit-identical across thread counts.
#[derive(Debug, Default, Clone)]
pub struct SparseJoint {
    map: BTreeMap<(Vec<u32>, Vec<u8>), f64>,
}

impl SparseJoint {
    pub fn add(&mut self, keys: &[u32], obs: &[u8], p: f64) {
        if p == 0.0 {
            return;
        }
        *self
            .map
            .entry((keys.to_vec(), obs.to_vec()))
            .or_insert(0.0) += p;
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// I(K; O) in bits over the accumulated joint.
    pub fn mutual_information(&self) -> f64 {
        let mut pk: BTreeMap<&[u32], f64> = BTreeMap::new();
        let mut po: BTreeMap<&[u8], f64> = BTreeMap::new();
        for ((k, o), &p) in &self.map {
            *pk.entry(k.as_slice()).or_insert(0.0) += p;
            *po.entry(o.as_slice()).or_insert(0.0) += p;
        }
        let mut mi = 0.0f64;
        for ((k, o), &p) in &self.map {
            if p > 0.0 {
                mi += p * (p / (pk[k.as_slice()] * po[o.as_slice()])).log2();
            }
        }
        mi
    }
}

/// Plug-in estimator: empirical joint of realized (key, observation) samples.
#[derive(Debug, Default, Clone)]
pub struct PlugInJoint {
    map: BTreeMap<(Vec<u32>, Vec<u8>), u64>,
    total: u64,
}

impl PlugInJoint {
    pub fn add_sample(&mut self, keys: &[u32], obs: &[u8]) {
        *self
            .map
            .entry((keys.to_vec(), obs.to_vec()))
            .or_insert(0) += 1;
        self.total += 1;
    }

    pub fn mutual_information(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let mut joint = SparseJoint::default();
        let tf = self.total as f64;
        for ((k, o), &c) in &self.map {
            joint.add(k, o, c as f64 / tf);
        }
        joint.mutual_information()
    }
}

/// Per-position supports of an i.i.d.-by-position product distribution.
pub type Supports = Vec<Vec<(u8, f64)>>;

pub fn support_of_row(row: &[f64]) -> Vec<(u8, f64)> {
    row.iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(i, &p)| (i as u8, p))
        .collect()
}

/// Number of sequences in the product of per-position supports.
pub fn product_size(supports: &Supports) -> f64 {
    supports.iter().map(|s| s.len() as f64).product()
}

/// Enumerate every sequence of the product support with its probability.
/// Returns false (and stops early) if the work budget runs out.
pub fn enumerate_product(
    supports: &Supports,
    budget: &mut u64,
    mut f: impl FnMut(&[u8], f64),
) -> bool {
    let n = supports.len();
    let mut idx = vec![0usize; n];
    let mut seq = vec![0u8; n];
    let mut prob = vec![0.0f64; n + 1];
    prob[0] = 1.0;
    if supports.iter().any(|s| s.is_empty()) {
        return true;
    }
    // Initialize prefix products.
    for i in 0..n {
        let (sym, p) = supports[i][0];
        seq[i] = sym;
        prob[i + 1] = prob[i] * p;
    }
    loop {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        f(&seq, prob[n]);
        // Advance odometer from the last position.
        let mut pos = n;
        loop {
            if pos == 0 {
                return true;
            }
            pos -= 1;
            if idx[pos] + 1 < supports[pos].len() {
                idx[pos] += 1;
                let (sym, p) = supports[pos][idx[pos]];
                seq[pos] = sym;
                prob[pos + 1] = prob[pos] * p;
                // Reset the tail.
                for i in pos + 1..n {
                    idx[i] = 0;
                    let (sym, p) = supports[i][0];
                    seq[i] = sym;
                    prob[i + 1] = prob[i] * p;
                }
                break;
            }
            idx[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_product_covers_all_mass() {
        let supports: Supports = vec![
            vec![(0, 0.25), (1, 0.75)],
            vec![(0, 0.5), (1, 0.5)],
            vec![(2, 1.0)],
        ];
        let mut total = 0.0;
        let mut count = 0;
        let mut budget = 1000u64;
        let ok = enumerate_product(&supports, &mut budget, |seq, p| {
            assert_eq!(seq.len(), 3);
            assert_eq!(seq[2], 2);
            total += p;
            count += 1;
        });
        assert!(ok);
        assert_eq!(count, 4);
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn enumerate_product_respects_budget() {
        let supports: Supports = vec![vec![(0, 0.5), (1, 0.5)]; 10];
        let mut budget = 100u64;
        let ok = enumerate_product(&supports, &mut budget, |_, _| {});
        assert!(!ok);
    }

    #[test]
    fn sparse_joint_mi_independent_is_zero() {
        let mut j = SparseJoint::default();
        for k in 0..2u32 {
            for o in 0..2u8 {
                j.add(&[k], &[o], 0.25);
            }
        }
        assert!(j.mutual_information().abs() < 1e-12);
    }

    #[test]
    fn sparse_joint_mi_copy_is_one_bit() {
        let mut j = SparseJoint::default();
        j.add(&[0], &[0], 0.5);
        j.add(&[1], &[1], 0.5);
        assert!((j.mutual_information() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plug_in_matches_sparse_on_same_empirical() {
        let mut p = PlugInJoint::default();
        for _ in 0..3 {
            p.add_sample(&[0], &[0]);
        }
        p.add_sample(&[1], &[1]);
        let mi = p.mutual_information();
        assert!(mi > 0.0 && mi <= 1.0);
    }
}
