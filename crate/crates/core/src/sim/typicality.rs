//! Robust typicality over finite blocklengths.
//!
//! A tuple of aligned sequences is epsilon-typical for a joint pmf when the
//! empirical frequency of every joint cell `a` satisfies
//! `|freq(a) - p(a)| <= eps * p(a)`. Cells with zero probability must not
//! appear at all, and for eps < 1 every positive-probability cell must
//! appear at least once — a real finite-blocklength effect the simulators
//! surface rather than hide.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute slack on the count comparison; absorbs rounding in the joint
/// tables the windows are computed from.
const COUNT_SLACK: f64 = 1e-9;

/// Cap on enumerated typical sets (words retained).
pub const TYPICAL_SET_CAP: usize = 1 << 22;

/// Blocklength and typicality slack.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TypicalityParams {
    pub n: usize,
    pub eps: f64,
}

impl TypicalityParams {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter("blocklength must be >= 1".into()));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "typicality slack must lie in (0, 1), got {eps}"
            )));
        }
        Ok(Self { n, eps })
    }
}

/// Count joint cells of aligned sequences; cell index is mixed-radix with
/// the last sequence fastest, matching the joint-pmf layout.
pub fn joint_counts(seqs: &[&[u8]], cards: &[usize], counts: &mut [u32]) {
    debug_assert_eq!(seqs.len(), cards.len());
    counts.fill(0);
    let n = seqs[0].len();
    for i in 0..n {
        let mut idx = 0usize;
        for (seq, &card) in seqs.iter().zip(cards.iter()) {
            idx = idx * card + seq[i] as usize;
        }
        counts[idx] += 1;
    }
}

/// Robust typicality check of precomputed counts against a joint table.
pub fn counts_typical(counts: &[u32], n: usize, probs: &[f64], eps: f64) -> bool {
    debug_assert_eq!(counts.len(), probs.len());
    let nf = n as f64;
    for (&c, &p) in counts.iter().zip(probs.iter()) {
        let dev = (c as f64 - nf * p).abs();
        if dev > eps * nf * p + COUNT_SLACK {
            return false;
        }
    }
    true
}

/// Convenience: count then check.
pub fn seqs_typical(
    seqs: &[&[u8]],
    cards: &[usize],
    probs: &[f64],
    tp: &TypicalityParams,
    scratch: &mut [u32],
) -> bool {
    joint_counts(seqs, cards, scratch);
    counts_typical(scratch, tp.n, probs, tp.eps)
}

/// Enumerate the epsilon-typical set of an i.i.d. source in lexicographic
/// order, returned as flattened words.
pub fn typical_set(pmf: &[f64], tp: &TypicalityParams) -> Result<Vec<u8>> {
    let card = pmf.len();
    let n = tp.n;
    let total = (card as f64).powi(n as i32);
    if total > (1u64 << 40) as f64 {
        return Err(Error::TypicalSetTooLarge { size: usize::MAX });
    }

    // Window of admissible counts per symbol.
    let nf = n as f64;
    let windows: Vec<(u32, u32)> = pmf
        .iter()
        .map(|&p| {
            let lo = (nf * p * (1.0 - tp.eps) - COUNT_SLACK).ceil().max(0.0) as u32;
            let hi = (nf * p * (1.0 + tp.eps) + COUNT_SLACK).floor() as u32;
            (lo, hi)
        })
        .collect();

    let mut words: Vec<u8> = Vec::new();
    let mut count = 0usize;
    let mut seq = vec![0u8; n];
    let mut counts = vec![0u32; card];
    // Odometer over all sequences with incremental symbol counts.
    counts[0] = n as u32;
    loop {
        if counts
            .iter()
            .zip(windows.iter())
            .all(|(&c, &(lo, hi))| c >= lo && c <= hi)
        {
            count += 1;
            if count > TYPICAL_SET_CAP {
                return Err(Error::TypicalSetTooLarge { size: count });
            }
            words.extend_from_slice(&seq);
        }
        // Advance.
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(words);
            }
            pos -= 1;
            let sym = seq[pos] as usize;
            counts[sym] -= 1;
            if sym + 1 < card {
                seq[pos] = sym as u8 + 1;
                counts[sym + 1] += 1;
                break;
            }
            seq[pos] = 0;
            counts[0] += 1;
        }
    }
}

/// Word/bin counts from rates: `ceil(2^(n r))`, with a guard so that exact
/// powers of two are not bumped by floating-point noise.
pub fn count_from_rate(n: usize, rate: f64) -> Result<usize> {
    if rate < 0.0 || !rate.is_finite() {
        return Err(Error::InvalidParameter(format!("rate must be >= 0, got {rate}")));
    }
    let v = (n as f64 * rate).exp2();
    if v > 1e12 {
        return Err(Error::InvalidParameter(format!("rate {rate} gives {v} words")));
    }
    let nearest = v.round();
    let count = if (v - nearest).abs() < 1e-9 { nearest } else { v.ceil() };
    Ok(count as usize)
}

/// Realized rate of a label space: log2(count)/n.
pub fn realized_rate(n: usize, count: usize) -> f64 {
    (count as f64).log2() / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_validate_ranges() {
        assert!(TypicalityParams::new(1, 0.5).is_ok());
        assert!(TypicalityParams::new(0, 0.5).is_err());
        assert!(TypicalityParams::new(4, 0.0).is_err());
        assert!(TypicalityParams::new(4, 1.0).is_err());
    }

    #[test]
    fn balanced_words_typical_at_tight_eps() {
        let tp = TypicalityParams::new(8, 0.2).unwrap();
        let probs = [0.5, 0.5];
        let mut scratch = [0u32; 2];
        let balanced: Vec<u8> = vec![0, 1, 0, 1, 0, 1, 0, 1];
        assert!(seqs_typical(&[&balanced], &[2], &probs, &tp, &mut scratch));
        let skew: Vec<u8> = vec![0, 0, 0, 1, 0, 1, 0, 1];
        assert!(!seqs_typical(&[&skew], &[2], &probs, &tp, &mut scratch));
    }

    #[test]
    fn zero_probability_cells_must_not_appear() {
        let tp = TypicalityParams::new(4, 0.9).unwrap();
        // Perfectly correlated pair.
        let probs = [0.5, 0.0, 0.0, 0.5];
        let mut scratch = [0u32; 4];
        let a: Vec<u8> = vec![0, 1, 0, 1];
        assert!(seqs_typical(&[&a, &a], &[2, 2], &probs, &tp, &mut scratch));
        let b: Vec<u8> = vec![0, 1, 1, 1];
        assert!(!seqs_typical(&[&a, &b], &[2, 2], &probs, &tp, &mut scratch));
    }

    #[test]
    fn typical_set_uniform_binary_excludes_constant_words() {
        // At eps < 1 the all-zero and all-one words are never typical.
        let tp = TypicalityParams::new(8, 0.9).unwrap();
        let words = typical_set(&[0.5, 0.5], &tp).unwrap();
        assert_eq!(words.len() / 8, 254);
    }

    #[test]
    fn typical_set_tight_eps_is_balanced_words() {
        let tp = TypicalityParams::new(8, 0.2).unwrap();
        let words = typical_set(&[0.5, 0.5], &tp).unwrap();
        assert_eq!(words.len() / 8, 70); // C(8,4)
    }

    #[test]
    fn typical_set_deterministic_source_is_single_word() {
        let tp = TypicalityParams::new(6, 0.5).unwrap();
        let words = typical_set(&[1.0, 0.0], &tp).unwrap();
        assert_eq!(words, vec![0u8; 6]);
    }

    #[test]
    fn counts_from_rates_round_up_without_float_bumps() {
        assert_eq!(count_from_rate(8, 1.0).unwrap(), 256);
        assert_eq!(count_from_rate(8, 0.5).unwrap(), 16);
        assert_eq!(count_from_rate(8, 0.35).unwrap(), 7); // 2^2.8 = 6.96
        assert_eq!(count_from_rate(8, 0.0).unwrap(), 1);
        assert!((realized_rate(8, 16) - 0.5).abs() < 1e-15);
    }
}
