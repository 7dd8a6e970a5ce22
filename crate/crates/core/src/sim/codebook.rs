//! Random codebooks: superposition-coded banks with single binning for the
//! no-feedback protocol, and enumerated typical sets with double binning for
//! the feedback protocol. Generation is fully reproducible from the seed;
//! draw order is words before bin labels, bank by bank.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_chacha::rand_core::SeedableRng;

use crate::channel::{AuxScheme, BroadcastChannel, S, U0, U1, U2};
use crate::error::{Error, Result};
use crate::prob::compose;
use crate::sim::typicality::{count_from_rate, typical_set, TypicalityParams};

/// Total stored symbols across all banks may not exceed this.
pub const CODEBOOK_SYMBOL_CAP: usize = 20_000_000;

/// Codeword rates of the no-feedback codebook: bank rates (words) and bin
/// rates (keys).
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct NofbRates {
    pub rt0: f64,
    pub rt1: f64,
    pub rt2: f64,
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
}

/// Bin and sub-bin rates of the feedback codebooks, per receiver.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct FbRates {
    pub rp1: f64,
    pub rp2: f64,
    pub r1: f64,
    pub r2: f64,
}

/// A bank of words of a fixed length with one bin label per word.
#[derive(Debug, Clone)]
pub struct WordBank {
    pub n: usize,
    pub count: usize,
    pub words: Vec<u8>,
    pub bins: Vec<u32>,
    pub num_bins: u32,
}

impl WordBank {
    pub fn word(&self, i: usize) -> &[u8] {
        &self.words[i * self.n..(i + 1) * self.n]
    }
}

/// Superposition codebook of the no-feedback protocol: one bank of u0 words
/// and, for each u0 word, one bank each of u1 and u2 words drawn from the
/// conditional kernels.
#[derive(Debug, Clone)]
pub struct Codebook {
    pub n: usize,
    pub u0: WordBank,
    /// u1 banks indexed by u0 word: word (m0, m1) sits at m0 * count1 + m1.
    pub u1_words: Vec<u8>,
    pub u1_bins: Vec<u32>,
    pub u1_count: usize,
    pub u1_num_bins: u32,
    pub u2_words: Vec<u8>,
    pub u2_bins: Vec<u32>,
    pub u2_count: usize,
    pub u2_num_bins: u32,
    pub seed: u64,
}

impl Codebook {
    pub fn u1_word(&self, m0: usize, m1: usize) -> &[u8] {
        let i = m0 * self.u1_count + m1;
        &self.u1_words[i * self.n..(i + 1) * self.n]
    }

    pub fn u2_word(&self, m0: usize, m2: usize) -> &[u8] {
        let i = m0 * self.u2_count + m2;
        &self.u2_words[i * self.n..(i + 1) * self.n]
    }
}

fn sample_symbol<R: Rng>(rng: &mut R, row: &[f64]) -> u8 {
    let u: f64 = rng.gen();
    let mut acc = 0.0f64;
    for (i, &p) in row.iter().enumerate() {
        acc += p;
        if u < acc {
            return i as u8;
        }
    }
    (row.len() - 1) as u8
}

pub(crate) fn sample_seq<R: Rng>(rng: &mut R, row: &[f64], n: usize, out: &mut Vec<u8>) {
    out.clear();
    for _ in 0..n {
        out.push(sample_symbol(rng, row));
    }
}

/// Generate the no-feedback codebook.
///
/// u0 words are i.i.d. from the scheme's p(U0) marginal; u1/u2 words are
/// drawn per u0 word from p(U1|U0) and p(U2|U0); all bin labels are uniform.
pub fn gen_codebooks_nofb(
    channel: &BroadcastChannel,
    scheme: &AuxScheme,
    rates: &NofbRates,
    tp: &TypicalityParams,
    seed: u64,
) -> Result<Codebook> {
    for (name, (rt, r)) in [
        ("0", (rates.rt0, rates.r0)),
        ("1", (rates.rt1, rates.r1)),
        ("2", (rates.rt2, rates.r2)),
    ] {
        if rt < r || r < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "need rt{name} >= r{name} >= 0"
            )));
        }
    }
    let n = tp.n;
    let count0 = count_from_rate(n, rates.rt0)?;
    let count1 = count_from_rate(n, rates.rt1)?;
    let count2 = count_from_rate(n, rates.rt2)?;
    let bins0 = count_from_rate(n, rates.r0)? as u32;
    let bins1 = count_from_rate(n, rates.r1)? as u32;
    let bins2 = count_from_rate(n, rates.r2)? as u32;

    let total_symbols = count0
        .checked_mul(n)
        .and_then(|a| {
            count0
                .checked_mul(count1 + count2)
                .and_then(|b| b.checked_mul(n))
                .and_then(|b| a.checked_add(b))
        })
        .ok_or(Error::CodebookTooLarge { words: usize::MAX, n })?;
    if total_symbols > CODEBOOK_SYMBOL_CAP {
        return Err(Error::CodebookTooLarge { words: total_symbols / n, n });
    }

    // Marginal p(U0) and kernels p(U1|U0), p(U2|U0) from the scheme chain.
    let joint = compose(
        channel.state_pmf(),
        &[
            &scheme.u0_given_s,
            &scheme.u1_given_u0_s,
            &scheme.u2_given_u0_s,
        ],
    )?;
    let p_u0 = joint.marginalize(&[U0])?.mass().to_vec();
    let k_u1 = joint.condition(&[U1], &[U0])?;
    let k_u2 = joint.condition(&[U2], &[U0])?;
    let _ = S;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut u0_words = Vec::with_capacity(count0 * n);
    let mut buf = Vec::with_capacity(n);
    for _ in 0..count0 {
        sample_seq(&mut rng, &p_u0, n, &mut buf);
        u0_words.extend_from_slice(&buf);
    }
    let u0_bins: Vec<u32> = (0..count0).map(|_| rng.gen_range(0..bins0)).collect();

    let gen_super = |rng: &mut ChaCha8Rng,
                         kernel: &crate::prob::ConditionalPmf,
                         count: usize,
                         bins: u32|
     -> (Vec<u8>, Vec<u32>) {
        let mut words = Vec::with_capacity(count0 * count * n);
        for m0 in 0..count0 {
            let parent = &u0_words[m0 * n..(m0 + 1) * n];
            for _ in 0..count {
                for &u0_sym in parent {
                    let row = if kernel.is_constrained(u0_sym as usize) {
                        kernel.row(u0_sym as usize)
                    } else {
                        // Unreachable u0 symbol: the parent word never
                        // contains it, but keep the draw total stable.
                        kernel.row(0)
                    };
                    words.push(sample_symbol(rng, row));
                }
            }
        }
        let labels: Vec<u32> = (0..count0 * count).map(|_| rng.gen_range(0..bins)).collect();
        (words, labels)
    };

    let (u1_words, u1_bins) = gen_super(&mut rng, &k_u1, count1, bins1);
    let (u2_words, u2_bins) = gen_super(&mut rng, &k_u2, count2, bins2);

    Ok(Codebook {
        n,
        u0: WordBank { n, count: count0, words: u0_words, bins: u0_bins, num_bins: bins0 },
        u1_words,
        u1_bins,
        u1_count: count1,
        u1_num_bins: bins1,
        u2_words,
        u2_bins,
        u2_count: count2,
        u2_num_bins: bins2,
        seed,
    })
}

/// Bin labels of a selected index triple.
pub fn extract_keys_nofb(cb: &Codebook, indices: (usize, usize, usize)) -> Result<(u32, u32, u32)> {
    let (m0, m1, m2) = indices;
    if m0 >= cb.u0.count {
        return Err(Error::IndexOutOfRange { index: m0, limit: cb.u0.count });
    }
    if m1 >= cb.u1_count {
        return Err(Error::IndexOutOfRange { index: m1, limit: cb.u1_count });
    }
    if m2 >= cb.u2_count {
        return Err(Error::IndexOutOfRange { index: m2, limit: cb.u2_count });
    }
    Ok((
        cb.u0.bins[m0],
        cb.u1_bins[m0 * cb.u1_count + m1],
        cb.u2_bins[m0 * cb.u2_count + m2],
    ))
}

/// Enumerated typical set of an i.i.d. source with a (bin, sub-bin) label
/// pair per word: the bin index is the public message, the sub-bin index is
/// the key.
#[derive(Debug, Clone)]
pub struct DoubleBinnedCodebook {
    pub n: usize,
    pub count: usize,
    pub words: Vec<u8>,
    pub bins: Vec<u32>,
    pub subbins: Vec<u32>,
    pub num_bins: u32,
    pub num_subbins: u32,
    /// Word indices grouped by bin, in word order.
    pub bin_members: Vec<Vec<u32>>,
    pub seed: u64,
}

impl DoubleBinnedCodebook {
    pub fn word(&self, i: usize) -> &[u8] {
        &self.words[i * self.n..(i + 1) * self.n]
    }
}

/// Enumerate the typical set of `v_pmf` and assign uniform bin then sub-bin
/// labels, reproducibly from the seed.
pub fn gen_double_binned(
    v_pmf: &[f64],
    tp: &TypicalityParams,
    rate_bin: f64,
    rate_subbin: f64,
    seed: u64,
) -> Result<DoubleBinnedCodebook> {
    if rate_bin < 0.0 || rate_subbin < 0.0 {
        return Err(Error::InvalidParameter("bin rates must be >= 0".into()));
    }
    let n = tp.n;
    let words = typical_set(v_pmf, tp)?;
    let count = words.len() / n;
    let num_bins = count_from_rate(n, rate_bin)? as u32;
    let num_subbins = count_from_rate(n, rate_subbin)? as u32;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bins: Vec<u32> = (0..count).map(|_| rng.gen_range(0..num_bins)).collect();
    let subbins: Vec<u32> = (0..count).map(|_| rng.gen_range(0..num_subbins)).collect();

    let mut bin_members = vec![Vec::new(); num_bins as usize];
    for (i, &b) in bins.iter().enumerate() {
        bin_members[b as usize].push(i as u32);
    }
    Ok(DoubleBinnedCodebook {
        n,
        count,
        words,
        bins,
        subbins,
        num_bins,
        num_subbins,
        bin_members,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::fixtures::noiseless_binary;
    use crate::prob::{ConditionalPmf, Variable};
    use crate::channel::X;

    fn uniform_kernel(targets: Vec<Variable>, givens: Vec<Variable>) -> ConditionalPmf {
        let t: usize = targets.iter().map(|v| v.cardinality).product();
        let g: usize = givens.iter().map(|v| v.cardinality).product::<usize>().max(1);
        ConditionalPmf::new(targets, givens, vec![1.0 / t as f64; t * g]).unwrap()
    }

    fn simple_scheme() -> AuxScheme {
        let u0 = uniform_kernel(vec![Variable::new(U0, 2)], vec![Variable::new(S, 1)]);
        let u1 = uniform_kernel(
            vec![Variable::new(U1, 1)],
            vec![Variable::new(S, 1), Variable::new(U0, 2)],
        );
        let u2 = uniform_kernel(
            vec![Variable::new(U2, 1)],
            vec![Variable::new(S, 1), Variable::new(U0, 2)],
        );
        let x = ConditionalPmf::deterministic(
            vec![Variable::new(X, 2)],
            vec![
                Variable::new(S, 1),
                Variable::new(U0, 2),
                Variable::new(U1, 1),
                Variable::new(U2, 1),
            ],
            |g| g,
        )
        .unwrap();
        AuxScheme::new(u0, u1, u2, x).unwrap()
    }

    #[test]
    fn zero_bank_rate_gives_single_word() {
        let ch = noiseless_binary();
        let tp = TypicalityParams::new(4, 0.2).unwrap();
        let rates = NofbRates { rt0: 0.0, rt1: 0.0, rt2: 0.0, r0: 0.0, r1: 0.0, r2: 0.0 };
        let cb = gen_codebooks_nofb(&ch, &simple_scheme(), &rates, &tp, 1).unwrap();
        assert_eq!(cb.u0.count, 1);
        assert_eq!(cb.u0.num_bins, 1);
        assert_eq!(extract_keys_nofb(&cb, (0, 0, 0)).unwrap(), (0, 0, 0));
    }

    #[test]
    fn same_seed_identical_codebook() {
        let ch = noiseless_binary();
        let tp = TypicalityParams::new(4, 0.2).unwrap();
        let rates = NofbRates { rt0: 1.0, rt1: 0.0, rt2: 0.0, r0: 0.5, r1: 0.0, r2: 0.0 };
        let a = gen_codebooks_nofb(&ch, &simple_scheme(), &rates, &tp, 42).unwrap();
        let b = gen_codebooks_nofb(&ch, &simple_scheme(), &rates, &tp, 42).unwrap();
        assert_eq!(a.u0.words, b.u0.words);
        assert_eq!(a.u0.bins, b.u0.bins);
        let c = gen_codebooks_nofb(&ch, &simple_scheme(), &rates, &tp, 43).unwrap();
        assert_ne!(a.u0.words, c.u0.words);
    }

    #[test]
    fn word_symbol_frequencies_match_marginal() {
        // n=4, rt0=1: 16 u0 words per seed; over 100 seeds the zero-symbol
        // frequency is binomial(6400, 0.5): 3 sigma is ~120.
        let ch = noiseless_binary();
        let tp = TypicalityParams::new(4, 0.2).unwrap();
        let rates = NofbRates { rt0: 1.0, rt1: 0.0, rt2: 0.0, r0: 0.0, r1: 0.0, r2: 0.0 };
        let mut zeros = 0u64;
        let mut total = 0u64;
        for seed in 0..100 {
            let cb = gen_codebooks_nofb(&ch, &simple_scheme(), &rates, &tp, seed).unwrap();
            assert_eq!(cb.u0.count, 16);
            zeros += cb.u0.words.iter().filter(|&&s| s == 0).count() as u64;
            total += cb.u0.words.len() as u64;
        }
        let mean = total as f64 * 0.5;
        let sigma = (total as f64 * 0.25).sqrt();
        assert!(
            (zeros as f64 - mean).abs() < 3.0 * sigma,
            "zeros {zeros} vs mean {mean} (sigma {sigma})"
        );
    }

    #[test]
    fn bin_labels_near_uniform_over_index_sweep() {
        let ch = noiseless_binary();
        let tp = TypicalityParams::new(8, 0.2).unwrap();
        let rates = NofbRates { rt0: 1.0, rt1: 0.0, rt2: 0.0, r0: 0.5, r1: 0.0, r2: 0.0 };
        let cb = gen_codebooks_nofb(&ch, &simple_scheme(), &rates, &tp, 7).unwrap();
        let mut hist = vec![0u32; cb.u0.num_bins as usize];
        for m0 in 0..cb.u0.count {
            let (k0, _, _) = extract_keys_nofb(&cb, (m0, 0, 0)).unwrap();
            hist[k0 as usize] += 1;
        }
        let mean = cb.u0.count as f64 / cb.u0.num_bins as f64;
        let sigma = (cb.u0.count as f64 * (1.0 / 16.0) * (15.0 / 16.0)).sqrt();
        for &h in &hist {
            assert!(
                (h as f64 - mean).abs() < 3.0 * sigma + 1.0,
                "bin occupancy {h} vs mean {mean}"
            );
        }
    }

    #[test]
    fn extract_keys_rejects_bad_indices() {
        let ch = noiseless_binary();
        let tp = TypicalityParams::new(4, 0.2).unwrap();
        let rates = NofbRates { rt0: 0.5, rt1: 0.0, rt2: 0.0, r0: 0.0, r1: 0.0, r2: 0.0 };
        let cb = gen_codebooks_nofb(&ch, &simple_scheme(), &rates, &tp, 1).unwrap();
        assert!(matches!(
            extract_keys_nofb(&cb, (cb.u0.count, 0, 0)),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn double_binned_deterministic_source() {
        let tp = TypicalityParams::new(6, 0.5).unwrap();
        let cb = gen_double_binned(&[1.0, 0.0], &tp, 0.0, 0.0, 3).unwrap();
        assert_eq!(cb.count, 1);
        assert_eq!(cb.bins, vec![0]);
        assert_eq!(cb.subbins, vec![0]);
    }

    #[test]
    fn double_binned_same_seed_same_labels() {
        let tp = TypicalityParams::new(8, 0.9).unwrap();
        let a = gen_double_binned(&[0.5, 0.5], &tp, 0.35, 0.125, 9).unwrap();
        let b = gen_double_binned(&[0.5, 0.5], &tp, 0.35, 0.125, 9).unwrap();
        assert_eq!(a.bins, b.bins);
        assert_eq!(a.subbins, b.subbins);
    }

    #[test]
    fn double_binned_occupancies_within_three_sigma() {
        // Uniform binary source at eps=0.9 keeps every non-constant word:
        // 254 words at n=8 (constant words are never robustly typical for
        // eps < 1). Expected bin occupancy 254/16.
        let tp = TypicalityParams::new(8, 0.9).unwrap();
        let cb = gen_double_binned(&[0.5, 0.5], &tp, 0.5, 0.125, 11).unwrap();
        assert_eq!(cb.count, 254);
        assert_eq!(cb.num_bins, 16);
        let mean = cb.count as f64 / 16.0;
        let sigma = (cb.count as f64 * (1.0 / 16.0) * (15.0 / 16.0)).sqrt();
        for members in &cb.bin_members {
            let h = members.len() as f64;
            assert!((h - mean).abs() < 3.0 * sigma + 1.0, "occupancy {h} vs {mean}");
        }
    }
}
