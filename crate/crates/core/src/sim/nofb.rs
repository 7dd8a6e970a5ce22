//! Finite-blocklength simulator of the no-feedback key-agreement protocol:
//! superposition codebooks, joint-typicality encoding against the state
//! sequence, joint-typicality decoding at both receivers, and bin-index key
//! extraction, with all reliability/secrecy/uniformity conditions measured.

use rayon::prelude::*;

use crate::channel::{AuxScheme, BroadcastChannel, S, U0, U1, U2, X, Y1, Y2, Z};
use crate::error::Result;
use crate::prob::JointPmf;
use crate::seed::{derive_seed, substream, StreamKind};
use crate::sim::codebook::{extract_keys_nofb, gen_codebooks_nofb, sample_seq, Codebook, NofbRates};
use crate::sim::leakage::{
    enumerate_product, support_of_row, PlugInJoint, SparseJoint, Supports,
    ENUMERATION_CAP, WORK_CAP,
};
use crate::sim::report::{
    histogram_entropy, ErrorRates, Estimator, FailureCounts, KeyEntropyReport, LeakageMetric,
    LeakageMode, SimOptions, SimulationReport, TrialRecord,
};
use crate::sim::typicality::{
    counts_typical, joint_counts, realized_rate, TypicalityParams,
};

use rand::Rng;

/// Precomputed tables shared by encoding, decoding and leakage measurement.
pub struct NofbContext {
    pub tp: TypicalityParams,
    cs: usize,
    cu0: usize,
    cu1: usize,
    cu2: usize,
    cx: usize,
    cy1: usize,
    cy2: usize,
    cz: usize,
    p_s: Vec<f64>,
    /// p(S,U0,U1,U2) for encoding typicality.
    p_su: Vec<f64>,
    /// p(S,U0) pair prune.
    p_su0: Vec<f64>,
    /// p(U0,U1,Y1) / p(U0,Y1) for receiver 1.
    p_dec1: Vec<f64>,
    p_dec1_pair: Vec<f64>,
    /// p(U0,U2,Y2) / p(U0,Y2) for receiver 2.
    p_dec2: Vec<f64>,
    p_dec2_pair: Vec<f64>,
    /// p(X | s,u0,u1,u2) rows, cell-major (u2 fastest).
    x_rows: Vec<f64>,
    /// Channel rows p(y1,y2,z | x,s), (x,s)-major.
    trans_rows: Vec<f64>,
    /// Observation kernels per scheme cell, for exact leakage:
    /// p(obs | s,u0,u1,u2) after integrating the input draw.
    z_cell: Vec<f64>,
    y1_cell: Vec<f64>,
    y2_cell: Vec<f64>,
}

impl NofbContext {
    pub fn new(
        channel: &BroadcastChannel,
        scheme: &AuxScheme,
        tp: TypicalityParams,
    ) -> Result<Self> {
        let full = crate::channel::build_joint_nofb(channel, scheme)?;
        let cs = channel.card(S);
        let cx = channel.card(X);
        let cy1 = channel.card(Y1);
        let cy2 = channel.card(Y2);
        let cz = channel.card(Z);
        let cu0 = scheme.card_u0();
        let cu1 = scheme.card_u1();
        let cu2 = scheme.card_u2();

        let grab = |j: &JointPmf, names: &[&str]| -> Result<Vec<f64>> {
            Ok(j.marginalize(names)?.mass().to_vec())
        };
        let p_su = grab(&full, &[S, U0, U1, U2])?;
        let p_su0 = grab(&full, &[S, U0])?;
        let p_dec1 = grab(&full, &[U0, U1, Y1])?;
        let p_dec1_pair = grab(&full, &[U0, Y1])?;
        let p_dec2 = grab(&full, &[U0, U2, Y2])?;
        let p_dec2_pair = grab(&full, &[U0, Y2])?;

        let cell_count = cs * cu0 * cu1 * cu2;
        let mut x_rows = vec![0.0f64; cell_count * cx];
        for g in 0..cell_count {
            x_rows[g * cx..(g + 1) * cx].copy_from_slice(scheme.x_given_all.row(g));
        }
        let t = channel.transition();
        let mut trans_rows = vec![0.0f64; cx * cs * cy1 * cy2 * cz];
        for g in 0..cx * cs {
            trans_rows[g * cy1 * cy2 * cz..(g + 1) * cy1 * cy2 * cz].copy_from_slice(t.row(g));
        }

        // Per-symbol observation kernels marginalized over the input draw.
        let mut z_xs = vec![0.0f64; cx * cs * cz];
        let mut y1_xs = vec![0.0f64; cx * cs * cy1];
        let mut y2_xs = vec![0.0f64; cx * cs * cy2];
        for g in 0..cx * cs {
            for y1 in 0..cy1 {
                for y2 in 0..cy2 {
                    for z in 0..cz {
                        let p = trans_rows[g * cy1 * cy2 * cz + (y1 * cy2 + y2) * cz + z];
                        z_xs[g * cz + z] += p;
                        y1_xs[g * cy1 + y1] += p;
                        y2_xs[g * cy2 + y2] += p;
                    }
                }
            }
        }
        let mut z_cell = vec![0.0f64; cell_count * cz];
        let mut y1_cell = vec![0.0f64; cell_count * cy1];
        let mut y2_cell = vec![0.0f64; cell_count * cy2];
        for s in 0..cs {
            for u0 in 0..cu0 {
                for u1 in 0..cu1 {
                    for u2 in 0..cu2 {
                        let cell = ((s * cu0 + u0) * cu1 + u1) * cu2 + u2;
                        for x in 0..cx {
                            let px = x_rows[cell * cx + x];
                            if px == 0.0 {
                                continue;
                            }
                            let g = x * cs + s;
                            for z in 0..cz {
                                z_cell[cell * cz + z] += px * z_xs[g * cz + z];
                            }
                            for y in 0..cy1 {
                                y1_cell[cell * cy1 + y] += px * y1_xs[g * cy1 + y];
                            }
                            for y in 0..cy2 {
                                y2_cell[cell * cy2 + y] += px * y2_xs[g * cy2 + y];
                            }
                        }
                    }
                }
            }
        }

        Ok(Self {
            tp,
            cs,
            cu0,
            cu1,
            cu2,
            cx,
            cy1,
            cy2,
            cz,
            p_s: channel.state_pmf().mass().to_vec(),
            p_su,
            p_su0,
            p_dec1,
            p_dec1_pair,
            p_dec2,
            p_dec2_pair,
            x_rows,
            trans_rows,
            z_cell,
            y1_cell,
            y2_cell,
        })
    }

    fn cell(&self, s: u8, u0: u8, u1: u8, u2: u8) -> usize {
        ((s as usize * self.cu0 + u0 as usize) * self.cu1 + u1 as usize) * self.cu2 + u2 as usize
    }
}

/// Index triple selected by the encoder. On a covering failure the protocol
/// falls back to the first triple so that keys and the transmitted word stay
/// well defined; the failure is counted as an error regardless.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Encoding {
    pub m0: usize,
    pub m1: usize,
    pub m2: usize,
    pub covering_failure: bool,
}

/// First index triple (lexicographic scan) whose words are jointly typical
/// with the state sequence.
pub fn encode_nofb(ctx: &NofbContext, cb: &Codebook, s_seq: &[u8]) -> Encoding {
    let tp = &ctx.tp;
    let mut pair_counts = vec![0u32; ctx.cs * ctx.cu0];
    let mut full_counts = vec![0u32; ctx.cs * ctx.cu0 * ctx.cu1 * ctx.cu2];
    let pair_cards = [ctx.cs, ctx.cu0];
    let full_cards = [ctx.cs, ctx.cu0, ctx.cu1, ctx.cu2];
    for m0 in 0..cb.u0.count {
        let w0 = cb.u0.word(m0);
        joint_counts(&[s_seq, w0], &pair_cards, &mut pair_counts);
        // Permissive prune: marginal typicality is necessary for the full
        // tuple, checked with a looser absolute slack.
        if !counts_typical_loose(&pair_counts, tp.n, &ctx.p_su0, tp.eps) {
            continue;
        }
        for m1 in 0..cb.u1_count {
            let w1 = cb.u1_word(m0, m1);
            for m2 in 0..cb.u2_count {
                let w2 = cb.u2_word(m0, m2);
                joint_counts(&[s_seq, w0, w1, w2], &full_cards, &mut full_counts);
                if counts_typical(&full_counts, tp.n, &ctx.p_su, tp.eps) {
                    return Encoding { m0, m1, m2, covering_failure: false };
                }
            }
        }
    }
    Encoding { m0: 0, m1: 0, m2: 0, covering_failure: true }
}

fn counts_typical_loose(counts: &[u32], n: usize, probs: &[f64], eps: f64) -> bool {
    let nf = n as f64;
    for (&c, &p) in counts.iter().zip(probs.iter()) {
        if (c as f64 - nf * p).abs() > eps * nf * p + 1e-6 {
            return false;
        }
    }
    true
}

/// Draw the channel input per symbol from p(X | u0,u1,u2,s).
pub fn draw_input<R: Rng>(
    ctx: &NofbContext,
    cb: &Codebook,
    enc: &Encoding,
    s_seq: &[u8],
    rng: &mut R,
) -> Vec<u8> {
    let w0 = cb.u0.word(enc.m0);
    let w1 = cb.u1_word(enc.m0, enc.m1);
    let w2 = cb.u2_word(enc.m0, enc.m2);
    let mut x = Vec::with_capacity(ctx.tp.n);
    for i in 0..ctx.tp.n {
        let cell = ctx.cell(s_seq[i], w0[i], w1[i], w2[i]);
        let row = &ctx.x_rows[cell * ctx.cx..(cell + 1) * ctx.cx];
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut sym = ctx.cx - 1;
        for (j, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                sym = j;
                break;
            }
        }
        x.push(sym as u8);
    }
    x
}

/// Which legitimate receiver is decoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Receiver {
    Rx1,
    Rx2,
}

/// Unique jointly typical (u0, uj) candidate for the received sequence.
///
/// Candidates are compared at the sequence level: index pairs carrying
/// identical words count as one candidate and the smallest index pair is
/// returned, so duplicate codewords do not masquerade as ambiguity. Zero or
/// two-plus distinct candidates is a packing failure.
pub fn decode_nofb(
    ctx: &NofbContext,
    cb: &Codebook,
    y_seq: &[u8],
    receiver: Receiver,
) -> Option<(usize, usize)> {
    let tp = &ctx.tp;
    let (cuj, cyj, pair_table, full_table) = match receiver {
        Receiver::Rx1 => (ctx.cu1, ctx.cy1, &ctx.p_dec1_pair, &ctx.p_dec1),
        Receiver::Rx2 => (ctx.cu2, ctx.cy2, &ctx.p_dec2_pair, &ctx.p_dec2),
    };
    let count_j = match receiver {
        Receiver::Rx1 => cb.u1_count,
        Receiver::Rx2 => cb.u2_count,
    };
    let mut pair_counts = vec![0u32; ctx.cu0 * cyj];
    let mut full_counts = vec![0u32; ctx.cu0 * cuj * cyj];
    let pair_cards = [ctx.cu0, cyj];
    let full_cards = [ctx.cu0, cuj, cyj];

    let mut found: Option<(usize, usize)> = None;
    for m0 in 0..cb.u0.count {
        let w0 = cb.u0.word(m0);
        joint_counts(&[w0, y_seq], &pair_cards, &mut pair_counts);
        if !counts_typical_loose(&pair_counts, tp.n, pair_table, tp.eps) {
            continue;
        }
        for mj in 0..count_j {
            let wj = match receiver {
                Receiver::Rx1 => cb.u1_word(m0, mj),
                Receiver::Rx2 => cb.u2_word(m0, mj),
            };
            joint_counts(&[w0, wj, y_seq], &full_cards, &mut full_counts);
            if !counts_typical(&full_counts, tp.n, full_table, tp.eps) {
                continue;
            }
            match found {
                None => found = Some((m0, mj)),
                Some((f0, fj)) => {
                    let same_w0 = cb.u0.word(f0) == w0;
                    let same_wj = match receiver {
                        Receiver::Rx1 => cb.u1_word(f0, fj) == wj,
                        Receiver::Rx2 => cb.u2_word(f0, fj) == wj,
                    };
                    if !(same_w0 && same_wj) {
                        return None; // ambiguity
                    }
                }
            }
        }
    }
    found
}

const METRIC_NAMES: [&str; 3] = ["keys_vs_z", "k1_vs_y2", "k2_vs_y1"];

#[derive(Debug, Clone, Copy, PartialEq)]
enum MetricPlan {
    /// Structurally zero (constant key or constant observation).
    Zero,
    Exact,
    PlugIn,
}

fn plan_metrics(ctx: &NofbContext, rates: &NofbRates, cb_hint: &Codebook) -> [MetricPlan; 3] {
    let n = ctx.tp.n as i32;
    let s_support = ctx.p_s.iter().filter(|&&p| p > 0.0).count() as f64;
    let s_count = s_support.powi(n);
    let scan = (cb_hint.u0.count * cb_hint.u1_count * cb_hint.u2_count * ctx.tp.n) as f64;

    let mut plans = [MetricPlan::PlugIn; 3];
    let obs_cards = [ctx.cz, ctx.cy2, ctx.cy1];
    let keys_trivial = [
        cb_hint.u0.num_bins == 1 && cb_hint.u1_num_bins == 1 && cb_hint.u2_num_bins == 1,
        cb_hint.u1_num_bins == 1,
        cb_hint.u2_num_bins == 1,
    ];
    let _ = rates;
    for (i, plan) in plans.iter_mut().enumerate() {
        if keys_trivial[i] || obs_cards[i] == 1 {
            *plan = MetricPlan::Zero;
            continue;
        }
        let obs_count = (obs_cards[i] as f64).powi(n);
        let states = s_count * obs_count;
        let work = s_count * (scan + obs_count * ctx.tp.n as f64);
        if states <= ENUMERATION_CAP && work <= WORK_CAP as f64 {
            *plan = MetricPlan::Exact;
        }
    }
    plans
}

/// Exact leakage values for one codebook, by posterior enumeration over the
/// state sequence with the input draw and channel integrated per symbol.
fn exact_metrics(ctx: &NofbContext, cb: &Codebook, plans: &[MetricPlan; 3]) -> [Option<f64>; 3] {
    let n = ctx.tp.n;
    let mut joints = [SparseJoint::default(), SparseJoint::default(), SparseJoint::default()];
    let need: Vec<usize> = (0..3).filter(|&i| plans[i] == MetricPlan::Exact).collect();
    if need.is_empty() {
        return [None, None, None];
    }

    let s_supports: Supports = vec![support_of_row(&ctx.p_s); n];
    let mut budget = WORK_CAP;
    let obs_tables: [&Vec<f64>; 3] = [&ctx.z_cell, &ctx.y2_cell, &ctx.y1_cell];
    let obs_cards = [ctx.cz, ctx.cy2, ctx.cy1];

    let mut ok = true;
    let mut s_budget = WORK_CAP;
    enumerate_product(&s_supports, &mut s_budget, |s_seq, ps| {
        if !ok {
            return;
        }
        let enc = encode_nofb(ctx, cb, s_seq);
        let (k0, k1, k2) = extract_keys_nofb(cb, (enc.m0, enc.m1, enc.m2)).unwrap();
        let w0 = cb.u0.word(enc.m0);
        let w1 = cb.u1_word(enc.m0, enc.m1);
        let w2 = cb.u2_word(enc.m0, enc.m2);
        let cells: Vec<usize> = (0..n)
            .map(|i| ctx.cell(s_seq[i], w0[i], w1[i], w2[i]))
            .collect();
        for &metric in &need {
            let table = obs_tables[metric];
            let card = obs_cards[metric];
            let supports: Supports = cells
                .iter()
                .map(|&cell| support_of_row(&table[cell * card..(cell + 1) * card]))
                .collect();
            let keys: Vec<u32> = match metric {
                0 => vec![k0, k1, k2],
                1 => vec![k1],
                _ => vec![k2],
            };
            let done = enumerate_product(&supports, &mut budget, |obs_seq, pobs| {
                joints[metric].add(&keys, obs_seq, ps * pobs);
            });
            if !done {
                ok = false;
                return;
            }
        }
    });

    let mut out = [None, None, None];
    if !ok {
        return out;
    }
    for &metric in &need {
        out[metric] = Some(joints[metric].mutual_information());
    }
    out
}

struct TrialOut {
    covering: bool,
    packing1: bool,
    packing2: bool,
    k0_err: bool,
    k1_err: bool,
    k2_err: bool,
    keys: (u32, u32, u32),
    estimates: [Option<u32>; 4], // k0 at rx1, k1, k0 at rx2, k2
    exact: [Option<f64>; 3],
    obs: Option<(Vec<u8>, Vec<u8>, Vec<u8>)>, // z, y2, y1 (for plug-in)
}

/// Run the no-feedback protocol.
///
/// Every trial draws a fresh codebook from its own seed, so error rates,
/// leakages and key histograms estimate code-ensemble averages. Leakage is
/// measured exactly per trial whenever the posterior enumeration fits the
/// cap, otherwise by a flagged plug-in estimate.
pub fn run_nofb(
    channel: &BroadcastChannel,
    scheme: &AuxScheme,
    rates: &NofbRates,
    tp: &TypicalityParams,
    trials: u64,
    master_seed: u64,
    opts: &SimOptions,
) -> Result<SimulationReport> {
    if trials < 1 {
        return Err(crate::error::Error::InvalidParameter("trials must be >= 1".into()));
    }
    let ctx = NofbContext::new(channel, scheme, *tp)?;
    // One probe codebook pins label-space sizes for planning and realized
    // rates (sizes are seed-independent).
    let probe = gen_codebooks_nofb(channel, scheme, rates, tp, 0)?;
    let plans = match opts.leakage {
        LeakageMode::Skip => [MetricPlan::PlugIn; 3], // unused
        LeakageMode::PlugIn => {
            let mut p = plan_metrics(&ctx, rates, &probe);
            for q in &mut p {
                if *q == MetricPlan::Exact {
                    *q = MetricPlan::PlugIn;
                }
            }
            p
        }
        LeakageMode::Auto => plan_metrics(&ctx, rates, &probe),
    };
    let measure = opts.leakage != LeakageMode::Skip;

    let outs: Vec<TrialOut> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let cb_seed = derive_seed(master_seed, StreamKind::Codebook, t);
            let cb = gen_codebooks_nofb(channel, scheme, rates, tp, cb_seed)
                .expect("probe codebook validated the configuration");
            let mut rng = substream(master_seed, StreamKind::Trial, t);

            let mut s_seq = Vec::with_capacity(tp.n);
            sample_seq(&mut rng, &ctx.p_s, tp.n, &mut s_seq);
            let enc = encode_nofb(&ctx, &cb, &s_seq);
            let x_seq = draw_input(&ctx, &cb, &enc, &s_seq, &mut rng);

            let mut y1_seq = Vec::with_capacity(tp.n);
            let mut y2_seq = Vec::with_capacity(tp.n);
            let mut z_seq = Vec::with_capacity(tp.n);
            let t_size = ctx.cy1 * ctx.cy2 * ctx.cz;
            for i in 0..tp.n {
                let g = x_seq[i] as usize * ctx.cs + s_seq[i] as usize;
                let row = &ctx.trans_rows[g * t_size..(g + 1) * t_size];
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut flat = t_size - 1;
                for (j, &p) in row.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        flat = j;
                        break;
                    }
                }
                z_seq.push((flat % ctx.cz) as u8);
                y2_seq.push(((flat / ctx.cz) % ctx.cy2) as u8);
                y1_seq.push((flat / (ctx.cz * ctx.cy2)) as u8);
            }

            let keys = extract_keys_nofb(&cb, (enc.m0, enc.m1, enc.m2)).unwrap();
            let dec1 = decode_nofb(&ctx, &cb, &y1_seq, Receiver::Rx1);
            let dec2 = decode_nofb(&ctx, &cb, &y2_seq, Receiver::Rx2);

            let est = |d: Option<(usize, usize)>, rx1: bool| -> (Option<u32>, Option<u32>) {
                match d {
                    None => (None, None),
                    Some((m0, mj)) => {
                        let k0 = cb.u0.bins[m0];
                        let kj = if rx1 {
                            cb.u1_bins[m0 * cb.u1_count + mj]
                        } else {
                            cb.u2_bins[m0 * cb.u2_count + mj]
                        };
                        (Some(k0), Some(kj))
                    }
                }
            };
            let (k0_rx1, k1_hat) = est(dec1, true);
            let (k0_rx2, k2_hat) = est(dec2, false);

            let cover = enc.covering_failure;
            let k0_err =
                cover || k0_rx1 != Some(keys.0) || k0_rx2 != Some(keys.0);
            let k1_err = cover || k1_hat != Some(keys.1);
            let k2_err = cover || k2_hat != Some(keys.2);

            let exact = if measure {
                exact_metrics(&ctx, &cb, &plans)
            } else {
                [None, None, None]
            };
            let obs = if measure {
                Some((z_seq, y2_seq, y1_seq))
            } else {
                None
            };
            TrialOut {
                covering: cover,
                packing1: dec1.is_none(),
                packing2: dec2.is_none(),
                k0_err,
                k1_err,
                k2_err,
                keys,
                estimates: [k0_rx1, k1_hat, k0_rx2, k2_hat],
                exact,
                obs,
            }
        })
        .collect();

    // Sequential aggregation in trial order keeps float sums deterministic.
    let mut failures = FailureCounts::default();
    let (mut e0, mut e1, mut e2, mut etot) = (0u64, 0u64, 0u64, 0u64);
    let mut hist0 = vec![0u64; probe.u0.num_bins as usize];
    let mut hist1 = vec![0u64; probe.u1_num_bins as usize];
    let mut hist2 = vec![0u64; probe.u2_num_bins as usize];
    let mut exact_sums = [0.0f64; 3];
    let mut exact_all = [true; 3];
    let mut plugins = [
        PlugInJoint::default(),
        PlugInJoint::default(),
        PlugInJoint::default(),
    ];
    let mut log = Vec::new();
    for (t, out) in outs.iter().enumerate() {
        failures.covering += out.covering as u64;
        failures.packing_rx1 += out.packing1 as u64;
        failures.packing_rx2 += out.packing2 as u64;
        e0 += out.k0_err as u64;
        e1 += out.k1_err as u64;
        e2 += out.k2_err as u64;
        etot += (out.k0_err || out.k1_err || out.k2_err) as u64;
        hist0[out.keys.0 as usize] += 1;
        hist1[out.keys.1 as usize] += 1;
        hist2[out.keys.2 as usize] += 1;
        for m in 0..3 {
            match out.exact[m] {
                Some(v) => exact_sums[m] += v,
                None => exact_all[m] = false,
            }
        }
        if let Some((z, y2, y1)) = &out.obs {
            let (k0, k1, k2) = out.keys;
            plugins[0].add_sample(&[k0, k1, k2], z);
            plugins[1].add_sample(&[k1], y2);
            plugins[2].add_sample(&[k2], y1);
        }
        if opts.trial_log {
            log.push(TrialRecord {
                trial: t as u64,
                failed: out.k0_err || out.k1_err || out.k2_err,
                keys: vec![out.keys.0, out.keys.1, out.keys.2],
                estimates: out.estimates.to_vec(),
            });
        }
    }

    let tf = trials as f64;
    let mut leakage = Vec::new();
    let mut bias_warning = false;
    if measure {
        for m in 0..3 {
            let (value, estimator) = match plans[m] {
                MetricPlan::Zero => (0.0, Estimator::Exact),
                MetricPlan::Exact if exact_all[m] => {
                    (exact_sums[m] / tf, Estimator::Exact)
                }
                _ => {
                    bias_warning = true;
                    (plugins[m].mutual_information(), Estimator::PlugIn)
                }
            };
            leakage.push(LeakageMetric {
                name: METRIC_NAMES[m].to_string(),
                bits_per_use: value / tp.n as f64,
                estimator,
            });
        }
    }

    let n = tp.n;
    let key_entropy = vec![
        key_report("k0", &hist0, n, rates.r0),
        key_report("k1", &hist1, n, rates.r1),
        key_report("k2", &hist2, n, rates.r2),
    ];
    Ok(SimulationReport {
        protocol: "nofb".to_string(),
        trials,
        n,
        eps: tp.eps,
        master_seed,
        realized_rates: vec![
            ("rt0".into(), realized_rate(n, probe.u0.count)),
            ("rt1".into(), realized_rate(n, probe.u1_count)),
            ("rt2".into(), realized_rate(n, probe.u2_count)),
            ("r0".into(), realized_rate(n, probe.u0.num_bins as usize)),
            ("r1".into(), realized_rate(n, probe.u1_num_bins as usize)),
            ("r2".into(), realized_rate(n, probe.u2_num_bins as usize)),
        ],
        errors: ErrorRates {
            k0: Some(e0 as f64 / tf),
            k1: e1 as f64 / tf,
            k2: e2 as f64 / tf,
            total: etot as f64 / tf,
        },
        failures,
        leakage,
        leakage_skipped: !measure,
        bias_warning,
        key_entropy,
        trial_log: if opts.trial_log { Some(log) } else { None },
    })
}

fn key_report(name: &str, hist: &[u64], n: usize, nominal: f64) -> KeyEntropyReport {
    let bits = histogram_entropy(hist);
    KeyEntropyReport {
        key: name.to_string(),
        empirical_bits: bits,
        per_use: bits / n as f64,
        realized_rate: realized_rate(n, hist.len()),
        nominal_rate: nominal,
    }
}
