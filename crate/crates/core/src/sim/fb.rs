//! Finite-blocklength simulator of the one-round-feedback protocol: each
//! receiver quantizes its channel output onto an enumerated typical set with
//! double binning, publishes the bin index over the public channel, and
//! keeps the sub-bin index as its key; the transmitter recovers both words
//! from the bins plus (x^n, s^n).

use std::collections::HashMap;

use rayon::prelude::*;

use crate::channel::{
    build_joint_fb, BroadcastChannel, FeedbackScheme, S, V1, V2, X, Y1, Y2, Z,
};
use crate::error::Result;
use crate::seed::{derive_seed, substream, StreamKind};
use crate::sim::codebook::{gen_double_binned, sample_seq, DoubleBinnedCodebook, FbRates};
use crate::sim::leakage::{
    enumerate_product, support_of_row, PlugInJoint, SparseJoint, Supports, ENUMERATION_CAP,
    WORK_CAP,
};
use crate::sim::report::{
    histogram_entropy, ErrorRates, Estimator, FailureCounts, KeyEntropyReport, LeakageMetric,
    LeakageMode, SimOptions, SimulationReport, TrialRecord,
};
use crate::sim::typicality::{counts_typical, joint_counts, realized_rate, TypicalityParams};

use rand::Rng;

/// Conditionally independent per-symbol output kernels, when the channel
/// factorizes as p(y1|x,s) p(y2|x,s) p(z|x,s). Exact feedback leakage needs
/// this structure to keep the posterior enumeration per-stream.
struct ProductKernel {
    y1_xs: Vec<f64>,
    y2_xs: Vec<f64>,
    z_xs: Vec<f64>,
}

/// Precomputed tables for the feedback protocol.
pub struct FbContext {
    pub tp: TypicalityParams,
    cs: usize,
    cx: usize,
    cy1: usize,
    cy2: usize,
    cz: usize,
    cv1: usize,
    cv2: usize,
    p_s: Vec<f64>,
    /// p(X|S) rows.
    x_rows: Vec<f64>,
    trans_rows: Vec<f64>,
    /// Quantizer-word marginals for codebook enumeration.
    pub p_v1: Vec<f64>,
    pub p_v2: Vec<f64>,
    /// p(V1,Y1) and p(V2,Y2) for receiver-side selection.
    p_v1y1: Vec<f64>,
    p_v2y2: Vec<f64>,
    /// p(V1,V2,X,S) for transmitter-side recovery, with the (V1,X,S)
    /// marginal as a prune.
    p_v12xs: Vec<f64>,
    p_v1xs: Vec<f64>,
    product: Option<ProductKernel>,
}

impl FbContext {
    pub fn new(
        channel: &BroadcastChannel,
        scheme: &FeedbackScheme,
        tp: TypicalityParams,
    ) -> Result<Self> {
        let full = build_joint_fb(channel, scheme)?;
        let cs = channel.card(S);
        let cx = channel.card(X);
        let cy1 = channel.card(Y1);
        let cy2 = channel.card(Y2);
        let cz = channel.card(Z);
        let cv1 = scheme.card_v1();
        let cv2 = scheme.card_v2();

        let grab = |names: &[&str]| -> Result<Vec<f64>> {
            Ok(full.marginalize(names)?.mass().to_vec())
        };
        let p_v1 = grab(&[V1])?;
        let p_v2 = grab(&[V2])?;
        let p_v1y1 = grab(&[V1, Y1])?;
        let p_v2y2 = grab(&[V2, Y2])?;
        let p_v12xs = grab(&[V1, V2, X, S])?;
        let p_v1xs = grab(&[V1, X, S])?;

        let mut x_rows = vec![0.0f64; cs * cx];
        for s in 0..cs {
            x_rows[s * cx..(s + 1) * cx].copy_from_slice(scheme.x_given_s.row(s));
        }
        let t = channel.transition();
        let t_size = cy1 * cy2 * cz;
        let mut trans_rows = vec![0.0f64; cx * cs * t_size];
        for g in 0..cx * cs {
            trans_rows[g * t_size..(g + 1) * t_size].copy_from_slice(t.row(g));
        }

        // Detect conditional independence of the three output streams.
        let mut y1_xs = vec![0.0f64; cx * cs * cy1];
        let mut y2_xs = vec![0.0f64; cx * cs * cy2];
        let mut z_xs = vec![0.0f64; cx * cs * cz];
        for g in 0..cx * cs {
            for y1 in 0..cy1 {
                for y2 in 0..cy2 {
                    for z in 0..cz {
                        let p = trans_rows[g * t_size + (y1 * cy2 + y2) * cz + z];
                        y1_xs[g * cy1 + y1] += p;
                        y2_xs[g * cy2 + y2] += p;
                        z_xs[g * cz + z] += p;
                    }
                }
            }
        }
        let mut factorizes = true;
        'outer: for g in 0..cx * cs {
            for y1 in 0..cy1 {
                for y2 in 0..cy2 {
                    for z in 0..cz {
                        let p = trans_rows[g * t_size + (y1 * cy2 + y2) * cz + z];
                        let q = y1_xs[g * cy1 + y1] * y2_xs[g * cy2 + y2] * z_xs[g * cz + z];
                        if (p - q).abs() > 1e-12 {
                            factorizes = false;
                            break 'outer;
                        }
                    }
                }
            }
        }
        let product = factorizes.then_some(ProductKernel { y1_xs, y2_xs, z_xs });

        Ok(Self {
            tp,
            cs,
            cx,
            cy1,
            cy2,
            cz,
            cv1,
            cv2,
            p_s: channel.state_pmf().mass().to_vec(),
            x_rows,
            trans_rows,
            p_v1,
            p_v2,
            p_v1y1,
            p_v2y2,
            p_v12xs,
            p_v1xs,
            product,
        })
    }
}

/// Which receiver runs the quantize-and-bin step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbReceiver {
    Rx1,
    Rx2,
}

/// First codebook word (enumeration order) jointly typical with the
/// received sequence. Returns (bin index, sub-bin index), or None when no
/// typical word exists.
pub fn fb_receiver_step(
    ctx: &FbContext,
    cb: &DoubleBinnedCodebook,
    receiver: FbReceiver,
    y_seq: &[u8],
) -> Option<(u32, u32)> {
    let (cv, cy, table) = match receiver {
        FbReceiver::Rx1 => (ctx.cv1, ctx.cy1, &ctx.p_v1y1),
        FbReceiver::Rx2 => (ctx.cv2, ctx.cy2, &ctx.p_v2y2),
    };
    let cards = [cv, cy];
    let mut counts = vec![0u32; cv * cy];
    for i in 0..cb.count {
        let w = cb.word(i);
        joint_counts(&[w, y_seq], &cards, &mut counts);
        if counts_typical(&counts, ctx.tp.n, table, ctx.tp.eps) {
            return Some((cb.bins[i], cb.subbins[i]));
        }
    }
    None
}

/// Search bin psi1 x bin psi2 for the unique word pair jointly typical with
/// (x^n, s^n); returns the sub-bin indices. Zero or multiple candidates is
/// a recovery failure.
pub fn tx_recover(
    ctx: &FbContext,
    cb1: &DoubleBinnedCodebook,
    cb2: &DoubleBinnedCodebook,
    x_seq: &[u8],
    s_seq: &[u8],
    psi1: u32,
    psi2: u32,
) -> Option<(u32, u32)> {
    let n = ctx.tp.n;
    let cards4 = [ctx.cv1, ctx.cv2, ctx.cx, ctx.cs];
    let cards3 = [ctx.cv1, ctx.cx, ctx.cs];
    let mut counts4 = vec![0u32; cards4.iter().product()];
    let mut counts3 = vec![0u32; cards3.iter().product()];
    let mut found: Option<(u32, u32)> = None;
    for &i1 in &cb1.bin_members[psi1 as usize] {
        let w1 = cb1.word(i1 as usize);
        joint_counts(&[w1, x_seq, s_seq], &cards3, &mut counts3);
        if !counts_typical_loose(&counts3, n, &ctx.p_v1xs, ctx.tp.eps) {
            continue;
        }
        for &i2 in &cb2.bin_members[psi2 as usize] {
            let w2 = cb2.word(i2 as usize);
            joint_counts(&[w1, w2, x_seq, s_seq], &cards4, &mut counts4);
            if counts_typical(&counts4, n, &ctx.p_v12xs, ctx.tp.eps) {
                if found.is_some() {
                    return None; // words are distinct, so this is ambiguity
                }
                found = Some((i1, i2));
            }
        }
    }
    found.map(|(i1, i2)| (cb1.subbins[i1 as usize], cb2.subbins[i2 as usize]))
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

const METRIC_NAMES: [&str; 3] = ["k1_vs_y2_public", "k2_vs_y1_public", "keys_vs_z_public"];

#[derive(Debug, Clone, Copy, PartialEq)]
enum MetricPlan {
    Zero,
    Exact,
    PlugIn,
}

fn plan_metrics(
    ctx: &FbContext,
    cb1: &DoubleBinnedCodebook,
    cb2: &DoubleBinnedCodebook,
) -> [MetricPlan; 3] {
    let n = ctx.tp.n as i32;
    let mut plans = [MetricPlan::PlugIn; 3];
    let trivial = [
        cb1.num_subbins == 1,
        cb2.num_subbins == 1,
        cb1.num_subbins == 1 && cb2.num_subbins == 1,
    ];
    if ctx.product.is_none() {
        for (plan, &t) in plans.iter_mut().zip(trivial.iter()) {
            if t {
                *plan = MetricPlan::Zero;
            }
        }
        return plans;
    }
    let supp = |row: &[f64]| row.iter().filter(|&&p| p > 0.0).count() as f64;
    let s_supp = supp(&ctx.p_s);
    let x_supp = (0..ctx.cs)
        .map(|s| supp(&ctx.x_rows[s * ctx.cx..(s + 1) * ctx.cx]))
        .fold(0.0f64, f64::max);
    let sx = (s_supp * x_supp).powi(n);
    let pk = ctx.product.as_ref().unwrap();
    let max_supp = |rows: &[f64], card: usize| -> f64 {
        (0..ctx.cx * ctx.cs)
            .map(|g| supp(&rows[g * card..(g + 1) * card]))
            .fold(0.0f64, f64::max)
    };
    let y1_enum = max_supp(&pk.y1_xs, ctx.cy1).powi(n);
    let y2_enum = max_supp(&pk.y2_xs, ctx.cy2).powi(n);
    let z_enum = max_supp(&pk.z_xs, ctx.cz).powi(n);
    let a_bound = y1_enum.min((cb1.num_bins * cb1.num_subbins) as f64);
    let b_bound = y2_enum.min((cb2.num_bins * cb2.num_subbins) as f64);

    let states = [sx * y2_enum, sx * y1_enum, sx * z_enum * a_bound.min(64.0)];
    let work = [
        sx * (y1_enum + y2_enum) * ctx.tp.n as f64 + sx * a_bound * y2_enum,
        sx * (y1_enum + y2_enum) * ctx.tp.n as f64 + sx * b_bound * y1_enum,
        sx * (y1_enum + y2_enum + z_enum) * ctx.tp.n as f64 + sx * a_bound * b_bound * z_enum,
    ];
    for m in 0..3 {
        if trivial[m] {
            plans[m] = MetricPlan::Zero;
        } else if states[m] <= ENUMERATION_CAP && work[m] <= WORK_CAP as f64 {
            plans[m] = MetricPlan::Exact;
        }
    }
    plans
}

/// Receiver outcome lookup with the protocol's fallback: no typical word
/// means bin 0 / sub-bin 0 is sent.
fn receiver_with_fallback(
    ctx: &FbContext,
    cb: &DoubleBinnedCodebook,
    receiver: FbReceiver,
    y_seq: &[u8],
) -> ((u32, u32), bool) {
    match fb_receiver_step(ctx, cb, receiver, y_seq) {
        Some(pk) => (pk, false),
        None => ((0, 0), true),
    }
}

fn obs_blob(seq: &[u8], psi1: u32, psi2: u32) -> Vec<u8> {
    let mut v = Vec::with_capacity(seq.len() + 8);
    v.extend_from_slice(seq);
    v.extend_from_slice(&psi1.to_le_bytes());
    v.extend_from_slice(&psi2.to_le_bytes());
    v
}

/// Exact leakage for one codebook pair, by posterior enumeration over
/// (s^n, x^n) with the three output streams enumerated per stream — valid
/// because the plan requires the factorized kernel.
fn exact_metrics(
    ctx: &FbContext,
    cb1: &DoubleBinnedCodebook,
    cb2: &DoubleBinnedCodebook,
    plans: &[MetricPlan; 3],
) -> [Option<f64>; 3] {
    let need: Vec<usize> = (0..3).filter(|&m| plans[m] == MetricPlan::Exact).collect();
    if need.is_empty() {
        return [None, None, None];
    }
    let pk = ctx.product.as_ref().unwrap();
    let n = ctx.tp.n;
    let mut joints = [SparseJoint::default(), SparseJoint::default(), SparseJoint::default()];
    let mut cache1: HashMap<Vec<u8>, (u32, u32)> = HashMap::new();
    let mut cache2: HashMap<Vec<u8>, (u32, u32)> = HashMap::new();
    let mut budget = WORK_CAP;
    let mut ok = true;

    let s_supports: Supports = vec![support_of_row(&ctx.p_s); n];
    let mut s_budget = WORK_CAP;
    enumerate_product(&s_supports, &mut s_budget, |s_seq, ps| {
        if !ok {
            return;
        }
        let x_supports: Supports = s_seq
            .iter()
            .map(|&s| {
                support_of_row(&ctx.x_rows[s as usize * ctx.cx..(s as usize + 1) * ctx.cx])
            })
            .collect();
        let s_seq = s_seq.to_vec();
        let mut x_budget = WORK_CAP;
        enumerate_product(&x_supports, &mut x_budget, |x_seq, px| {
            if !ok {
                return;
            }
            let p_sx = ps * px;
            let stream_supports = |rows: &[f64], card: usize| -> Supports {
                (0..n)
                    .map(|i| {
                        let g = x_seq[i] as usize * ctx.cs + s_seq[i] as usize;
                        support_of_row(&rows[g * card..(g + 1) * card])
                    })
                    .collect()
            };
            // Stream distributions of ((psi, k), prob) and full per-sequence
            // lists for the cross metrics.
            let mut a_map: Vec<((u32, u32), f64)> = Vec::new();
            let mut a_full: Vec<(Vec<u8>, (u32, u32), f64)> = Vec::new();
            {
                let sup = stream_supports(&pk.y1_xs, ctx.cy1);
                let done = enumerate_product(&sup, &mut budget, |y1, p| {
                    let pk1 = *cache1
                        .entry(y1.to_vec())
                        .or_insert_with(|| receiver_with_fallback(ctx, cb1, FbReceiver::Rx1, y1).0);
                    a_full.push((y1.to_vec(), pk1, p));
                    match a_map.iter_mut().find(|(k, _)| *k == pk1) {
                        Some((_, acc)) => *acc += p,
                        None => a_map.push((pk1, p)),
                    }
                });
                if !done {
                    ok = false;
                    return;
                }
            }
            let mut b_map: Vec<((u32, u32), f64)> = Vec::new();
            let mut b_full: Vec<(Vec<u8>, (u32, u32), f64)> = Vec::new();
            {
                let sup = stream_supports(&pk.y2_xs, ctx.cy2);
                let done = enumerate_product(&sup, &mut budget, |y2, p| {
                    let pk2 = *cache2
                        .entry(y2.to_vec())
                        .or_insert_with(|| receiver_with_fallback(ctx, cb2, FbReceiver::Rx2, y2).0);
                    b_full.push((y2.to_vec(), pk2, p));
                    match b_map.iter_mut().find(|(k, _)| *k == pk2) {
                        Some((_, acc)) => *acc += p,
                        None => b_map.push((pk2, p)),
                    }
                });
                if !done {
                    ok = false;
                    return;
                }
            }

            for &m in &need {
                match m {
                    0 => {
                        for (y2, (psi2, _k2), p2) in &b_full {
                            for ((psi1, k1), pa) in &a_map {
                                if budget == 0 {
                                    ok = false;
                                    return;
                                }
                                budget -= 1;
                                joints[0].add(
                                    &[*k1],
                                    &obs_blob(y2, *psi1, *psi2),
                                    p_sx * pa * p2,
                                );
                            }
                        }
                    }
                    1 => {
                        for (y1, (psi1, _k1), p1) in &a_full {
                            for ((psi2, k2), pb) in &b_map {
                                if budget == 0 {
                                    ok = false;
                                    return;
                                }
                                budget -= 1;
                                joints[1].add(
                                    &[*k2],
                                    &obs_blob(y1, *psi1, *psi2),
                                    p_sx * p1 * pb,
                                );
                            }
                        }
                    }
                    _ => {
                        let sup = stream_supports(&pk.z_xs, ctx.cz);
                        let mut z_budget = budget;
                        let done = enumerate_product(&sup, &mut z_budget, |z_seq, pz| {
                            for &((psi1, k1), pa) in a_map.iter() {
                                for &((psi2, k2), pb) in b_map.iter() {
                                    joints[2].add(
                                        &[k1, k2],
                                        &obs_blob(z_seq, psi1, psi2),
                                        p_sx * pa * pb * pz,
                                    );
                                }
                            }
                        });
                        budget = z_budget;
                        if !done {
                            ok = false;
                            return;
                        }
                    }
                }
            }
        });
    });

    let mut out = [None, None, None];
    if !ok {
        return out;
    }
    for &m in &need {
        out[m] = Some(joints[m].mutual_information());
    }
    out
}

struct TrialOut {
    rx1_fail: bool,
    rx2_fail: bool,
    recover_fail: bool,
    k1_err: bool,
    k2_err: bool,
    keys: (u32, u32),
    estimates: (Option<u32>, Option<u32>),
    exact: [Option<f64>; 3],
    obs: Option<(Vec<u8>, Vec<u8>, Vec<u8>, u32, u32)>, // y2, y1, z, psi1, psi2
}

/// Run the one-round-feedback protocol. Fresh codebooks per trial; exact
/// leakage per trial where the enumeration fits, plug-in otherwise.
pub fn run_fb(
    channel: &BroadcastChannel,
    scheme: &FeedbackScheme,
    rates: &FbRates,
    tp: &TypicalityParams,
    trials: u64,
    master_seed: u64,
    opts: &SimOptions,
) -> Result<SimulationReport> {
    if trials < 1 {
        return Err(crate::error::Error::InvalidParameter("trials must be >= 1".into()));
    }
    let ctx = FbContext::new(channel, scheme, *tp)?;
    let probe1 = gen_double_binned(&ctx.p_v1, tp, rates.rp1, rates.r1, 0)?;
    let probe2 = gen_double_binned(&ctx.p_v2, tp, rates.rp2, rates.r2, 0)?;
    let plans = match opts.leakage {
        LeakageMode::Skip => [MetricPlan::PlugIn; 3],
        LeakageMode::PlugIn => {
            let mut p = plan_metrics(&ctx, &probe1, &probe2);
            for q in &mut p {
                if *q == MetricPlan::Exact {
                    *q = MetricPlan::PlugIn;
                }
            }
            p
        }
        LeakageMode::Auto => plan_metrics(&ctx, &probe1, &probe2),
    };
    let measure = opts.leakage != LeakageMode::Skip;

    let outs: Vec<TrialOut> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let cb1 = gen_double_binned(
                &ctx.p_v1,
                tp,
                rates.rp1,
                rates.r1,
                derive_seed(master_seed, StreamKind::Codebook, 2 * t),
            )
            .expect("probe validated the configuration");
            let cb2 = gen_double_binned(
                &ctx.p_v2,
                tp,
                rates.rp2,
                rates.r2,
                derive_seed(master_seed, StreamKind::Codebook, 2 * t + 1),
            )
            .expect("probe validated the configuration");
            let mut rng = substream(master_seed, StreamKind::Trial, t);

            let n = tp.n;
            let mut s_seq = Vec::with_capacity(n);
            sample_seq(&mut rng, &ctx.p_s, n, &mut s_seq);
            let mut x_seq = Vec::with_capacity(n);
            for &s in &s_seq {
                let row = &ctx.x_rows[s as usize * ctx.cx..(s as usize + 1) * ctx.cx];
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
                x_seq.push(sym as u8);
            }
            let t_size = ctx.cy1 * ctx.cy2 * ctx.cz;
            let (mut y1_seq, mut y2_seq, mut z_seq) =
                (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
            for i in 0..n {
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

            let ((psi1, k1), rx1_fail) =
                receiver_with_fallback(&ctx, &cb1, FbReceiver::Rx1, &y1_seq);
            let ((psi2, k2), rx2_fail) =
                receiver_with_fallback(&ctx, &cb2, FbReceiver::Rx2, &y2_seq);
            let recovered = tx_recover(&ctx, &cb1, &cb2, &x_seq, &s_seq, psi1, psi2);
            let recover_fail = recovered.is_none();
            let (k1_hat, k2_hat) = match recovered {
                Some((a, b)) => (Some(a), Some(b)),
                None => (None, None),
            };
            let k1_err = rx1_fail || k1_hat != Some(k1);
            let k2_err = rx2_fail || k2_hat != Some(k2);

            let exact = if measure {
                exact_metrics(&ctx, &cb1, &cb2, &plans)
            } else {
                [None, None, None]
            };
            let obs = measure.then(|| (y2_seq, y1_seq, z_seq, psi1, psi2));
            TrialOut {
                rx1_fail,
                rx2_fail,
                recover_fail,
                k1_err,
                k2_err,
                keys: (k1, k2),
                estimates: (k1_hat, k2_hat),
                exact,
                obs,
            }
        })
        .collect();

    let mut failures = FailureCounts::default();
    let (mut e1, mut e2, mut etot) = (0u64, 0u64, 0u64);
    let mut hist1 = vec![0u64; probe1.num_subbins as usize];
    let mut hist2 = vec![0u64; probe2.num_subbins as usize];
    let mut exact_sums = [0.0f64; 3];
    let mut exact_all = [true; 3];
    let mut plugins = [
        PlugInJoint::default(),
        PlugInJoint::default(),
        PlugInJoint::default(),
    ];
    let mut log = Vec::new();
    for (t, out) in outs.iter().enumerate() {
        failures.receiver_rx1 += out.rx1_fail as u64;
        failures.receiver_rx2 += out.rx2_fail as u64;
        failures.recover += out.recover_fail as u64;
        e1 += out.k1_err as u64;
        e2 += out.k2_err as u64;
        etot += (out.k1_err || out.k2_err) as u64;
        hist1[out.keys.0 as usize] += 1;
        hist2[out.keys.1 as usize] += 1;
        for m in 0..3 {
            match out.exact[m] {
                Some(v) => exact_sums[m] += v,
                None => exact_all[m] = false,
            }
        }
        if let Some((y2, y1, z, psi1, psi2)) = &out.obs {
            plugins[0].add_sample(&[out.keys.0], &obs_blob(y2, *psi1, *psi2));
            plugins[1].add_sample(&[out.keys.1], &obs_blob(y1, *psi1, *psi2));
            plugins[2].add_sample(&[out.keys.0, out.keys.1], &obs_blob(z, *psi1, *psi2));
        }
        if opts.trial_log {
            log.push(TrialRecord {
                trial: t as u64,
                failed: out.k1_err || out.k2_err,
                keys: vec![out.keys.0, out.keys.1],
                estimates: vec![out.estimates.0, out.estimates.1],
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
                MetricPlan::Exact if exact_all[m] => (exact_sums[m] / tf, Estimator::Exact),
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
        KeyEntropyReport {
            key: "k1".into(),
            empirical_bits: histogram_entropy(&hist1),
            per_use: histogram_entropy(&hist1) / n as f64,
            realized_rate: realized_rate(n, probe1.num_subbins as usize),
            nominal_rate: rates.r1,
        },
        KeyEntropyReport {
            key: "k2".into(),
            empirical_bits: histogram_entropy(&hist2),
            per_use: histogram_entropy(&hist2) / n as f64,
            realized_rate: realized_rate(n, probe2.num_subbins as usize),
            nominal_rate: rates.r2,
        },
    ];
    Ok(SimulationReport {
        protocol: "fb".to_string(),
        trials,
        n,
        eps: tp.eps,
        master_seed,
        realized_rates: vec![
            ("rp1".into(), realized_rate(n, probe1.num_bins as usize)),
            ("rp2".into(), realized_rate(n, probe2.num_bins as usize)),
            ("r1".into(), realized_rate(n, probe1.num_subbins as usize)),
            ("r2".into(), realized_rate(n, probe2.num_subbins as usize)),
        ],
        errors: ErrorRates {
            k0: None,
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
