//! The state-dependent 3-receiver broadcast channel and the two families of
//! designer-chosen auxiliary distributions, plus the builders for the full
//! joints they induce.
//!
//! Variable names are fixed: `S` (state), `X` (input), `Y1`/`Y2` (legitimate
//! receivers), `Z` (eavesdropper), `U0`/`U1`/`U2` (auxiliaries of the
//! no-feedback scheme), `V1`/`V2` (quantized observations of the feedback
//! scheme).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{compose, ConditionalPmf, JointPmf, Variable};

pub const S: &str = "S";
pub const X: &str = "X";
pub const Y1: &str = "Y1";
pub const Y2: &str = "Y2";
pub const Z: &str = "Z";
pub const U0: &str = "U0";
pub const U1: &str = "U1";
pub const U2: &str = "U2";
pub const V1: &str = "V1";
pub const V2: &str = "V2";

/// Variable order of the joint built for the no-feedback scheme.
pub const NOFB_ORDER: [&str; 8] = [S, U0, U1, U2, X, Y1, Y2, Z];
/// Variable order of the joint built for the feedback scheme.
pub const FB_ORDER: [&str; 7] = [S, X, Y1, Y2, Z, V1, V2];
/// Variable order of the channel-only joint used by the outer bound.
pub const CHANNEL_ORDER: [&str; 5] = [S, X, Y1, Y2, Z];

/// p(S) together with the kernel p(Y1,Y2,Z | X,S).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BroadcastChannel {
    state_pmf: JointPmf,
    transition: ConditionalPmf,
}

impl BroadcastChannel {
    /// `state_pmf` must be a distribution over `S` alone; `transition` must
    /// map (X,S) to (Y1,Y2,Z) with exactly those names.
    pub fn new(state_pmf: JointPmf, transition: ConditionalPmf) -> Result<Self> {
        if state_pmf.variables().len() != 1 || state_pmf.variables()[0].name != S {
            return Err(Error::InvalidParameter(format!(
                "state pmf must cover exactly `{S}`"
            )));
        }
        let t_names: Vec<&str> = transition.targets().iter().map(|v| v.name.as_str()).collect();
        let g_names: Vec<&str> = transition.givens().iter().map(|v| v.name.as_str()).collect();
        if t_names != [Y1, Y2, Z] {
            return Err(Error::InvalidParameter(format!(
                "transition targets must be [{Y1}, {Y2}, {Z}], got {t_names:?}"
            )));
        }
        if g_names != [X, S] {
            return Err(Error::InvalidParameter(format!(
                "transition givens must be [{X}, {S}], got {g_names:?}"
            )));
        }
        let s_card = state_pmf.variables()[0].cardinality;
        let s_in_kernel = transition.givens()[1].cardinality;
        if s_card != s_in_kernel {
            return Err(Error::CardinalityMismatch {
                name: S.to_string(),
                expected: s_card,
                actual: s_in_kernel,
            });
        }
        Ok(Self { state_pmf, transition })
    }

    pub fn state_pmf(&self) -> &JointPmf {
        &self.state_pmf
    }

    pub fn transition(&self) -> &ConditionalPmf {
        &self.transition
    }

    pub fn card(&self, name: &str) -> usize {
        match name {
            S => self.state_pmf.variables()[0].cardinality,
            X => self.transition.givens()[0].cardinality,
            Y1 => self.transition.targets()[0].cardinality,
            Y2 => self.transition.targets()[1].cardinality,
            Z => self.transition.targets()[2].cardinality,
            _ => 0,
        }
    }

    /// Joint over (S,X,Y1,Y2,Z) induced by an input kernel p(X|S).
    pub fn joint_with_input(&self, x_given_s: &ConditionalPmf) -> Result<JointPmf> {
        expect_kernel(x_given_s, &[X], &[S])?;
        compose(&self.state_pmf, &[x_given_s, &self.transition])
    }

    /// Check that a joint over (S,X,Y1,Y2,Z) has this channel's state
    /// marginal and transition kernel (positive-mass cells, tolerance `tol`).
    pub fn consistent_with(&self, joint: &JointPmf, tol: f64) -> Result<()> {
        expect_vars(joint, &CHANNEL_ORDER)?;
        let s_marg = joint.marginalize(&[S])?;
        for (i, (&a, &b)) in s_marg
            .mass()
            .iter()
            .zip(self.state_pmf.mass().iter())
            .enumerate()
        {
            if (a - b).abs() > tol {
                return Err(Error::InconsistentJoint(format!(
                    "p(S={i}) is {a}, channel says {b}"
                )));
            }
        }
        let kernel = joint.condition(&[Y1, Y2, Z], &[X, S])?;
        let t_size = kernel.target_size();
        for g in 0..kernel.given_size() {
            if !kernel.is_constrained(g) {
                continue;
            }
            for t in 0..t_size {
                let a = kernel.prob(t, g);
                let b = self.transition.prob(t, g);
                if (a - b).abs() > tol {
                    return Err(Error::InconsistentJoint(format!(
                        "kernel cell (t={t}, g={g}) is {a}, channel says {b}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn expect_kernel(k: &ConditionalPmf, targets: &[&str], givens: &[&str]) -> Result<()> {
    let t: Vec<&str> = k.targets().iter().map(|v| v.name.as_str()).collect();
    let g: Vec<&str> = k.givens().iter().map(|v| v.name.as_str()).collect();
    if t != targets || g != givens {
        return Err(Error::InvalidParameter(format!(
            "expected kernel p({targets:?} | {givens:?}), got p({t:?} | {g:?})"
        )));
    }
    Ok(())
}

/// Check a joint covers exactly `names` in that order.
pub fn expect_vars(joint: &JointPmf, names: &[&str]) -> Result<()> {
    let have: Vec<&str> = joint.variables().iter().map(|v| v.name.as_str()).collect();
    if have != names {
        return Err(Error::InvalidParameter(format!(
            "joint must cover {names:?} in order, got {have:?}"
        )));
    }
    Ok(())
}

/// Auxiliary distributions of the no-feedback scheme:
/// p(U0|S), p(U1|S,U0), p(U2|S,U0) and p(X|S,U0,U1,U2).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuxScheme {
    pub u0_given_s: ConditionalPmf,
    pub u1_given_u0_s: ConditionalPmf,
    pub u2_given_u0_s: ConditionalPmf,
    pub x_given_all: ConditionalPmf,
}

impl AuxScheme {
    pub fn new(
        u0_given_s: ConditionalPmf,
        u1_given_u0_s: ConditionalPmf,
        u2_given_u0_s: ConditionalPmf,
        x_given_all: ConditionalPmf,
    ) -> Result<Self> {
        expect_kernel(&u0_given_s, &[U0], &[S])?;
        expect_kernel(&u1_given_u0_s, &[U1], &[S, U0])?;
        expect_kernel(&u2_given_u0_s, &[U2], &[S, U0])?;
        expect_kernel(&x_given_all, &[X], &[S, U0, U1, U2])?;
        Ok(Self { u0_given_s, u1_given_u0_s, u2_given_u0_s, x_given_all })
    }

    pub fn card_u0(&self) -> usize {
        self.u0_given_s.targets()[0].cardinality
    }

    pub fn card_u1(&self) -> usize {
        self.u1_given_u0_s.targets()[0].cardinality
    }

    pub fn card_u2(&self) -> usize {
        self.u2_given_u0_s.targets()[0].cardinality
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.u0_given_s.canonical_bytes(&mut out);
        self.u1_given_u0_s.canonical_bytes(&mut out);
        self.u2_given_u0_s.canonical_bytes(&mut out);
        self.x_given_all.canonical_bytes(&mut out);
        out
    }
}

/// Distributions of the one-round feedback scheme: p(X|S), p(V1|Y1), p(V2|Y2).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeedbackScheme {
    pub x_given_s: ConditionalPmf,
    pub v1_given_y1: ConditionalPmf,
    pub v2_given_y2: ConditionalPmf,
}

impl FeedbackScheme {
    pub fn new(
        x_given_s: ConditionalPmf,
        v1_given_y1: ConditionalPmf,
        v2_given_y2: ConditionalPmf,
    ) -> Result<Self> {
        expect_kernel(&x_given_s, &[X], &[S])?;
        expect_kernel(&v1_given_y1, &[V1], &[Y1])?;
        expect_kernel(&v2_given_y2, &[V2], &[Y2])?;
        Ok(Self { x_given_s, v1_given_y1, v2_given_y2 })
    }

    pub fn card_v1(&self) -> usize {
        self.v1_given_y1.targets()[0].cardinality
    }

    pub fn card_v2(&self) -> usize {
        self.v2_given_y2.targets()[0].cardinality
    }
}

/// p(S) p(U0|S) p(U1|S,U0) p(U2|S,U0) p(X|S,U0,U1,U2) p(Y1,Y2,Z|X,S),
/// over (S,U0,U1,U2,X,Y1,Y2,Z).
pub fn build_joint_nofb(channel: &BroadcastChannel, scheme: &AuxScheme) -> Result<JointPmf> {
    let joint = compose(
        channel.state_pmf(),
        &[
            &scheme.u0_given_s,
            &scheme.u1_given_u0_s,
            &scheme.u2_given_u0_s,
            &scheme.x_given_all,
            channel.transition(),
        ],
    )?;
    debug_assert!(expect_vars(&joint, &NOFB_ORDER).is_ok());
    Ok(joint)
}

/// p(S) p(X|S) p(Y1,Y2,Z|X,S) p(V1|Y1) p(V2|Y2), over (S,X,Y1,Y2,Z,V1,V2).
pub fn build_joint_fb(channel: &BroadcastChannel, scheme: &FeedbackScheme) -> Result<JointPmf> {
    let joint = compose(
        channel.state_pmf(),
        &[
            &scheme.x_given_s,
            channel.transition(),
            &scheme.v1_given_y1,
            &scheme.v2_given_y2,
        ],
    )?;
    debug_assert!(expect_vars(&joint, &FB_ORDER).is_ok());
    Ok(joint)
}

/// Which wiretap reduction to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WiretapMode {
    /// Merge Y1 and Y2 into a single legitimate output (requires identical
    /// marginal kernels).
    Nofb,
    /// Collapse Y2 to a singleton, keeping receiver 1.
    FbKeepRx1,
    /// Collapse Y1 to a singleton, keeping receiver 2.
    FbKeepRx2,
}

const MERGE_TOLERANCE: f64 = 1e-12;

/// Reduce the 3-receiver channel to a wiretap channel.
///
/// In `Nofb` mode the two legitimate outputs are merged into one variable
/// (represented as a perfectly correlated pair so the spec shape is kept);
/// the marginal kernels p(Y1|X,S) and p(Y2|X,S) must agree within 1e-12.
/// The feedback modes collapse the dropped receiver's output to a singleton
/// alphabet by marginalizing it out of the kernel.
pub fn reduce_to_wiretap(channel: &BroadcastChannel, mode: WiretapMode) -> Result<BroadcastChannel> {
    let t = channel.transition();
    let cy1 = channel.card(Y1);
    let cy2 = channel.card(Y2);
    let cz = channel.card(Z);
    let g_size = t.given_size();

    match mode {
        WiretapMode::Nofb => {
            if cy1 != cy2 {
                return Err(Error::KernelsDiffer(f64::INFINITY));
            }
            // Marginal kernels p(y1, z | x, s) and p(y2, z | x, s).
            let mut worst = 0.0f64;
            let mut y1z = vec![0.0f64; g_size * cy1 * cz];
            for g in 0..g_size {
                let row = t.row(g);
                let mut y2z = vec![0.0f64; cy2 * cz];
                for y1 in 0..cy1 {
                    for y2 in 0..cy2 {
                        for z in 0..cz {
                            let p = row[(y1 * cy2 + y2) * cz + z];
                            y1z[g * cy1 * cz + y1 * cz + z] += p;
                            y2z[y2 * cz + z] += p;
                        }
                    }
                }
                // Compare on the Y marginals alone, the discriminating part.
                let mut m1 = vec![0.0f64; cy1];
                let mut m2 = vec![0.0f64; cy2];
                for y in 0..cy1 {
                    for z in 0..cz {
                        m1[y] += y1z[g * cy1 * cz + y * cz + z];
                        m2[y] += y2z[y * cz + z];
                    }
                }
                for y in 0..cy1 {
                    worst = worst.max((m1[y] - m2[y]).abs());
                }
            }
            if worst > MERGE_TOLERANCE {
                return Err(Error::KernelsDiffer(worst));
            }
            // New kernel: mass sits on the diagonal y1 == y2, copied from the
            // (Y1, Z) marginal so that marginalizing back is exact.
            let mut table = vec![0.0f64; g_size * cy1 * cy1 * cz];
            for g in 0..g_size {
                for y in 0..cy1 {
                    for z in 0..cz {
                        table[g * cy1 * cy1 * cz + (y * cy1 + y) * cz + z] =
                            y1z[g * cy1 * cz + y * cz + z];
                    }
                }
            }
            let transition = ConditionalPmf::new(
                vec![
                    Variable::new(Y1, cy1),
                    Variable::new(Y2, cy1),
                    Variable::new(Z, cz),
                ],
                t.givens().to_vec(),
                table,
            )?;
            BroadcastChannel::new(channel.state_pmf().clone(), transition)
        }
        WiretapMode::FbKeepRx1 | WiretapMode::FbKeepRx2 => {
            let keep_rx1 = mode == WiretapMode::FbKeepRx1;
            let (new_cy1, new_cy2) = if keep_rx1 { (cy1, 1) } else { (1, cy2) };
            let mut table = vec![0.0f64; g_size * new_cy1 * new_cy2 * cz];
            for g in 0..g_size {
                let row = t.row(g);
                for y1 in 0..cy1 {
                    for y2 in 0..cy2 {
                        for z in 0..cz {
                            let kept = if keep_rx1 { y1 } else { y2 };
                            table[g * new_cy1 * new_cy2 * cz + kept * cz + z] +=
                                row[(y1 * cy2 + y2) * cz + z];
                        }
                    }
                }
            }
            let transition = ConditionalPmf::new(
                vec![
                    Variable::new(Y1, new_cy1),
                    Variable::new(Y2, new_cy2),
                    Variable::new(Z, cz),
                ],
                t.givens().to_vec(),
                table,
            )?;
            BroadcastChannel::new(channel.state_pmf().clone(), transition)
        }
    }
}

/// Convenience builders shared by tests and bundled fixtures.
pub mod fixtures {
    use super::*;

    /// Kernel with conditionally independent component channels
    /// p(y1|x,s) p(y2|x,s) p(z|x,s). Each component is given as a
    /// given-major table over (x, s) rows.
    pub fn product_kernel(
        cx: usize,
        cs: usize,
        y1: (usize, &dyn Fn(usize, usize, usize) -> f64),
        y2: (usize, &dyn Fn(usize, usize, usize) -> f64),
        z: (usize, &dyn Fn(usize, usize, usize) -> f64),
    ) -> Result<ConditionalPmf> {
        let (cy1, py1) = y1;
        let (cy2, py2) = y2;
        let (cz, pz) = z;
        let mut table = vec![0.0f64; cx * cs * cy1 * cy2 * cz];
        for x in 0..cx {
            for s in 0..cs {
                let g = x * cs + s;
                for a in 0..cy1 {
                    for b in 0..cy2 {
                        for c in 0..cz {
                            table[g * cy1 * cy2 * cz + (a * cy2 + b) * cz + c] =
                                py1(a, x, s) * py2(b, x, s) * pz(c, x, s);
                        }
                    }
                }
            }
        }
        ConditionalPmf::new(
            vec![
                Variable::new(Y1, cy1),
                Variable::new(Y2, cy2),
                Variable::new(Z, cz),
            ],
            vec![Variable::new(X, cx), Variable::new(S, cs)],
            table,
        )
    }

    /// |S|=1, binary X, Y1=Y2=X noiselessly, Z constant.
    pub fn noiseless_binary() -> BroadcastChannel {
        let state = JointPmf::new(vec![Variable::new(S, 1)], vec![1.0]).unwrap();
        let ident = |y: usize, x: usize, _s: usize| if y == x { 1.0 } else { 0.0 };
        let constant = |y: usize, _x: usize, _s: usize| if y == 0 { 1.0 } else { 0.0 };
        let kernel = product_kernel(2, 1, (2, &ident), (2, &ident), (1, &constant)).unwrap();
        BroadcastChannel::new(state, kernel).unwrap()
    }

    /// |S|=1, binary X, Y1 and Y2 through independent BSCs with the same
    /// crossover, Z through a noisier BSC.
    pub fn bsc_wiretap(legit_crossover: f64, eve_crossover: f64) -> BroadcastChannel {
        let state = JointPmf::new(vec![Variable::new(S, 1)], vec![1.0]).unwrap();
        let bsc = move |q: f64| move |y: usize, x: usize, _s: usize| if y == x { 1.0 - q } else { q };
        let legit = bsc(legit_crossover);
        let eve = bsc(eve_crossover);
        let kernel = product_kernel(2, 1, (2, &legit), (2, &legit), (2, &eve)).unwrap();
        BroadcastChannel::new(state, kernel).unwrap()
    }

    /// Uniform binary S; both legitimate receivers see X through a BSC whose
    /// crossover depends on the state; Z sees X through a fixed BSC.
    pub fn state_binary(cross_s0: f64, cross_s1: f64, eve_crossover: f64) -> BroadcastChannel {
        let state = JointPmf::uniform(vec![Variable::new(S, 2)]).unwrap();
        let legit = move |y: usize, x: usize, s: usize| {
            let q = if s == 0 { cross_s0 } else { cross_s1 };
            if y == x {
                1.0 - q
            } else {
                q
            }
        };
        let eve = move |y: usize, x: usize, _s: usize| {
            if y == x {
                1.0 - eve_crossover
            } else {
                eve_crossover
            }
        };
        let kernel = product_kernel(2, 2, (2, &legit), (2, &legit), (2, &eve)).unwrap();
        BroadcastChannel::new(state, kernel).unwrap()
    }

    /// Uniform binary S, X = U0 identity path: Y1 = Y2 = X noiseless, Z = X.
    /// Used to exercise the secrecy-direction of the binning analysis.
    pub fn state_revealing_eavesdropper() -> BroadcastChannel {
        let state = JointPmf::uniform(vec![Variable::new(S, 2)]).unwrap();
        let ident = |y: usize, x: usize, _s: usize| if y == x { 1.0 } else { 0.0 };
        let kernel = product_kernel(2, 2, (2, &ident), (2, &ident), (2, &ident)).unwrap();
        BroadcastChannel::new(state, kernel).unwrap()
    }
}
