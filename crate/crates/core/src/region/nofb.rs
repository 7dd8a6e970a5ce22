//! Inner and outer secret-key rate bounds for the no-feedback scheme, and
//! scalarized search over the designer-chosen auxiliary distributions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{
    expect_vars, AuxScheme, BroadcastChannel, CHANNEL_ORDER, NOFB_ORDER, S, U0,
    U1, U2, X,
};
use crate::error::{Error, Result};
use crate::prob::{ConditionalPmf, JointPmf, Variable};
use crate::region::{positive_part, MaskEntropy};
use crate::seed::{substream, StreamKind};

use rand::Rng;

/// Covering slacks below this are infeasible.
pub const FEASIBILITY_SLACK: f64 = -1e-9;
/// Inner points may exceed the outer box by at most this much.
pub const CONTAINMENT_SLACK: f64 = 1e-6;

// Bit positions follow NOFB_ORDER = [S, U0, U1, U2, X, Y1, Y2, Z].
const M_S: u32 = 1 << 0;
const M_U0: u32 = 1 << 1;
const M_U1: u32 = 1 << 2;
const M_U2: u32 = 1 << 3;
const M_Y1: u32 = 1 << 5;
const M_Y2: u32 = 1 << 6;
const M_Z: u32 = 1 << 7;

/// The six right-hand sides of the no-feedback inner bound (after `[.]+`),
/// plus the four covering slacks that gate achievability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InnerPointNofb {
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    pub r0_plus_r1: f64,
    pub r0_plus_r2: f64,
    pub r0_plus_r1_plus_r2: f64,
    pub feasible: bool,
    /// I(U0;Y1)-I(U0;S), I(U0;Y2)-I(U0;S), I(U1;Y1|U0)-I(U1;S|U0),
    /// I(U2;Y2|U0)-I(U2;S|U0).
    pub constraint_slacks: [f64; 4],
}

/// Per-rate caps of the outer bound, maximized coordinatewise.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OuterBox {
    pub r0_max: f64,
    pub r1_max: f64,
    pub r2_max: f64,
}

/// Evaluate the inner bound on a joint over (S,U0,U1,U2,X,Y1,Y2,Z).
pub fn eval_inner_nofb(joint: &JointPmf) -> Result<InnerPointNofb> {
    expect_vars(joint, &NOFB_ORDER)?;
    let mut me = MaskEntropy::new(joint);

    let i_u0_y1 = me.mi(M_U0, M_Y1, 0);
    let i_u0_y2 = me.mi(M_U0, M_Y2, 0);
    let i_u0_z = me.mi(M_U0, M_Z, 0);
    let i_u0_s = me.mi(M_U0, M_S, 0);
    let i_u1_y1 = me.mi(M_U1, M_Y1, M_U0);
    let i_u1_y2u2 = me.mi(M_U1, M_Y2 | M_U2, M_U0);
    let i_u1_s = me.mi(M_U1, M_S, M_U0);
    let i_u2_y2 = me.mi(M_U2, M_Y2, M_U0);
    let i_u2_y1u1 = me.mi(M_U2, M_Y1 | M_U1, M_U0);
    let i_u2_s = me.mi(M_U2, M_S, M_U0);
    let i_u0u1_z = me.mi(M_U0 | M_U1, M_Z, 0);
    let i_u0u2_z = me.mi(M_U0 | M_U2, M_Z, 0);
    let i_u0u1u2_z = me.mi(M_U0 | M_U1 | M_U2, M_Z, 0);
    let i_u1_u2 = me.mi(M_U1, M_U2, M_U0);

    let common = i_u0_y1.min(i_u0_y2);
    let slacks = [
        i_u0_y1 - i_u0_s,
        i_u0_y2 - i_u0_s,
        i_u1_y1 - i_u1_s,
        i_u2_y2 - i_u2_s,
    ];
    Ok(InnerPointNofb {
        r0: positive_part(common - i_u0_z),
        r1: positive_part(i_u1_y1 - i_u1_y2u2),
        r2: positive_part(i_u2_y2 - i_u2_y1u1),
        r0_plus_r1: positive_part(common + i_u1_y1 - i_u0u1_z),
        r0_plus_r2: positive_part(common + i_u2_y2 - i_u0u2_z),
        r0_plus_r1_plus_r2: positive_part(
            common + i_u1_y1 + i_u2_y2 - i_u0u1u2_z - i_u1_u2,
        ),
        feasible: slacks.iter().all(|&s| s >= FEASIBILITY_SLACK),
        constraint_slacks: slacks,
    })
}

// Bit positions for the channel-only joint (S, X, Y1, Y2, Z).
const C_S: u32 = 1 << 0;
const C_X: u32 = 1 << 1;
const C_Y1: u32 = 1 << 2;
const C_Y2: u32 = 1 << 3;
const C_Z: u32 = 1 << 4;

/// Evaluate the outer bound on a joint over (S,X,Y1,Y2,Z).
pub fn eval_outer_nofb(joint: &JointPmf) -> Result<OuterBox> {
    expect_vars(joint, &CHANNEL_ORDER)?;
    let mut me = MaskEntropy::new(joint);
    let xs = C_X | C_S;
    let y1_z = me.mi(xs, C_Y1, C_Z);
    let y2_z = me.mi(xs, C_Y2, C_Z);
    let y1_y2 = me.mi(xs, C_Y1, C_Y2);
    let y2_y1 = me.mi(xs, C_Y2, C_Y1);
    Ok(OuterBox {
        r0_max: y1_z.min(y2_z),
        r1_max: y1_y2.min(y1_z),
        r2_max: y2_y1.min(y2_z),
    })
}

/// True iff the inner point fits coordinatewise inside the outer box.
pub fn check_containment(inner: &InnerPointNofb, outer: &OuterBox) -> bool {
    inner.r0 <= outer.r0_max + CONTAINMENT_SLACK
        && inner.r1 <= outer.r1_max + CONTAINMENT_SLACK
        && inner.r2 <= outer.r2_max + CONTAINMENT_SLACK
}

/// Random-restart coordinate-ascent budget. All streams derive from `seed`,
/// so results do not depend on scheduling.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SearchBudget {
    pub restarts: usize,
    pub iters: usize,
    pub init_step: f64,
    pub decay: f64,
    pub decay_every: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            restarts: 64,
            iters: 500,
            init_step: 1.0,
            decay: 0.95,
            decay_every: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceEntry {
    pub restart: usize,
    pub objective: f64,
}

/// Outcome of the scalarized inner search, together with the outer box from
/// the same channel for the containment sanity bridge.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateRegionReport {
    pub weights: [f64; 3],
    pub objective: f64,
    pub best_point: InnerPointNofb,
    pub best_rates: [f64; 3],
    pub best_scheme: AuxScheme,
    pub outer: OuterBox,
    pub containment_ok: bool,
    pub search_trace: Vec<TraceEntry>,
}

/// Maximize `w . (R0,R1,R2)` over the polytope cut out by an inner point:
/// the three per-rate caps, the three sum caps and nonnegativity. Solved
/// exactly by vertex enumeration (nine halfspaces in three variables).
pub fn scalarize_inner(point: &InnerPointNofb, weights: [f64; 3]) -> (f64, [f64; 3]) {
    let rows: [([f64; 3], f64); 9] = [
        ([1.0, 0.0, 0.0], point.r0),
        ([0.0, 1.0, 0.0], point.r1),
        ([0.0, 0.0, 1.0], point.r2),
        ([1.0, 1.0, 0.0], point.r0_plus_r1),
        ([1.0, 0.0, 1.0], point.r0_plus_r2),
        ([1.0, 1.0, 1.0], point.r0_plus_r1_plus_r2),
        ([-1.0, 0.0, 0.0], 0.0),
        ([0.0, -1.0, 0.0], 0.0),
        ([0.0, 0.0, -1.0], 0.0),
    ];
    let det3 = |m: &[[f64; 3]; 3]| -> f64 {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let mut best = (0.0f64, [0.0f64; 3]); // origin is always feasible
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            for k in (j + 1)..rows.len() {
                let m = [rows[i].0, rows[j].0, rows[k].0];
                let d = det3(&m);
                if d.abs() < 1e-12 {
                    continue;
                }
                let b = [rows[i].1, rows[j].1, rows[k].1];
                // Cramer's rule.
                let mut p = [0.0f64; 3];
                for c in 0..3 {
                    let mut mc = m;
                    for r in 0..3 {
                        mc[r][c] = b[r];
                    }
                    p[c] = det3(&mc) / d;
                }
                if rows
                    .iter()
                    .all(|(a, rhs)| a[0] * p[0] + a[1] * p[1] + a[2] * p[2] <= rhs + 1e-9)
                {
                    let obj = weights[0] * p[0] + weights[1] * p[1] + weights[2] * p[2];
                    if obj > best.0 {
                        best = (obj, p);
                    }
                }
            }
        }
    }
    best
}

/// Search-loop evaluator for the inner bound. Every information term in the
/// bound pairs scheme variables with at most one channel output, so instead
/// of materializing the eight-variable joint it mixes the per-(x,s) output
/// marginals into each scheme cell and accumulates a fixed set of small
/// tables in a single pass. Must agree with [`eval_inner_nofb`] to within
/// rounding; a regression test enforces that.
struct FastInner {
    cs: usize,
    cu0: usize,
    cu1: usize,
    cu2: usize,
    cx: usize,
    cy1: usize,
    cy2: usize,
    cz: usize,
    p_s: Vec<f64>,
    /// Per-(x,s) output marginals of the channel kernel.
    y1_xs: Vec<f64>,
    y2_xs: Vec<f64>,
    z_xs: Vec<f64>,
    tables: Tables,
    wy1: Vec<f64>,
    wy2: Vec<f64>,
    wz: Vec<f64>,
}

#[derive(Clone, Default)]
struct Tables {
    s: Vec<f64>,
    u0: Vec<f64>,
    y1: Vec<f64>,
    y2: Vec<f64>,
    z: Vec<f64>,
    u0_s: Vec<f64>,
    u0_y1: Vec<f64>,
    u0_y2: Vec<f64>,
    u0_z: Vec<f64>,
    u0u1: Vec<f64>,
    u0u2: Vec<f64>,
    su0u1: Vec<f64>,
    su0u2: Vec<f64>,
    u0u1u2: Vec<f64>,
    u0u1_y1: Vec<f64>,
    u0u1_z: Vec<f64>,
    u0u2_y2: Vec<f64>,
    u0u2_z: Vec<f64>,
    u0u1u2_y1: Vec<f64>,
    u0u1u2_y2: Vec<f64>,
    u0u1u2_z: Vec<f64>,
}

impl FastInner {
    fn new(channel: &BroadcastChannel, cards: (usize, usize, usize)) -> Self {
        let (cs, cx) = (channel.card(S), channel.card(X));
        let cy1 = channel.card(crate::channel::Y1);
        let cy2 = channel.card(crate::channel::Y2);
        let cz = channel.card(crate::channel::Z);
        let (cu0, cu1, cu2) = cards;
        let t = channel.transition();
        let mut y1_xs = vec![0.0f64; cx * cs * cy1];
        let mut y2_xs = vec![0.0f64; cx * cs * cy2];
        let mut z_xs = vec![0.0f64; cx * cs * cz];
        for g in 0..cx * cs {
            let row = t.row(g);
            for y1 in 0..cy1 {
                for y2 in 0..cy2 {
                    for z in 0..cz {
                        let p = row[(y1 * cy2 + y2) * cz + z];
                        y1_xs[g * cy1 + y1] += p;
                        y2_xs[g * cy2 + y2] += p;
                        z_xs[g * cz + z] += p;
                    }
                }
            }
        }
        let tables = Tables {
            s: vec![0.0; cs],
            u0: vec![0.0; cu0],
            y1: vec![0.0; cy1],
            y2: vec![0.0; cy2],
            z: vec![0.0; cz],
            u0_s: vec![0.0; cs * cu0],
            u0_y1: vec![0.0; cu0 * cy1],
            u0_y2: vec![0.0; cu0 * cy2],
            u0_z: vec![0.0; cu0 * cz],
            u0u1: vec![0.0; cu0 * cu1],
            u0u2: vec![0.0; cu0 * cu2],
            su0u1: vec![0.0; cs * cu0 * cu1],
            su0u2: vec![0.0; cs * cu0 * cu2],
            u0u1u2: vec![0.0; cu0 * cu1 * cu2],
            u0u1_y1: vec![0.0; cu0 * cu1 * cy1],
            u0u1_z: vec![0.0; cu0 * cu1 * cz],
            u0u2_y2: vec![0.0; cu0 * cu2 * cy2],
            u0u2_z: vec![0.0; cu0 * cu2 * cz],
            u0u1u2_y1: vec![0.0; cu0 * cu1 * cu2 * cy1],
            u0u1u2_y2: vec![0.0; cu0 * cu1 * cu2 * cy2],
            u0u1u2_z: vec![0.0; cu0 * cu1 * cu2 * cz],
        };
        Self {
            cs,
            cu0,
            cu1,
            cu2,
            cx,
            cy1,
            cy2,
            cz,
            p_s: channel.state_pmf().mass().to_vec(),
            y1_xs,
            y2_xs,
            z_xs,
            tables,
            wy1: vec![0.0; cy1],
            wy2: vec![0.0; cy2],
            wz: vec![0.0; cz],
        }
    }

    /// Evaluate from raw softmaxed rows (same layouts as the scheme kernels).
    fn eval(
        &mut self,
        u0_rows: &[f64],
        u1_rows: &[f64],
        u2_rows: &[f64],
        x_rows: &[f64],
    ) -> InnerPointNofb {
        let (cs, cu0, cu1, cu2, cx) = (self.cs, self.cu0, self.cu1, self.cu2, self.cx);
        let (cy1, cy2, cz) = (self.cy1, self.cy2, self.cz);
        let t = &mut self.tables;
        for v in [
            &mut t.s, &mut t.u0, &mut t.y1, &mut t.y2, &mut t.z, &mut t.u0_s, &mut t.u0_y1,
            &mut t.u0_y2, &mut t.u0_z, &mut t.u0u1, &mut t.u0u2, &mut t.su0u1, &mut t.su0u2,
            &mut t.u0u1u2, &mut t.u0u1_y1, &mut t.u0u1_z, &mut t.u0u2_y2, &mut t.u0u2_z,
            &mut t.u0u1u2_y1, &mut t.u0u1u2_y2, &mut t.u0u1u2_z,
        ] {
            v.fill(0.0);
        }
        for s in 0..cs {
            let ps = self.p_s[s];
            if ps == 0.0 {
                continue;
            }
            for u0 in 0..cu0 {
                let q0 = ps * u0_rows[s * cu0 + u0];
                if q0 == 0.0 {
                    continue;
                }
                let su0 = s * cu0 + u0;
                for u1 in 0..cu1 {
                    let q1 = q0 * u1_rows[su0 * cu1 + u1];
                    if q1 == 0.0 {
                        continue;
                    }
                    for u2 in 0..cu2 {
                        let q = q1 * u2_rows[su0 * cu2 + u2];
                        if q == 0.0 {
                            continue;
                        }
                        let cell = (su0 * cu1 + u1) * cu2 + u2;
                        // Mix the output marginals over the input draw.
                        self.wy1.fill(0.0);
                        self.wy2.fill(0.0);
                        self.wz.fill(0.0);
                        for x in 0..cx {
                            let px = x_rows[cell * cx + x];
                            if px == 0.0 {
                                continue;
                            }
                            let g = x * cs + s;
                            for y in 0..cy1 {
                                self.wy1[y] += px * self.y1_xs[g * cy1 + y];
                            }
                            for y in 0..cy2 {
                                self.wy2[y] += px * self.y2_xs[g * cy2 + y];
                            }
                            for z in 0..cz {
                                self.wz[z] += px * self.z_xs[g * cz + z];
                            }
                        }

                        t.s[s] += q;
                        t.u0[u0] += q;
                        t.u0_s[su0] += q;
                        t.u0u1[u0 * cu1 + u1] += q;
                        t.u0u2[u0 * cu2 + u2] += q;
                        t.su0u1[su0 * cu1 + u1] += q;
                        t.su0u2[su0 * cu2 + u2] += q;
                        let u012 = (u0 * cu1 + u1) * cu2 + u2;
                        t.u0u1u2[u012] += q;
                        for y in 0..cy1 {
                            let v = q * self.wy1[y];
                            t.y1[y] += v;
                            t.u0_y1[u0 * cy1 + y] += v;
                            t.u0u1_y1[(u0 * cu1 + u1) * cy1 + y] += v;
                            t.u0u1u2_y1[u012 * cy1 + y] += v;
                        }
                        for y in 0..cy2 {
                            let v = q * self.wy2[y];
                            t.y2[y] += v;
                            t.u0_y2[u0 * cy2 + y] += v;
                            t.u0u2_y2[(u0 * cu2 + u2) * cy2 + y] += v;
                            t.u0u1u2_y2[u012 * cy2 + y] += v;
                        }
                        for z in 0..cz {
                            let v = q * self.wz[z];
                            t.z[z] += v;
                            t.u0_z[u0 * cz + z] += v;
                            t.u0u1_z[(u0 * cu1 + u1) * cz + z] += v;
                            t.u0u2_z[(u0 * cu2 + u2) * cz + z] += v;
                            t.u0u1u2_z[u012 * cz + z] += v;
                        }
                    }
                }
            }
        }

        use crate::prob::entropy_of_table as ent;
        let h_s = ent(&t.s);
        let h_u0 = ent(&t.u0);
        let h_y1 = ent(&t.y1);
        let h_y2 = ent(&t.y2);
        let h_z = ent(&t.z);
        let h_u0_s = ent(&t.u0_s);
        let h_u0_y1 = ent(&t.u0_y1);
        let h_u0_y2 = ent(&t.u0_y2);
        let h_u0_z = ent(&t.u0_z);
        let h_u0u1 = ent(&t.u0u1);
        let h_u0u2 = ent(&t.u0u2);
        let h_su0u1 = ent(&t.su0u1);
        let h_su0u2 = ent(&t.su0u2);
        let h_u0u1u2 = ent(&t.u0u1u2);
        let h_u0u1_y1 = ent(&t.u0u1_y1);
        let h_u0u1_z = ent(&t.u0u1_z);
        let h_u0u2_y2 = ent(&t.u0u2_y2);
        let h_u0u2_z = ent(&t.u0u2_z);
        let h_u0u1u2_y1 = ent(&t.u0u1u2_y1);
        let h_u0u1u2_y2 = ent(&t.u0u1u2_y2);
        let h_u0u1u2_z = ent(&t.u0u1u2_z);

        let i_u0_y1 = h_u0 + h_y1 - h_u0_y1;
        let i_u0_y2 = h_u0 + h_y2 - h_u0_y2;
        let i_u0_z = h_u0 + h_z - h_u0_z;
        let i_u0_s = h_u0 + h_s - h_u0_s;
        let i_u1_y1 = h_u0u1 + h_u0_y1 - h_u0u1_y1 - h_u0;
        let i_u1_y2u2 = h_u0u1 + h_u0u2_y2 - h_u0u1u2_y2 - h_u0;
        let i_u1_s = h_u0u1 + h_u0_s - h_su0u1 - h_u0;
        let i_u2_y2 = h_u0u2 + h_u0_y2 - h_u0u2_y2 - h_u0;
        let i_u2_y1u1 = h_u0u2 + h_u0u1_y1 - h_u0u1u2_y1 - h_u0;
        let i_u2_s = h_u0u2 + h_u0_s - h_su0u2 - h_u0;
        let i_u0u1_z = h_u0u1 + h_z - h_u0u1_z;
        let i_u0u2_z = h_u0u2 + h_z - h_u0u2_z;
        let i_u0u1u2_z = h_u0u1u2 + h_z - h_u0u1u2_z;
        let i_u1_u2 = h_u0u1 + h_u0u2 - h_u0u1u2 - h_u0;

        let common = i_u0_y1.min(i_u0_y2);
        let slacks = [
            i_u0_y1 - i_u0_s,
            i_u0_y2 - i_u0_s,
            i_u1_y1 - i_u1_s,
            i_u2_y2 - i_u2_s,
        ];
        InnerPointNofb {
            r0: positive_part(common - i_u0_z),
            r1: positive_part(i_u1_y1 - i_u1_y2u2),
            r2: positive_part(i_u2_y2 - i_u2_y1u1),
            r0_plus_r1: positive_part(common + i_u1_y1 - i_u0u1_z),
            r0_plus_r2: positive_part(common + i_u2_y2 - i_u0u2_z),
            r0_plus_r1_plus_r2: positive_part(
                common + i_u1_y1 + i_u2_y2 - i_u0u1u2_z - i_u1_u2,
            ),
            feasible: slacks.iter().all(|&v| v >= FEASIBILITY_SLACK),
            constraint_slacks: slacks,
        }
    }
}

/// Softmax-parameterized auxiliary scheme. Logits are grouped per
/// conditioning row; each row maps through softmax to a conditional.
struct SchemeParams {
    cs: usize,
    cu0: usize,
    cu1: usize,
    cu2: usize,
    cx: usize,
}

impl SchemeParams {
    fn new(channel: &BroadcastChannel, cards: (usize, usize, usize)) -> Self {
        Self {
            cs: channel.card(S),
            cu0: cards.0,
            cu1: cards.1,
            cu2: cards.2,
            cx: channel.card(X),
        }
    }

    fn len(&self) -> usize {
        self.cs * self.cu0
            + self.cs * self.cu0 * self.cu1
            + self.cs * self.cu0 * self.cu2
            + self.cs * self.cu0 * self.cu1 * self.cu2 * self.cx
    }

    fn build(&self, logits: &[f64]) -> AuxScheme {
        let (cs, cu0, cu1, cu2, cx) = (self.cs, self.cu0, self.cu1, self.cu2, self.cx);
        let mut off = 0usize;
        let mut take = |rows: usize, width: usize| {
            let slice = &logits[off..off + rows * width];
            off += rows * width;
            softmax_rows(slice, rows, width)
        };
        let u0 = take(cs, cu0);
        let u1 = take(cs * cu0, cu1);
        let u2 = take(cs * cu0, cu2);
        let x = take(cs * cu0 * cu1 * cu2, cx);
        AuxScheme::new(
            ConditionalPmf::new(
                vec![Variable::new(U0, cu0)],
                vec![Variable::new(S, cs)],
                u0,
            )
            .unwrap(),
            ConditionalPmf::new(
                vec![Variable::new(U1, cu1)],
                vec![Variable::new(S, cs), Variable::new(U0, cu0)],
                u1,
            )
            .unwrap(),
            ConditionalPmf::new(
                vec![Variable::new(U2, cu2)],
                vec![Variable::new(S, cs), Variable::new(U0, cu0)],
                u2,
            )
            .unwrap(),
            ConditionalPmf::new(
                vec![Variable::new(X, cx)],
                vec![
                    Variable::new(S, cs),
                    Variable::new(U0, cu0),
                    Variable::new(U1, cu1),
                    Variable::new(U2, cu2),
                ],
                x,
            )
            .unwrap(),
        )
        .unwrap()
    }
}

fn softmax_rows_into(logits: &[f64], rows: usize, width: usize, out: &mut [f64]) {
    for r in 0..rows {
        let row = &logits[r * width..(r + 1) * width];
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for (i, &l) in row.iter().enumerate() {
            let e = (l - max).exp();
            out[r * width + i] = e;
            sum += e;
        }
        for v in &mut out[r * width..(r + 1) * width] {
            *v /= sum;
        }
    }
}

fn softmax_rows(logits: &[f64], rows: usize, width: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; rows * width];
    softmax_rows_into(logits, rows, width, &mut out);
    out
}

/// Per-restart workspace: softmax buffers plus the fast evaluator.
struct InnerWorkspace {
    layout: SchemeParams,
    evaluator: FastInner,
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    x: Vec<f64>,
}

impl InnerWorkspace {
    fn new(channel: &BroadcastChannel, cards: (usize, usize, usize)) -> Self {
        let layout = SchemeParams::new(channel, cards);
        let (cs, cu0, cu1, cu2, cx) =
            (layout.cs, layout.cu0, layout.cu1, layout.cu2, layout.cx);
        Self {
            evaluator: FastInner::new(channel, cards),
            u0: vec![0.0; cs * cu0],
            u1: vec![0.0; cs * cu0 * cu1],
            u2: vec![0.0; cs * cu0 * cu2],
            x: vec![0.0; cs * cu0 * cu1 * cu2 * cx],
            layout,
        }
    }

    fn point(&mut self, logits: &[f64]) -> InnerPointNofb {
        let l = &self.layout;
        let mut off = 0usize;
        let mut take = |rows: usize, width: usize, out: &mut [f64]| {
            softmax_rows_into(&logits[off..off + rows * width], rows, width, out);
            off += rows * width;
        };
        take(l.cs, l.cu0, &mut self.u0);
        take(l.cs * l.cu0, l.cu1, &mut self.u1);
        take(l.cs * l.cu0, l.cu2, &mut self.u2);
        take(l.cs * l.cu0 * l.cu1 * l.cu2, l.cx, &mut self.x);
        self.evaluator.eval(&self.u0, &self.u1, &self.u2, &self.x)
    }

    fn objective(&mut self, logits: &[f64], weights: [f64; 3]) -> (f64, [f64; 3], InnerPointNofb) {
        let point = self.point(logits);
        if point.feasible {
            let (obj, rates) = scalarize_inner(&point, weights);
            (obj, rates, point)
        } else {
            (f64::NEG_INFINITY, [0.0; 3], point)
        }
    }

    /// Ascent score: reported objective when feasible; otherwise the worst
    /// covering slack shifted far below every feasible score, so restarts
    /// that start infeasible can climb back into the feasible set. Reported
    /// candidates still reject infeasible points outright.
    fn score(&mut self, logits: &[f64], weights: [f64; 3]) -> f64 {
        let point = self.point(logits);
        if point.feasible {
            scalarize_inner(&point, weights).0
        } else {
            let worst = point
                .constraint_slacks
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            worst - 1e3
        }
    }
}

struct Candidate {
    objective: f64,
    rates: [f64; 3],
    point: InnerPointNofb,
    scheme: AuxScheme,
    key: Vec<u8>,
}

fn eval_candidate(
    ws: &mut InnerWorkspace,
    params: &SchemeParams,
    logits: &[f64],
    weights: [f64; 3],
) -> Candidate {
    // Infeasible schemes are rejected outright: the bound promises nothing
    // outside the covering constraints.
    let (objective, rates, point) = ws.objective(logits, weights);
    let scheme = params.build(logits);
    Candidate {
        objective,
        rates,
        point,
        key: scheme.canonical_bytes(),
        scheme,
    }
}

/// Deterministic preference: higher objective wins; exact ties go to the
/// lexicographically smallest serialized scheme.
fn better(a: &Candidate, b: &Candidate) -> bool {
    a.objective > b.objective || (a.objective == b.objective && a.key < b.key)
}

fn ascent<R: Rng>(
    rng: &mut R,
    n_params: usize,
    budget: &SearchBudget,
    mut eval: impl FnMut(&[f64]) -> f64,
) -> (Vec<f64>, f64) {
    let mut logits: Vec<f64> = (0..n_params).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut best = eval(&logits);
    let mut step = budget.init_step;
    for iter in 0..budget.iters {
        if iter > 0 && iter % budget.decay_every == 0 {
            step *= budget.decay;
        }
        let coord = rng.gen_range(0..n_params);
        let orig = logits[coord];
        let mut improved = false;
        for delta in [step, -step] {
            logits[coord] = orig + delta;
            let val = eval(&logits);
            if val > best {
                best = val;
                improved = true;
                break;
            }
        }
        if !improved {
            logits[coord] = orig;
        }
    }
    (logits, best)
}

/// Maximize `weights . (R0,R1,R2)` over feasible inner points by
/// random-restart coordinate ascent on the softmax-parameterized scheme.
/// Returns the best point found (a lower bound on the true optimum) along
/// with the outer box searched under the same budget.
pub fn maximize_inner_nofb(
    channel: &BroadcastChannel,
    cards: (usize, usize, usize),
    weights: [f64; 3],
    budget: &SearchBudget,
) -> Result<RateRegionReport> {
    if budget.restarts == 0 || budget.iters == 0 {
        return Err(Error::ZeroBudget);
    }
    if weights.iter().any(|&w| w < 0.0) || weights.iter().all(|&w| w == 0.0) {
        return Err(Error::InvalidParameter(
            "weights must be non-negative and not all zero".into(),
        ));
    }
    if cards.0 == 0 || cards.1 == 0 || cards.2 == 0 {
        return Err(Error::InvalidParameter("auxiliary cardinalities must be positive".into()));
    }
    let params = SchemeParams::new(channel, cards);
    let n = params.len();

    // Uniform-kernel baseline: always feasible (auxiliaries independent of
    // the state give zero covering cost), so the report never degenerates.
    let baseline = {
        let mut ws = InnerWorkspace::new(channel, cards);
        eval_candidate(&mut ws, &params, &vec![0.0; n], weights)
    };

    let results: Vec<(Candidate, TraceEntry)> = (0..budget.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut ws = InnerWorkspace::new(channel, cards);
            let mut rng = substream(budget.seed, StreamKind::Restart, restart as u64);
            let (logits, _) = ascent(&mut rng, n, budget, |l| ws.score(l, weights));
            let cand = eval_candidate(&mut ws, &params, &logits, weights);
            let trace = TraceEntry { restart, objective: cand.objective };
            (cand, trace)
        })
        .collect();

    let mut best = baseline;
    let mut search_trace = Vec::with_capacity(results.len());
    for (cand, trace) in results {
        search_trace.push(trace);
        if better(&cand, &best) {
            best = cand;
        }
    }

    let outer = maximize_outer_nofb(channel, budget)?;
    let containment_ok = check_containment(&best.point, &outer);
    Ok(RateRegionReport {
        weights,
        objective: best.objective,
        best_point: best.point,
        best_rates: best.rates,
        best_scheme: best.scheme,
        outer,
        containment_ok,
        search_trace,
    })
}

/// Search-loop evaluator for the outer bound: accumulates the dozen small
/// joint tables the four conditional informations need, in one pass over the
/// channel cells. Must agree with [`eval_outer_nofb`]; a regression test
/// enforces that.
struct FastOuter {
    cs: usize,
    cx: usize,
    cy1: usize,
    cy2: usize,
    cz: usize,
    p_s: Vec<f64>,
    trans: Vec<f64>,
    xsz: Vec<f64>,
    xsy1: Vec<f64>,
    xsy2: Vec<f64>,
    y1z: Vec<f64>,
    y2z: Vec<f64>,
    y1y2: Vec<f64>,
    xsy1z: Vec<f64>,
    xsy2z: Vec<f64>,
    xsy1y2: Vec<f64>,
    y1: Vec<f64>,
    y2: Vec<f64>,
    z: Vec<f64>,
}

impl FastOuter {
    fn new(channel: &BroadcastChannel) -> Self {
        let (cs, cx) = (channel.card(S), channel.card(X));
        let cy1 = channel.card(crate::channel::Y1);
        let cy2 = channel.card(crate::channel::Y2);
        let cz = channel.card(crate::channel::Z);
        let t = channel.transition();
        let width = cy1 * cy2 * cz;
        let mut trans = vec![0.0f64; cx * cs * width];
        for g in 0..cx * cs {
            trans[g * width..(g + 1) * width].copy_from_slice(t.row(g));
        }
        Self {
            cs,
            cx,
            cy1,
            cy2,
            cz,
            p_s: channel.state_pmf().mass().to_vec(),
            trans,
            xsz: vec![0.0; cx * cs * cz],
            xsy1: vec![0.0; cx * cs * cy1],
            xsy2: vec![0.0; cx * cs * cy2],
            y1z: vec![0.0; cy1 * cz],
            y2z: vec![0.0; cy2 * cz],
            y1y2: vec![0.0; cy1 * cy2],
            xsy1z: vec![0.0; cx * cs * cy1 * cz],
            xsy2z: vec![0.0; cx * cs * cy2 * cz],
            xsy1y2: vec![0.0; cx * cs * cy1 * cy2],
            y1: vec![0.0; cy1],
            y2: vec![0.0; cy2],
            z: vec![0.0; cz],
        }
    }

    fn eval(&mut self, x_rows: &[f64]) -> [f64; 3] {
        for v in [
            &mut self.xsz, &mut self.xsy1, &mut self.xsy2, &mut self.y1z, &mut self.y2z,
            &mut self.y1y2, &mut self.xsy1z, &mut self.xsy2z, &mut self.xsy1y2, &mut self.y1,
            &mut self.y2, &mut self.z,
        ] {
            v.fill(0.0);
        }
        let (cs, cx, cy1, cy2, cz) = (self.cs, self.cx, self.cy1, self.cy2, self.cz);
        let width = cy1 * cy2 * cz;
        for s in 0..cs {
            for x in 0..cx {
                let p_sx = self.p_s[s] * x_rows[s * cx + x];
                if p_sx == 0.0 {
                    continue;
                }
                let g = x * cs + s;
                let xs = g; // (x,s)-major index for the xs* tables
                let row = &self.trans[g * width..(g + 1) * width];
                for y1 in 0..cy1 {
                    for y2 in 0..cy2 {
                        for z in 0..cz {
                            let v = p_sx * row[(y1 * cy2 + y2) * cz + z];
                            if v == 0.0 {
                                continue;
                            }
                            self.xsz[xs * cz + z] += v;
                            self.xsy1[xs * cy1 + y1] += v;
                            self.xsy2[xs * cy2 + y2] += v;
                            self.y1z[y1 * cz + z] += v;
                            self.y2z[y2 * cz + z] += v;
                            self.y1y2[y1 * cy2 + y2] += v;
                            self.xsy1z[(xs * cy1 + y1) * cz + z] += v;
                            self.xsy2z[(xs * cy2 + y2) * cz + z] += v;
                            self.xsy1y2[(xs * cy1 + y1) * cy2 + y2] += v;
                            self.y1[y1] += v;
                            self.y2[y2] += v;
                            self.z[z] += v;
                        }
                    }
                }
            }
        }
        use crate::prob::entropy_of_table as ent;
        let i_y1_z = ent(&self.xsz) + ent(&self.y1z) - ent(&self.xsy1z) - ent(&self.z);
        let i_y2_z = ent(&self.xsz) + ent(&self.y2z) - ent(&self.xsy2z) - ent(&self.z);
        let i_y1_y2 = ent(&self.xsy2) + ent(&self.y1y2) - ent(&self.xsy1y2) - ent(&self.y2);
        let i_y2_y1 = ent(&self.xsy1) + ent(&self.y1y2) - ent(&self.xsy1y2) - ent(&self.y1);
        [
            i_y1_z.min(i_y2_z),
            i_y1_y2.min(i_y1_z),
            i_y2_y1.min(i_y2_z),
        ]
    }
}

/// Coordinatewise maximum of the outer bound over searched input kernels
/// p(X|S). The three maxima may come from different kernels; the box is a
/// valid superset either way. A coarse grid pass (binary channels) seeds
/// the coordinate ascent.
pub fn maximize_outer_nofb(channel: &BroadcastChannel, budget: &SearchBudget) -> Result<OuterBox> {
    if budget.restarts == 0 || budget.iters == 0 {
        return Err(Error::ZeroBudget);
    }
    let cs = channel.card(S);
    let cx = channel.card(X);
    let n = cs * cx;
    let mut best = [0.0f64; 3];
    let fold = |best: &mut [f64; 3], coords: [f64; 3]| {
        for (b, c) in best.iter_mut().zip(coords.iter()) {
            if c > b {
                *b = *c;
            }
        }
    };

    // Uniform input.
    let mut ev = FastOuter::new(channel);
    let coords = ev.eval(&vec![1.0 / cx as f64; n]);
    fold(&mut best, coords);

    // Exhaustive coarse grid when the kernel has at most two free
    // parameters; this pins the box for binary channels.
    if cs * (cx - 1) <= 2 && cx == 2 {
        let steps = 50usize;
        if cs == 1 {
            for i in 0..=steps {
                let p = i as f64 / steps as f64;
                let coords = ev.eval(&[1.0 - p, p]);
                fold(&mut best, coords);
            }
        } else {
            for i in 0..=steps {
                for j in 0..=steps {
                    let p = i as f64 / steps as f64;
                    let q = j as f64 / steps as f64;
                    let coords = ev.eval(&[1.0 - p, p, 1.0 - q, q]);
                    fold(&mut best, coords);
                }
            }
        }
    }

    // Coordinate ascent per outer coordinate; every evaluation feeds the box.
    let restarts = (budget.restarts / 3).max(1);
    let results: Vec<[f64; 3]> = (0..3usize * restarts)
        .into_par_iter()
        .map(|idx| {
            let coord = idx / restarts;
            let restart = idx % restarts;
            let mut rng = substream(
                budget.seed,
                StreamKind::Restart,
                0x0FEE_0000_0000_0000 + (coord as u64) * 1_000_003 + restart as u64,
            );
            let mut ev = FastOuter::new(channel);
            let mut probs = vec![0.0f64; n];
            let mut local = [0.0f64; 3];
            ascent(&mut rng, n, budget, |l| {
                softmax_rows_into(l, cs, cx, &mut probs);
                let coords = ev.eval(&probs);
                for (b, c) in local.iter_mut().zip(coords.iter()) {
                    if c > b {
                        *b = *c;
                    }
                }
                coords[coord]
            });
            local
        })
        .collect();
    for coords in results {
        fold(&mut best, coords);
    }
    Ok(OuterBox { r0_max: best[0], r1_max: best[1], r2_max: best[2] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::build_joint_nofb;
    use crate::channel::fixtures::{bsc_wiretap, noiseless_binary};

    fn uniform_kernel(targets: Vec<Variable>, givens: Vec<Variable>) -> ConditionalPmf {
        let t: usize = targets.iter().map(|v| v.cardinality).product();
        let g: usize = givens.iter().map(|v| v.cardinality).product::<usize>().max(1);
        ConditionalPmf::new(targets, givens, vec![1.0 / t as f64; t * g]).unwrap()
    }

    fn scheme_u0_is_x(ch: &BroadcastChannel) -> AuxScheme {
        let cs = ch.card(S);
        let u0 = uniform_kernel(vec![Variable::new(U0, 2)], vec![Variable::new(S, cs)]);
        let u1 = uniform_kernel(
            vec![Variable::new(U1, 1)],
            vec![Variable::new(S, cs), Variable::new(U0, 2)],
        );
        let u2 = uniform_kernel(
            vec![Variable::new(U2, 1)],
            vec![Variable::new(S, cs), Variable::new(U0, 2)],
        );
        let x = ConditionalPmf::deterministic(
            vec![Variable::new(X, 2)],
            vec![
                Variable::new(S, cs),
                Variable::new(U0, 2),
                Variable::new(U1, 1),
                Variable::new(U2, 1),
            ],
            |g| g % 2,
        )
        .unwrap();
        AuxScheme::new(u0, u1, u2, x).unwrap()
    }

    #[test]
    fn inner_noiseless_common_key_is_one_bit() {
        let ch = noiseless_binary();
        let joint = build_joint_nofb(&ch, &scheme_u0_is_x(&ch)).unwrap();
        let p = eval_inner_nofb(&joint).unwrap();
        assert!((p.r0 - 1.0).abs() < 1e-12);
        assert!(p.r1.abs() < 1e-12);
        assert!(p.r2.abs() < 1e-12);
        assert!(p.feasible);
        for s in p.constraint_slacks {
            assert!(s >= FEASIBILITY_SLACK);
        }
    }

    #[test]
    fn inner_eavesdropper_sees_everything_gives_zero() {
        // Z = Y1 = Y2 = X.
        use crate::channel::fixtures::product_kernel;
        let state = JointPmf::new(vec![Variable::new(S, 1)], vec![1.0]).unwrap();
        let ident = |y: usize, x: usize, _s: usize| if y == x { 1.0 } else { 0.0 };
        let kernel = product_kernel(2, 1, (2, &ident), (2, &ident), (2, &ident)).unwrap();
        let ch = BroadcastChannel::new(state, kernel).unwrap();
        let joint = build_joint_nofb(&ch, &scheme_u0_is_x(&ch)).unwrap();
        let p = eval_inner_nofb(&joint).unwrap();
        for v in [
            p.r0,
            p.r1,
            p.r2,
            p.r0_plus_r1,
            p.r0_plus_r2,
            p.r0_plus_r1_plus_r2,
        ] {
            assert!(v.abs() < 1e-9, "expected 0, got {v}");
        }
    }

    #[test]
    fn outer_noiseless_binary() {
        let ch = noiseless_binary();
        let kernel = uniform_kernel(vec![Variable::new(X, 2)], vec![Variable::new(S, 1)]);
        let joint = ch.joint_with_input(&kernel).unwrap();
        let b = eval_outer_nofb(&joint).unwrap();
        assert!((b.r0_max - 1.0).abs() < 1e-12);
        assert!(b.r1_max.abs() < 1e-12);
        assert!(b.r2_max.abs() < 1e-12);
    }

    #[test]
    fn outer_everything_public_is_zero() {
        use crate::channel::fixtures::product_kernel;
        let state = JointPmf::new(vec![Variable::new(S, 1)], vec![1.0]).unwrap();
        let ident = |y: usize, x: usize, _s: usize| if y == x { 1.0 } else { 0.0 };
        let kernel = product_kernel(2, 1, (2, &ident), (2, &ident), (2, &ident)).unwrap();
        let ch = BroadcastChannel::new(state, kernel).unwrap();
        let input = uniform_kernel(vec![Variable::new(X, 2)], vec![Variable::new(S, 1)]);
        let joint = ch.joint_with_input(&input).unwrap();
        let b = eval_outer_nofb(&joint).unwrap();
        assert!(b.r0_max.abs() < 1e-12);
        assert!(b.r1_max.abs() < 1e-12);
        assert!(b.r2_max.abs() < 1e-12);
    }

    #[test]
    fn containment_trivial_cases() {
        let zero = InnerPointNofb {
            r0: 0.0,
            r1: 0.0,
            r2: 0.0,
            r0_plus_r1: 0.0,
            r0_plus_r2: 0.0,
            r0_plus_r1_plus_r2: 0.0,
            feasible: true,
            constraint_slacks: [0.0; 4],
        };
        let box0 = OuterBox { r0_max: 0.0, r1_max: 0.0, r2_max: 0.0 };
        let box1 = OuterBox { r0_max: 1.0, r1_max: 0.0, r2_max: 0.0 };
        assert!(check_containment(&zero, &box0));
        assert!(check_containment(&zero, &box1));
        let one = InnerPointNofb { r0: 1.0, ..zero.clone() };
        assert!(check_containment(&one, &box1));
        assert!(!check_containment(&one, &box0));
    }

    #[test]
    fn scalarize_respects_sum_caps() {
        let p = InnerPointNofb {
            r0: 1.0,
            r1: 1.0,
            r2: 1.0,
            r0_plus_r1: 1.2,
            r0_plus_r2: 1.2,
            r0_plus_r1_plus_r2: 1.5,
            feasible: true,
            constraint_slacks: [0.0; 4],
        };
        let (obj, rates) = scalarize_inner(&p, [1.0, 1.0, 1.0]);
        assert!((obj - 1.5).abs() < 1e-9, "sum cap binds, got {obj}");
        let (obj0, _) = scalarize_inner(&p, [1.0, 0.0, 0.0]);
        assert!((obj0 - 1.0).abs() < 1e-9);
        assert!(rates.iter().all(|&r| r >= -1e-12));
    }

    #[test]
    fn optimizer_finds_noiseless_common_bit() {
        let ch = noiseless_binary();
        let budget = SearchBudget { restarts: 24, iters: 400, ..Default::default() };
        let report =
            maximize_inner_nofb(&ch, (2, 1, 1), [1.0, 0.0, 0.0], &budget).unwrap();
        assert!(report.objective >= 1.0 - 1e-3, "objective {}", report.objective);
        assert!(report.containment_ok);
    }

    #[test]
    fn optimizer_gives_zero_when_everything_public() {
        use crate::channel::fixtures::product_kernel;
        let state = JointPmf::new(vec![Variable::new(S, 1)], vec![1.0]).unwrap();
        let ident = |y: usize, x: usize, _s: usize| if y == x { 1.0 } else { 0.0 };
        let kernel = product_kernel(2, 1, (2, &ident), (2, &ident), (2, &ident)).unwrap();
        let ch = BroadcastChannel::new(state, kernel).unwrap();
        let budget = SearchBudget { restarts: 8, iters: 100, ..Default::default() };
        let report = maximize_inner_nofb(&ch, (2, 2, 2), [1.0, 1.0, 1.0], &budget).unwrap();
        assert!(report.objective.abs() < 1e-6);
    }

    #[test]
    fn outer_optimizer_noiseless_binary_hits_one_bit() {
        let ch = noiseless_binary();
        let budget = SearchBudget { restarts: 6, iters: 200, ..Default::default() };
        let b = maximize_outer_nofb(&ch, &budget).unwrap();
        assert!((b.r0_max - 1.0).abs() < 1e-3, "r0_max {}", b.r0_max);
    }

    #[test]
    fn optimizer_matches_grid_oracle_on_bsc() {
        // |U0|=2, U1/U2 singletons, |S|=1: grid over (p(u0=1), p(x=1|u0=0),
        // p(x=1|u0=1)) with step 0.05 is an independent lower-bound oracle.
        let ch = bsc_wiretap(0.1, 0.3);
        let mut grid_best = 0.0f64;
        let steps = 20usize;
        for a in 0..=steps {
            for b in 0..=steps {
                for c in 0..=steps {
                    let pu = a as f64 / steps as f64;
                    let px0 = b as f64 / steps as f64;
                    let px1 = c as f64 / steps as f64;
                    let u0 = ConditionalPmf::new(
                        vec![Variable::new(U0, 2)],
                        vec![Variable::new(S, 1)],
                        vec![1.0 - pu, pu],
                    )
                    .unwrap();
                    let u1 = uniform_kernel(
                        vec![Variable::new(U1, 1)],
                        vec![Variable::new(S, 1), Variable::new(U0, 2)],
                    );
                    let u2 = uniform_kernel(
                        vec![Variable::new(U2, 1)],
                        vec![Variable::new(S, 1), Variable::new(U0, 2)],
                    );
                    let x = ConditionalPmf::new(
                        vec![Variable::new(X, 2)],
                        vec![
                            Variable::new(S, 1),
                            Variable::new(U0, 2),
                            Variable::new(U1, 1),
                            Variable::new(U2, 1),
                        ],
                        vec![1.0 - px0, px0, 1.0 - px1, px1],
                    )
                    .unwrap();
                    let scheme = AuxScheme::new(u0, u1, u2, x).unwrap();
                    let joint = build_joint_nofb(&ch, &scheme).unwrap();
                    let p = eval_inner_nofb(&joint).unwrap();
                    if p.feasible {
                        let (obj, _) = scalarize_inner(&p, [1.0, 0.0, 0.0]);
                        grid_best = grid_best.max(obj);
                    }
                }
            }
        }
        let budget = SearchBudget { restarts: 32, iters: 500, ..Default::default() };
        let report =
            maximize_inner_nofb(&ch, (2, 1, 1), [1.0, 0.0, 0.0], &budget).unwrap();
        assert!(
            report.objective >= grid_best - 1e-3,
            "optimizer {} vs grid {grid_best}",
            report.objective
        );
    }

    #[test]
    fn fast_inner_matches_general_evaluator() {
        use rand::Rng;
        let ch = crate::channel::fixtures::state_binary(0.1, 0.3, 0.4);
        let cards = (3, 2, 2);
        let params = SchemeParams::new(&ch, cards);
        let mut ws = InnerWorkspace::new(&ch, cards);
        let mut rng = substream(99, StreamKind::Fixture, 0);
        for _ in 0..25 {
            let logits: Vec<f64> = (0..params.len()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let fast = ws.point(&logits);
            let scheme = params.build(&logits);
            let joint = build_joint_nofb(&ch, &scheme).unwrap();
            let slow = eval_inner_nofb(&joint).unwrap();
            for (a, b) in [
                (fast.r0, slow.r0),
                (fast.r1, slow.r1),
                (fast.r2, slow.r2),
                (fast.r0_plus_r1, slow.r0_plus_r1),
                (fast.r0_plus_r2, slow.r0_plus_r2),
                (fast.r0_plus_r1_plus_r2, slow.r0_plus_r1_plus_r2),
            ] {
                assert!((a - b).abs() < 1e-11, "fast {a} vs general {b}");
            }
            for (a, b) in fast.constraint_slacks.iter().zip(slow.constraint_slacks.iter()) {
                assert!((a - b).abs() < 1e-11);
            }
            assert_eq!(fast.feasible, slow.feasible);
        }
    }

    #[test]
    fn fast_outer_matches_general_evaluator() {
        use rand::Rng;
        let ch = crate::channel::fixtures::state_binary(0.05, 0.25, 0.35);
        let mut ev = FastOuter::new(&ch);
        let mut rng = substream(7, StreamKind::Fixture, 1);
        for _ in 0..25 {
            let p: f64 = rng.gen();
            let q: f64 = rng.gen();
            let probs = [1.0 - p, p, 1.0 - q, q];
            let fast = ev.eval(&probs);
            let kernel = ConditionalPmf::new(
                vec![Variable::new(X, 2)],
                vec![Variable::new(S, 2)],
                probs.to_vec(),
            )
            .unwrap();
            let joint = ch.joint_with_input(&kernel).unwrap();
            let slow = eval_outer_nofb(&joint).unwrap();
            assert!((fast[0] - slow.r0_max).abs() < 1e-11);
            assert!((fast[1] - slow.r1_max).abs() < 1e-11);
            assert!((fast[2] - slow.r2_max).abs() < 1e-11);
        }
    }

    #[test]
    fn zero_budget_is_rejected() {
        let ch = noiseless_binary();
        let budget = SearchBudget { restarts: 0, ..Default::default() };
        assert!(matches!(
            maximize_inner_nofb(&ch, (2, 1, 1), [1.0, 0.0, 0.0], &budget),
            Err(Error::ZeroBudget)
        ));
        assert!(matches!(
            maximize_outer_nofb(&ch, &budget),
            Err(Error::ZeroBudget)
        ));
    }
}
