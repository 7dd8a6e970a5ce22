//! JSON file schemas for channels and schemes, and their conversion to core
//! types. Files are human-diffable and versioned; rows must be normalized
//! within 1e-9 and are renormalized exactly on load.

use keyrate_core::channel::{S, U0, U1, U2, V1, V2, X, Y1, Y2, Z};
use keyrate_core::{AuxScheme, BroadcastChannel, ConditionalPmf, FeedbackScheme, JointPmf, Variable};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
const ROW_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Alphabets {
    pub s: usize,
    pub x: usize,
    pub y1: usize,
    pub y2: usize,
    pub z: usize,
}

/// Channel description: state distribution and transition tensor indexed
/// `[x][s][y1][y2][z]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub schema_version: u32,
    pub alphabets: Alphabets,
    pub state_pmf: Vec<f64>,
    pub transition: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
}

fn normalize_row(row: &mut [f64], what: &str) -> Result<(), CliError> {
    let mut sum = 0.0f64;
    for &v in row.iter() {
        if v < 0.0 || !v.is_finite() {
            return Err(CliError::validation(format!("{what}: negative or non-finite mass {v}")));
        }
        sum += v;
    }
    if (sum - 1.0).abs() > ROW_TOLERANCE {
        return Err(CliError::validation(format!("{what}: row sums to {sum}, expected 1")));
    }
    if sum != 1.0 {
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    Ok(())
}

impl ChannelFile {
    pub fn to_channel(&self) -> Result<BroadcastChannel, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::validation(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let a = &self.alphabets;
        if self.state_pmf.len() != a.s {
            return Err(CliError::validation(format!(
                "state_pmf has {} entries, alphabet says {}",
                self.state_pmf.len(),
                a.s
            )));
        }
        let mut state = self.state_pmf.clone();
        normalize_row(&mut state, "state_pmf")?;
        let state_pmf = JointPmf::new(vec![Variable::new(S, a.s)], state)
            .map_err(CliError::from_core)?;

        if self.transition.len() != a.x {
            return Err(CliError::validation(format!(
                "transition has {} x-slices, alphabet says {}",
                self.transition.len(),
                a.x
            )));
        }
        let mut table = vec![0.0f64; a.x * a.s * a.y1 * a.y2 * a.z];
        for (x, xs) in self.transition.iter().enumerate() {
            if xs.len() != a.s {
                return Err(CliError::validation(format!(
                    "transition[{x}] has {} s-slices, alphabet says {}",
                    xs.len(),
                    a.s
                )));
            }
            for (s, ys) in xs.iter().enumerate() {
                let mut row = vec![0.0f64; a.y1 * a.y2 * a.z];
                if ys.len() != a.y1 {
                    return Err(CliError::validation(format!(
                        "transition[{x}][{s}] has {} y1-slices, alphabet says {}",
                        ys.len(),
                        a.y1
                    )));
                }
                for (y1, y2s) in ys.iter().enumerate() {
                    if y2s.len() != a.y2 {
                        return Err(CliError::validation(format!(
                            "transition[{x}][{s}][{y1}] has {} y2-slices, alphabet says {}",
                            y2s.len(),
                            a.y2
                        )));
                    }
                    for (y2, zs) in y2s.iter().enumerate() {
                        if zs.len() != a.z {
                            return Err(CliError::validation(format!(
                                "transition[{x}][{s}][{y1}][{y2}] has {} z entries, alphabet says {}",
                                zs.len(),
                                a.z
                            )));
                        }
                        for (z, &p) in zs.iter().enumerate() {
                            row[(y1 * a.y2 + y2) * a.z + z] = p;
                        }
                    }
                }
                normalize_row(&mut row, &format!("transition cell (x={x}, s={s})"))?;
                let g = x * a.s + s;
                let width = a.y1 * a.y2 * a.z;
                table[g * width..(g + 1) * width].copy_from_slice(&row);
            }
        }
        let transition = ConditionalPmf::new(
            vec![
                Variable::new(Y1, a.y1),
                Variable::new(Y2, a.y2),
                Variable::new(Z, a.z),
            ],
            vec![Variable::new(X, a.x), Variable::new(S, a.s)],
            table,
        )
        .map_err(CliError::from_core)?;
        BroadcastChannel::new(state_pmf, transition).map_err(CliError::from_core)
    }

    pub fn from_channel(ch: &BroadcastChannel) -> Self {
        let a = Alphabets {
            s: ch.card(S),
            x: ch.card(X),
            y1: ch.card(Y1),
            y2: ch.card(Y2),
            z: ch.card(Z),
        };
        let t = ch.transition();
        let mut transition = Vec::with_capacity(a.x);
        for x in 0..a.x {
            let mut xs = Vec::with_capacity(a.s);
            for s in 0..a.s {
                let row = t.row(x * a.s + s);
                let mut ys = Vec::with_capacity(a.y1);
                for y1 in 0..a.y1 {
                    let mut y2s = Vec::with_capacity(a.y2);
                    for y2 in 0..a.y2 {
                        let mut zs = Vec::with_capacity(a.z);
                        for z in 0..a.z {
                            zs.push(row[(y1 * a.y2 + y2) * a.z + z]);
                        }
                        y2s.push(zs);
                    }
                    ys.push(y2s);
                }
                xs.push(ys);
            }
            transition.push(xs);
        }
        Self {
            schema_version: SCHEMA_VERSION,
            alphabets: a,
            state_pmf: ch.state_pmf().mass().to_vec(),
            transition,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuxCardinalities {
    pub u0: usize,
    pub u1: usize,
    pub u2: usize,
}

/// No-feedback scheme: p(U0|S), p(U1|S,U0), p(U2|S,U0), p(X|S,U0,U1,U2).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuxSchemeFile {
    pub schema_version: u32,
    pub cardinalities: AuxCardinalities,
    /// [s][u0]
    pub u0_given_s: Vec<Vec<f64>>,
    /// [s][u0][u1]
    pub u1_given_u0_s: Vec<Vec<Vec<f64>>>,
    /// [s][u0][u2]
    pub u2_given_u0_s: Vec<Vec<Vec<f64>>>,
    /// [s][u0][u1][u2][x]
    pub x_given_all: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
}

fn flatten2(
    rows: &[Vec<f64>],
    outer: usize,
    width: usize,
    what: &str,
) -> Result<Vec<f64>, CliError> {
    if rows.len() != outer {
        return Err(CliError::validation(format!(
            "{what}: {} rows, expected {outer}",
            rows.len()
        )));
    }
    let mut flat = Vec::with_capacity(outer * width);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(CliError::validation(format!(
                "{what}[{i}]: {} entries, expected {width}",
                row.len()
            )));
        }
        let mut r = row.clone();
        normalize_row(&mut r, &format!("{what}[{i}]"))?;
        flat.extend_from_slice(&r);
    }
    Ok(flat)
}

impl AuxSchemeFile {
    pub fn to_scheme(&self, channel: &BroadcastChannel) -> Result<AuxScheme, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::validation(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        let cs = channel.card(S);
        let cx = channel.card(X);
        let (cu0, cu1, cu2) = (
            self.cardinalities.u0,
            self.cardinalities.u1,
            self.cardinalities.u2,
        );
        let u0 = flatten2(&self.u0_given_s, cs, cu0, "u0_given_s")?;
        let mut u1_rows = Vec::new();
        let mut u2_rows = Vec::new();
        if self.u1_given_u0_s.len() != cs || self.u2_given_u0_s.len() != cs {
            return Err(CliError::validation("u1/u2 kernels must have one slice per state".to_string()));
        }
        for s in 0..cs {
            if self.u1_given_u0_s[s].len() != cu0 || self.u2_given_u0_s[s].len() != cu0 {
                return Err(CliError::validation(format!(
                    "u1/u2 kernels at state {s} must have one row per u0 symbol"
                )));
            }
            for u0i in 0..cu0 {
                u1_rows.push(self.u1_given_u0_s[s][u0i].clone());
                u2_rows.push(self.u2_given_u0_s[s][u0i].clone());
            }
        }
        let u1 = flatten2(&u1_rows, cs * cu0, cu1, "u1_given_u0_s")?;
        let u2 = flatten2(&u2_rows, cs * cu0, cu2, "u2_given_u0_s")?;

        let mut x_rows = Vec::new();
        if self.x_given_all.len() != cs {
            return Err(CliError::validation("x_given_all must have one slice per state".to_string()));
        }
        for s in 0..cs {
            let s0 = &self.x_given_all[s];
            if s0.len() != cu0 {
                return Err(CliError::validation(format!(
                    "x_given_all[{s}] must have one slice per u0 symbol"
                )));
            }
            for u0i in 0..cu0 {
                let s1 = &s0[u0i];
                if s1.len() != cu1 {
                    return Err(CliError::validation(format!(
                        "x_given_all[{s}][{u0i}] must have one slice per u1 symbol"
                    )));
                }
                for u1i in 0..cu1 {
                    let s2 = &s1[u1i];
                    if s2.len() != cu2 {
                        return Err(CliError::validation(format!(
                            "x_given_all[{s}][{u0i}][{u1i}] must have one row per u2 symbol"
                        )));
                    }
                    for u2i in 0..cu2 {
                        x_rows.push(s2[u2i].clone());
                    }
                }
            }
        }
        let x = flatten2(&x_rows, cs * cu0 * cu1 * cu2, cx, "x_given_all")?;

        AuxScheme::new(
            ConditionalPmf::new(
                vec![Variable::new(U0, cu0)],
                vec![Variable::new(S, cs)],
                u0,
            )
            .map_err(CliError::from_core)?,
            ConditionalPmf::new(
                vec![Variable::new(U1, cu1)],
                vec![Variable::new(S, cs), Variable::new(U0, cu0)],
                u1,
            )
            .map_err(CliError::from_core)?,
            ConditionalPmf::new(
                vec![Variable::new(U2, cu2)],
                vec![Variable::new(S, cs), Variable::new(U0, cu0)],
                u2,
            )
            .map_err(CliError::from_core)?,
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
            .map_err(CliError::from_core)?,
        )
        .map_err(CliError::from_core)
    }

    pub fn from_scheme(scheme: &AuxScheme, channel: &BroadcastChannel) -> Self {
        let cs = channel.card(S);
        let (cu0, cu1, cu2) = (scheme.card_u0(), scheme.card_u1(), scheme.card_u2());
        let u0_given_s = (0..cs).map(|s| scheme.u0_given_s.row(s).to_vec()).collect();
        let nested2 = |k: &ConditionalPmf| -> Vec<Vec<Vec<f64>>> {
            (0..cs)
                .map(|s| {
                    (0..cu0)
                        .map(|u0i| k.row(s * cu0 + u0i).to_vec())
                        .collect()
                })
                .collect()
        };
        let x_given_all = (0..cs)
            .map(|s| {
                (0..cu0)
                    .map(|u0i| {
                        (0..cu1)
                            .map(|u1i| {
                                (0..cu2)
                                    .map(|u2i| {
                                        scheme
                                            .x_given_all
                                            .row(((s * cu0 + u0i) * cu1 + u1i) * cu2 + u2i)
                                            .to_vec()
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            cardinalities: AuxCardinalities { u0: cu0, u1: cu1, u2: cu2 },
            u0_given_s,
            u1_given_u0_s: nested2(&scheme.u1_given_u0_s),
            u2_given_u0_s: nested2(&scheme.u2_given_u0_s),
            x_given_all,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FbCardinalities {
    pub v1: usize,
    pub v2: usize,
}

/// Feedback scheme: p(X|S), p(V1|Y1), p(V2|Y2).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FbSchemeFile {
    pub schema_version: u32,
    pub cardinalities: FbCardinalities,
    /// [s][x]
    pub x_given_s: Vec<Vec<f64>>,
    /// [y1][v1]
    pub v1_given_y1: Vec<Vec<f64>>,
    /// [y2][v2]
    pub v2_given_y2: Vec<Vec<f64>>,
}

impl FbSchemeFile {
    pub fn to_scheme(&self, channel: &BroadcastChannel) -> Result<FeedbackScheme, CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::validation(format!(
                "unsupported schema_version {}",
                self.schema_version
            )));
        }
        let (cs, cx) = (channel.card(S), channel.card(X));
        let (cy1, cy2) = (channel.card(Y1), channel.card(Y2));
        let (cv1, cv2) = (self.cardinalities.v1, self.cardinalities.v2);
        let x = flatten2(&self.x_given_s, cs, cx, "x_given_s")?;
        let v1 = flatten2(&self.v1_given_y1, cy1, cv1, "v1_given_y1")?;
        let v2 = flatten2(&self.v2_given_y2, cy2, cv2, "v2_given_y2")?;
        FeedbackScheme::new(
            ConditionalPmf::new(
                vec![Variable::new(X, cx)],
                vec![Variable::new(S, cs)],
                x,
            )
            .map_err(CliError::from_core)?,
            ConditionalPmf::new(
                vec![Variable::new(V1, cv1)],
                vec![Variable::new(Y1, cy1)],
                v1,
            )
            .map_err(CliError::from_core)?,
            ConditionalPmf::new(
                vec![Variable::new(V2, cv2)],
                vec![Variable::new(Y2, cy2)],
                v2,
            )
            .map_err(CliError::from_core)?,
        )
        .map_err(CliError::from_core)
    }
}

/// p(X|S) on its own, accepted by `region outer-nofb --input`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputKernelFile {
    pub schema_version: u32,
    /// [s][x]
    pub x_given_s: Vec<Vec<f64>>,
}

impl InputKernelFile {
    pub fn to_kernel(&self, channel: &BroadcastChannel) -> Result<ConditionalPmf, CliError> {
        let (cs, cx) = (channel.card(S), channel.card(X));
        let x = flatten2(&self.x_given_s, cs, cx, "x_given_s")?;
        ConditionalPmf::new(
            vec![Variable::new(X, cx)],
            vec![Variable::new(S, cs)],
            x,
        )
        .map_err(CliError::from_core)
    }
}
