//! Test-side oracle: a straight-line recomputation of entropies and mutual
//! informations over assignment dictionaries, independent of the library's
//! stride machinery, plus seeded random instance generators.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use keyrate_core::channel::{S, U0, U1, U2, V1, V2, X, Y1, Y2, Z};
use keyrate_core::prob::Variable;
use keyrate_core::{
    AuxScheme, BroadcastChannel, ConditionalPmf, FeedbackScheme, JointPmf,
};

/// Assignment-keyed copy of a joint distribution.
pub struct OracleDist {
    pub names: Vec<String>,
    pub probs: HashMap<Vec<usize>, f64>,
}

impl OracleDist {
    pub fn from_joint(joint: &JointPmf) -> Self {
        let names: Vec<String> = joint.variables().iter().map(|v| v.name.clone()).collect();
        let cards: Vec<usize> = joint.variables().iter().map(|v| v.cardinality).collect();
        let mut probs = HashMap::new();
        let mut assignment = vec![0usize; cards.len()];
        for &m in joint.mass() {
            if m > 0.0 {
                *probs.entry(assignment.clone()).or_insert(0.0) += m;
            }
            // advance odometer, last variable fastest
            for i in (0..cards.len()).rev() {
                assignment[i] += 1;
                if assignment[i] < cards[i] {
                    break;
                }
                assignment[i] = 0;
            }
        }
        Self { names, probs }
    }

    fn project(&self, vars: &[&str]) -> HashMap<Vec<usize>, f64> {
        let idx: Vec<usize> = vars
            .iter()
            .map(|v| self.names.iter().position(|n| n == v).expect("unknown oracle variable"))
            .collect();
        let mut out: HashMap<Vec<usize>, f64> = HashMap::new();
        for (a, &p) in &self.probs {
            let key: Vec<usize> = idx.iter().map(|&i| a[i]).collect();
            *out.entry(key).or_insert(0.0) += p;
        }
        out
    }

    pub fn entropy(&self, vars: &[&str]) -> f64 {
        let table = self.project(vars);
        let mut h = 0.0;
        for &p in table.values() {
            if p > 0.0 {
                h -= p * p.log2();
            }
        }
        h
    }

    /// I(a ; b | c) by direct summation of
    /// p(abc) log2( p(abc) p(c) / (p(ac) p(bc)) ).
    pub fn mi(&self, a: &[&str], b: &[&str], c: &[&str]) -> f64 {
        let mut abc: Vec<&str> = a.to_vec();
        abc.extend_from_slice(b);
        abc.extend_from_slice(c);
        let p_abc = self.project(&abc);
        let mut ac: Vec<&str> = a.to_vec();
        ac.extend_from_slice(c);
        let p_ac = self.project(&ac);
        let mut bc: Vec<&str> = b.to_vec();
        bc.extend_from_slice(c);
        let p_bc = self.project(&bc);
        let p_c = self.project(c);

        let na = a.len();
        let nb = b.len();
        let mut total = 0.0;
        for (key, &p) in &p_abc {
            if p <= 0.0 {
                continue;
            }
            let ka: Vec<usize> = key[..na].to_vec();
            let kb: Vec<usize> = key[na..na + nb].to_vec();
            let kc: Vec<usize> = key[na + nb..].to_vec();
            let mut kac = ka.clone();
            kac.extend_from_slice(&kc);
            let mut kbc = kb.clone();
            kbc.extend_from_slice(&kc);
            let pc = if c.is_empty() { 1.0 } else { p_c[&kc] };
            total += p * ((p * pc) / (p_ac[&kac] * p_bc[&kbc])).log2();
        }
        total
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random dense pmf over the given variables (exponential weights).
pub fn random_pmf(rng: &mut ChaCha8Rng, vars: Vec<Variable>) -> JointPmf {
    let size: usize = vars.iter().map(|v| v.cardinality).product();
    let mut mass: Vec<f64> = (0..size).map(|_| -(rng.gen::<f64>().ln())).collect();
    let sum: f64 = mass.iter().sum();
    for m in &mut mass {
        *m /= sum;
    }
    JointPmf::new(vars, mass).unwrap()
}

pub fn random_rows(rng: &mut ChaCha8Rng, rows: usize, width: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows * width);
    for _ in 0..rows {
        let mut row: Vec<f64> = (0..width).map(|_| -(rng.gen::<f64>().ln())).collect();
        let sum: f64 = row.iter().sum();
        for v in &mut row {
            *v /= sum;
        }
        out.extend_from_slice(&row);
    }
    out
}

/// Random binary channel: |S|=2 with a random state distribution and a
/// random joint output kernel over (Y1,Y2,Z).
pub fn random_binary_channel(rng: &mut ChaCha8Rng) -> BroadcastChannel {
    let state = random_pmf(rng, vec![Variable::new(S, 2)]);
    let table = random_rows(rng, 4, 8);
    let transition = ConditionalPmf::new(
        vec![
            Variable::new(Y1, 2),
            Variable::new(Y2, 2),
            Variable::new(Z, 2),
        ],
        vec![Variable::new(X, 2), Variable::new(S, 2)],
        table,
    )
    .unwrap();
    BroadcastChannel::new(state, transition).unwrap()
}

/// Random binary channel whose outputs are conditionally independent given
/// (X,S): p(y1|x,s) p(y2|x,s) p(z|x,s).
pub fn random_product_channel(rng: &mut ChaCha8Rng) -> BroadcastChannel {
    let state = random_pmf(rng, vec![Variable::new(S, 2)]);
    let y1 = random_rows(rng, 4, 2);
    let y2 = random_rows(rng, 4, 2);
    let z = random_rows(rng, 4, 2);
    let mut table = vec![0.0f64; 4 * 8];
    for g in 0..4 {
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    table[g * 8 + (a * 2 + b) * 2 + c] =
                        y1[g * 2 + a] * y2[g * 2 + b] * z[g * 2 + c];
                }
            }
        }
    }
    let transition = ConditionalPmf::new(
        vec![
            Variable::new(Y1, 2),
            Variable::new(Y2, 2),
            Variable::new(Z, 2),
        ],
        vec![Variable::new(X, 2), Variable::new(S, 2)],
        table,
    )
    .unwrap();
    BroadcastChannel::new(state, transition).unwrap()
}

/// Channel with identical marginal kernels at the two legitimate receivers
/// (conditionally independent copies), as the merge reduction requires.
pub fn random_symmetric_channel(rng: &mut ChaCha8Rng) -> BroadcastChannel {
    let state = random_pmf(rng, vec![Variable::new(S, 2)]);
    let y = random_rows(rng, 4, 2);
    let z = random_rows(rng, 4, 2);
    let mut table = vec![0.0f64; 4 * 8];
    for g in 0..4 {
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    table[g * 8 + (a * 2 + b) * 2 + c] =
                        y[g * 2 + a] * y[g * 2 + b] * z[g * 2 + c];
                }
            }
        }
    }
    let transition = ConditionalPmf::new(
        vec![
            Variable::new(Y1, 2),
            Variable::new(Y2, 2),
            Variable::new(Z, 2),
        ],
        vec![Variable::new(X, 2), Variable::new(S, 2)],
        table,
    )
    .unwrap();
    BroadcastChannel::new(state, transition).unwrap()
}

/// Random auxiliary scheme with the given cardinalities.
pub fn random_aux_scheme(
    rng: &mut ChaCha8Rng,
    channel: &BroadcastChannel,
    cards: (usize, usize, usize),
) -> AuxScheme {
    let cs = channel.card(S);
    let cx = channel.card(X);
    let (cu0, cu1, cu2) = cards;
    AuxScheme::new(
        ConditionalPmf::new(
            vec![Variable::new(U0, cu0)],
            vec![Variable::new(S, cs)],
            random_rows(rng, cs, cu0),
        )
        .unwrap(),
        ConditionalPmf::new(
            vec![Variable::new(U1, cu1)],
            vec![Variable::new(S, cs), Variable::new(U0, cu0)],
            random_rows(rng, cs * cu0, cu1),
        )
        .unwrap(),
        ConditionalPmf::new(
            vec![Variable::new(U2, cu2)],
            vec![Variable::new(S, cs), Variable::new(U0, cu0)],
            random_rows(rng, cs * cu0, cu2),
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
            random_rows(rng, cs * cu0 * cu1 * cu2, cx),
        )
        .unwrap(),
    )
    .unwrap()
}

/// Random feedback scheme with the given quantizer cardinalities.
pub fn random_fb_scheme(
    rng: &mut ChaCha8Rng,
    channel: &BroadcastChannel,
    cards: (usize, usize),
) -> FeedbackScheme {
    let cs = channel.card(S);
    let cx = channel.card(X);
    let cy1 = channel.card(Y1);
    let cy2 = channel.card(Y2);
    let (cv1, cv2) = cards;
    FeedbackScheme::new(
        ConditionalPmf::new(
            vec![Variable::new(X, cx)],
            vec![Variable::new(S, cs)],
            random_rows(rng, cs, cx),
        )
        .unwrap(),
        ConditionalPmf::new(
            vec![Variable::new(V1, cv1)],
            vec![Variable::new(Y1, cy1)],
            random_rows(rng, cy1, cv1),
        )
        .unwrap(),
        ConditionalPmf::new(
            vec![Variable::new(V2, cv2)],
            vec![Variable::new(Y2, cy2)],
            random_rows(rng, cy2, cv2),
        )
        .unwrap(),
    )
    .unwrap()
}
