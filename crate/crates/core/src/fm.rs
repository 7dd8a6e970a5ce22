//! Exact rational linear inequality systems and Fourier-Motzkin projection.
//!
//! Systems are small (at most a handful of variables), so the engine favors
//! exactness and auditability: coefficients are arbitrary-precision
//! rationals, every inequality is kept in a normalized integer form, and
//! elimination is plain pairwise combination with duplicate and
//! dominated-row removal. Rows that reduce to `0 <= negative` are kept and
//! flagged rather than dropped.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Denominator used when freezing floating-point constants into rationals.
pub const RATIONAL_DENOMINATOR: i64 = 1_000_000_000_000;

/// Round a float to an exact rational with denominator 10^12.
pub fn rational_from_f64(x: f64) -> BigRational {
    let scaled = (x * RATIONAL_DENOMINATOR as f64).round();
    BigRational::new(
        BigInt::from(scaled as i128),
        BigInt::from(RATIONAL_DENOMINATOR),
    )
}

/// One inequality `coeffs . vars <= constant`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inequality {
    pub coeffs: Vec<BigRational>,
    pub constant: BigRational,
}

impl Inequality {
    pub fn new(coeffs: Vec<BigRational>, constant: BigRational) -> Self {
        Self { coeffs, constant }
    }

    pub fn from_i64(coeffs: &[i64], constant: BigRational) -> Self {
        Self {
            coeffs: coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect(),
            constant,
        }
    }

    fn is_zero_row(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Trivially true: no variables involved, non-negative constant.
    fn is_trivial(&self) -> bool {
        self.is_zero_row() && !self.constant.is_negative()
    }

    /// Contradiction: no variables involved, negative constant.
    pub fn is_contradiction(&self) -> bool {
        self.is_zero_row() && self.constant.is_negative()
    }

    /// Scale by the positive rational that makes every entry an integer with
    /// overall gcd 1. Keeps the inequality direction.
    fn normalize(&mut self) {
        let mut lcm = BigInt::one();
        for c in self.coeffs.iter().chain(std::iter::once(&self.constant)) {
            lcm = lcm.lcm(c.denom());
        }
        let mut ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .chain(std::iter::once(&self.constant))
            .map(|c| c.numer() * (&lcm / c.denom()))
            .collect();
        let mut gcd = BigInt::zero();
        for v in &ints {
            gcd = gcd.gcd(v);
        }
        if !gcd.is_zero() && !gcd.is_one() {
            for v in &mut ints {
                *v /= &gcd;
            }
        }
        let constant = ints.pop().unwrap();
        self.coeffs = ints.into_iter().map(BigRational::from_integer).collect();
        self.constant = BigRational::from_integer(constant);
    }

    fn dedup_key(&self) -> String {
        let mut key = String::new();
        for c in &self.coeffs {
            let _ = write!(key, "{c},");
        }
        let _ = write!(key, "|{}", self.constant);
        key
    }

    /// Evaluate `coeffs . point - constant` in f64.
    pub fn violation(&self, point: &[f64]) -> f64 {
        let lhs: f64 = self
            .coeffs
            .iter()
            .zip(point.iter())
            .map(|(c, &x)| rational_to_f64(c) * x)
            .sum();
        lhs - rational_to_f64(&self.constant)
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        return r.numer().to_string();
    }
    // Denominators dividing 10^18 print as exact decimals.
    let mut den = r.denom().clone();
    let mut twos = 0u32;
    let mut fives = 0u32;
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if den.is_one() && twos <= 18 && fives <= 18 {
        let digits = twos.max(fives);
        let scale = BigInt::from(10).pow(digits);
        let scaled = r.numer() * (&scale / r.denom());
        let neg = scaled.is_negative();
        let s = scaled.abs().to_string();
        let s = if s.len() <= digits as usize {
            format!("0.{}{}", "0".repeat(digits as usize - s.len()), s)
        } else {
            let (int, frac) = s.split_at(s.len() - digits as usize);
            format!("{int}.{frac}")
        };
        let s = s.trim_end_matches('0').trim_end_matches('.').to_string();
        let s = if s.is_empty() { "0".to_string() } else { s };
        if neg {
            format!("-{s}")
        } else {
            s
        }
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A system of linear inequalities over ordered named variables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearInequalitySystem {
    pub variables: Vec<String>,
    pub inequalities: Vec<Inequality>,
}

impl LinearInequalitySystem {
    pub fn new(variables: Vec<String>) -> Self {
        Self { variables, inequalities: Vec::new() }
    }

    pub fn push(&mut self, ineq: Inequality) {
        assert_eq!(ineq.coeffs.len(), self.variables.len());
        self.inequalities.push(ineq);
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// True when the system contains a row `0 <= negative`.
    pub fn is_infeasible(&self) -> bool {
        self.inequalities.iter().any(Inequality::is_contradiction)
    }

    /// Normalize rows, drop trivially-true ones, remove duplicates and rows
    /// dominated by another row with identical coefficients.
    pub fn simplify(&mut self) {
        let mut best: HashMap<String, usize> = HashMap::new();
        let mut kept: Vec<Inequality> = Vec::new();
        for mut ineq in self.inequalities.drain(..) {
            ineq.normalize();
            if ineq.is_trivial() {
                continue;
            }
            if ineq.is_contradiction() {
                // Canonical contradiction row; keep exactly one.
                if !kept.iter().any(Inequality::is_contradiction) {
                    kept.push(Inequality::from_i64(
                        &vec![0; self.variables.len()],
                        BigRational::from_integer((-1).into()),
                    ));
                }
                continue;
            }
            let coeff_key = {
                let mut k = String::new();
                for c in &ineq.coeffs {
                    let _ = write!(k, "{c},");
                }
                k
            };
            match best.get(&coeff_key) {
                Some(&idx) => {
                    if ineq.constant < kept[idx].constant {
                        kept[idx] = ineq;
                    }
                }
                None => {
                    best.insert(coeff_key, kept.len());
                    kept.push(ineq);
                }
            }
        }
        // Stable dedup on the full row (coeff map already unique, but keep
        // the invariant obvious).
        let mut seen = HashMap::new();
        self.inequalities = kept
            .into_iter()
            .filter(|i| seen.insert(i.dedup_key(), ()).is_none())
            .collect();
    }

    /// Check a point against every inequality with an f64 tolerance.
    pub fn contains(&self, point: &[f64], tol: f64) -> bool {
        self.inequalities.iter().all(|i| i.violation(point) <= tol)
    }

    /// Float projection of the rows, for membership testing on grids.
    pub fn to_f64_rows(&self) -> Vec<(Vec<f64>, f64)> {
        self.inequalities
            .iter()
            .map(|i| {
                (
                    i.coeffs.iter().map(rational_to_f64).collect(),
                    rational_to_f64(&i.constant),
                )
            })
            .collect()
    }

    /// Plain-text form, one inequality per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for ineq in &self.inequalities {
            let mut first = true;
            for (c, v) in ineq.coeffs.iter().zip(self.variables.iter()) {
                if first {
                    let _ = write!(out, "{}*{}", fmt_rational(c), v);
                    first = false;
                } else {
                    let _ = write!(out, " + {}*{}", fmt_rational(c), v);
                }
            }
            if first {
                let _ = write!(out, "0");
            }
            let _ = writeln!(out, " <= {}", fmt_rational(&ineq.constant));
        }
        out
    }
}

/// Exact Fourier-Motzkin projection eliminating `drop` (processed in system
/// order). Trivially-true rows and duplicates are removed; contradiction
/// rows are kept so infeasibility is never silently lost.
pub fn fm_eliminate(
    system: &LinearInequalitySystem,
    drop: &[&str],
) -> Result<LinearInequalitySystem> {
    let mut vars = system.variables.clone();
    let mut rows = system.inequalities.clone();
    for name in drop {
        let col = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))?;

        let mut pos: Vec<Inequality> = Vec::new();
        let mut neg: Vec<Inequality> = Vec::new();
        let mut zero: Vec<Inequality> = Vec::new();
        for row in rows.drain(..) {
            if row.coeffs[col].is_zero() {
                zero.push(row);
            } else if row.coeffs[col].is_positive() {
                pos.push(row);
            } else {
                neg.push(row);
            }
        }
        let mut next: Vec<Inequality> = Vec::new();
        for mut row in zero {
            row.coeffs.remove(col);
            next.push(row);
        }
        for p in &pos {
            for n in &neg {
                // Scale to cancel the eliminated column: p / p_c + n / |n_c|.
                let pc = p.coeffs[col].clone();
                let nc = -n.coeffs[col].clone();
                let mut coeffs = Vec::with_capacity(vars.len() - 1);
                for (k, (a, b)) in p.coeffs.iter().zip(n.coeffs.iter()).enumerate() {
                    if k == col {
                        continue;
                    }
                    coeffs.push(a / &pc + b / &nc);
                }
                let constant = &p.constant / &pc + &n.constant / &nc;
                next.push(Inequality::new(coeffs, constant));
            }
        }
        vars.remove(col);
        let mut sys = LinearInequalitySystem { variables: vars.clone(), inequalities: next };
        sys.simplify();
        rows = sys.inequalities;
    }
    let mut out = LinearInequalitySystem { variables: vars, inequalities: rows };
    out.simplify();
    Ok(out)
}
