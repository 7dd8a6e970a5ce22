//! Exact probability distributions over named finite variables.
//!
//! Everything downstream — region bounds, constraint systems, leakage
//! measurements — reduces to entropies of marginals of a dense joint table,
//! so this module keeps the representation simple: an ordered list of named
//! variables and one `f64` per cell of the product alphabet, last variable
//! fastest. All logs are base 2 and all entropies are in bits, with the
//! conventions 0·log 0 = 0 and 0·log(0/0) = 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Input tables must sum to 1 within this tolerance; they are then rescaled
/// so the stored mass sums to 1 exactly.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Dense tables are capped at this many cells.
pub const CELL_CAP: usize = 10_000_000;

/// A named finite-alphabet variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub cardinality: usize,
}

impl Variable {
    pub fn new(name: impl Into<String>, cardinality: usize) -> Self {
        Self {
            name: name.into(),
            cardinality,
        }
    }
}

fn check_vars(vars: &[Variable]) -> Result<usize> {
    let mut size = 1usize;
    for (i, v) in vars.iter().enumerate() {
        if v.cardinality == 0 {
            return Err(Error::ZeroCardinality(v.name.clone()));
        }
        if vars[..i].iter().any(|u| u.name == v.name) {
            return Err(Error::DuplicateVariable(v.name.clone()));
        }
        size = size
            .checked_mul(v.cardinality)
            .ok_or(Error::CapExceeded { size: usize::MAX, cap: CELL_CAP })?;
    }
    if size > CELL_CAP {
        return Err(Error::CapExceeded { size, cap: CELL_CAP });
    }
    Ok(size)
}

/// One reason a table fails validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    NegativeMass { index: usize, value: f64 },
    MassSum { sum: f64 },
    ShapeMismatch { expected: usize, actual: usize },
    DuplicateVariable { name: String },
    ZeroCardinality { name: String },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NegativeMass { index, value } => {
                write!(f, "negative mass {value} at flat index {index}")
            }
            Violation::MassSum { sum } => write!(f, "mass sum {sum} != 1"),
            Violation::ShapeMismatch { expected, actual } => {
                write!(f, "table has {actual} entries, expected {expected}")
            }
            Violation::DuplicateVariable { name } => write!(f, "duplicate variable {name}"),
            Violation::ZeroCardinality { name } => write!(f, "zero cardinality for {name}"),
        }
    }
}

/// Diagnostic result of [`JointPmf::validate`]; empty means the table is a
/// well-formed probability distribution.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A joint probability mass function over an ordered list of named variables.
///
/// The table is dense and row-major with the last variable varying fastest.
/// Instances built through [`JointPmf::new`] always carry non-negative mass
/// summing to 1; the unchecked [`JointPmf::raw`] constructor exists so that
/// malformed tables can be fed to [`JointPmf::validate`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointPmf {
    vars: Vec<Variable>,
    mass: Vec<f64>,
}

impl JointPmf {
    /// Build and validate. The mass is rescaled by its sum so the stored
    /// table is normalized exactly.
    pub fn new(vars: Vec<Variable>, mut mass: Vec<f64>) -> Result<Self> {
        let size = check_vars(&vars)?;
        if mass.len() != size {
            return Err(Error::ShapeMismatch { expected: size, actual: mass.len() });
        }
        for (i, &m) in mass.iter().enumerate() {
            if m < 0.0 || !m.is_finite() {
                return Err(Error::NegativeMass { index: i, value: m });
            }
        }
        let sum: f64 = mass.iter().sum();
        if (sum - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::MassSum { sum, tolerance: MASS_TOLERANCE });
        }
        if sum != 1.0 {
            for m in &mut mass {
                *m /= sum;
            }
        }
        Ok(Self { vars, mass })
    }

    /// Build without any checks. Only meaningful together with
    /// [`JointPmf::validate`]; other operations assume a valid table.
    pub fn raw(vars: Vec<Variable>, mass: Vec<f64>) -> Self {
        Self { vars, mass }
    }

    /// Uniform distribution over the product alphabet.
    pub fn uniform(vars: Vec<Variable>) -> Result<Self> {
        let size = check_vars(&vars)?;
        let p = 1.0 / size as f64;
        Ok(Self { vars, mass: vec![p; size] })
    }

    /// Diagnostic check; never aborts, reports every violation it finds.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut size = 1usize;
        for (i, v) in self.vars.iter().enumerate() {
            if v.cardinality == 0 {
                violations.push(Violation::ZeroCardinality { name: v.name.clone() });
            }
            if self.vars[..i].iter().any(|u| u.name == v.name) {
                violations.push(Violation::DuplicateVariable { name: v.name.clone() });
            }
            size = size.saturating_mul(v.cardinality);
        }
        if self.mass.len() != size {
            violations.push(Violation::ShapeMismatch { expected: size, actual: self.mass.len() });
            return ValidationReport { violations };
        }
        for (i, &m) in self.mass.iter().enumerate() {
            if m < 0.0 || !m.is_finite() {
                violations.push(Violation::NegativeMass { index: i, value: m });
            }
        }
        let sum: f64 = self.mass.iter().sum();
        if (sum - 1.0).abs() > MASS_TOLERANCE {
            violations.push(Violation::MassSum { sum });
        }
        ValidationReport { violations }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Strides of each variable in the flat table (last variable has stride 1).
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.vars.len()];
        for i in (0..self.vars.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.vars[i + 1].cardinality;
        }
        strides
    }

    /// Flat index of an assignment given in variable order.
    pub fn flat_index(&self, assignment: &[usize]) -> usize {
        let strides = self.strides();
        assignment
            .iter()
            .zip(strides.iter())
            .map(|(a, s)| a * s)
            .sum()
    }

    fn positions_of(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(Error::DuplicateVariable(name.to_string()));
            }
            out.push(self.var_index(name)?);
        }
        Ok(out)
    }

    /// Sum the table down onto `keep` (order taken from `keep` itself).
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointPmf> {
        let positions = self.positions_of(keep)?;
        let strides = self.strides();
        let kept_vars: Vec<Variable> = positions.iter().map(|&p| self.vars[p].clone()).collect();
        let mut kept_strides = vec![1usize; kept_vars.len()];
        for i in (0..kept_vars.len().saturating_sub(1)).rev() {
            kept_strides[i] = kept_strides[i + 1] * kept_vars[i + 1].cardinality;
        }
        let out_size: usize = kept_vars.iter().map(|v| v.cardinality).product();
        let mut out = vec![0.0f64; out_size.max(1)];
        let maps: Vec<(usize, usize, usize)> = positions
            .iter()
            .zip(kept_strides.iter())
            .map(|(&p, &ks)| (strides[p], self.vars[p].cardinality, ks))
            .collect();
        for (flat, &m) in self.mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let mut idx = 0usize;
            for &(stride, card, ks) in &maps {
                idx += ((flat / stride) % card) * ks;
            }
            out[idx] += m;
        }
        Ok(JointPmf { vars: kept_vars, mass: out })
    }

    /// Conditional p(target | given). Conditioning cells with zero marginal
    /// mass are marked unconstrained and carry an all-zero row.
    pub fn condition(&self, target: &[&str], given: &[&str]) -> Result<ConditionalPmf> {
        if target.is_empty() {
            return Err(Error::EmptyVariableSet);
        }
        for t in target {
            if given.contains(t) {
                return Err(Error::OverlappingSets(t.to_string()));
            }
        }
        let t_pos = self.positions_of(target)?;
        let g_pos = self.positions_of(given)?;
        let strides = self.strides();

        let targets: Vec<Variable> = t_pos.iter().map(|&p| self.vars[p].clone()).collect();
        let givens: Vec<Variable> = g_pos.iter().map(|&p| self.vars[p].clone()).collect();
        let t_size: usize = targets.iter().map(|v| v.cardinality).product();
        let g_size: usize = givens.iter().map(|v| v.cardinality).product::<usize>().max(1);

        let sub_stride = |vars: &[Variable]| -> Vec<usize> {
            let mut s = vec![1usize; vars.len()];
            for i in (0..vars.len().saturating_sub(1)).rev() {
                s[i] = s[i + 1] * vars[i + 1].cardinality;
            }
            s
        };
        let t_strides = sub_stride(&targets);
        let g_strides = sub_stride(&givens);

        let mut joint = vec![0.0f64; g_size * t_size];
        let mut g_mass = vec![0.0f64; g_size];
        for (flat, &m) in self.mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let mut ti = 0usize;
            for (k, &p) in t_pos.iter().enumerate() {
                ti += ((flat / strides[p]) % self.vars[p].cardinality) * t_strides[k];
            }
            let mut gi = 0usize;
            for (k, &p) in g_pos.iter().enumerate() {
                gi += ((flat / strides[p]) % self.vars[p].cardinality) * g_strides[k];
            }
            joint[gi * t_size + ti] += m;
            g_mass[gi] += m;
        }
        let mut constrained = vec![true; g_size];
        for g in 0..g_size {
            if g_mass[g] > 0.0 {
                for t in 0..t_size {
                    joint[g * t_size + t] /= g_mass[g];
                }
            } else {
                constrained[g] = false;
                for t in 0..t_size {
                    joint[g * t_size + t] = 0.0;
                }
            }
        }
        Ok(ConditionalPmf { targets, givens, table: joint, constrained })
    }

    /// H(vars | given) in bits.
    pub fn entropy(&self, vars: &[&str], given: &[&str]) -> Result<f64> {
        if vars.is_empty() {
            return Err(Error::EmptyVariableSet);
        }
        for v in vars {
            if given.contains(v) {
                return Err(Error::OverlappingSets(v.to_string()));
            }
        }
        let mut all: Vec<&str> = vars.to_vec();
        all.extend_from_slice(given);
        let h_all = self.subset_entropy(&all)?;
        let h_given = if given.is_empty() { 0.0 } else { self.subset_entropy(given)? };
        Ok(h_all - h_given)
    }

    /// I(a ; b | given) in bits, computed as H(a,g) + H(b,g) - H(a,b,g) - H(g).
    pub fn mutual_information(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptyVariableSet);
        }
        for x in a {
            if b.contains(x) || given.contains(x) {
                return Err(Error::OverlappingSets(x.to_string()));
            }
        }
        for x in b {
            if given.contains(x) {
                return Err(Error::OverlappingSets(x.to_string()));
            }
        }
        let mut ag: Vec<&str> = a.to_vec();
        ag.extend_from_slice(given);
        let mut bg: Vec<&str> = b.to_vec();
        bg.extend_from_slice(given);
        let mut abg: Vec<&str> = a.to_vec();
        abg.extend_from_slice(b);
        abg.extend_from_slice(given);
        let h_g = if given.is_empty() { 0.0 } else { self.subset_entropy(given)? };
        Ok(self.subset_entropy(&ag)? + self.subset_entropy(&bg)? - self.subset_entropy(&abg)? - h_g)
    }

    /// Joint entropy of a subset of variables, in bits.
    pub fn subset_entropy(&self, names: &[&str]) -> Result<f64> {
        let positions = self.positions_of(names)?;
        let strides = self.strides();
        let size: usize = positions.iter().map(|&p| self.vars[p].cardinality).product();
        let mut acc = vec![0.0f64; size.max(1)];
        let mut sub_strides = vec![1usize; positions.len()];
        for i in (0..positions.len().saturating_sub(1)).rev() {
            sub_strides[i] = sub_strides[i + 1] * self.vars[positions[i + 1]].cardinality;
        }
        let maps: Vec<(usize, usize, usize)> = positions
            .iter()
            .zip(sub_strides.iter())
            .map(|(&p, &ss)| (strides[p], self.vars[p].cardinality, ss))
            .collect();
        for (flat, &m) in self.mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            let mut idx = 0usize;
            for &(stride, card, ss) in &maps {
                idx += ((flat / stride) % card) * ss;
            }
            acc[idx] += m;
        }
        Ok(entropy_of_table(&acc))
    }
}

/// Walk every cell of a mixed-radix space in flat order while maintaining
/// projected indices for several targets incrementally (no divisions in the
/// loop). `strides[t][v]` is the contribution of variable `v` to target
/// `t`'s index; the closure receives (flat, projected).
pub(crate) fn walk_projected(
    cards: &[usize],
    strides: &[Vec<usize>],
    mut f: impl FnMut(usize, &[usize]),
) {
    let k = cards.len();
    let total: usize = cards.iter().product();
    let targets = strides.len();
    if k == 0 {
        f(0, &vec![0; targets]);
        return;
    }
    // delta[t][v]: index change for target t when position v increments and
    // all positions after v roll over to zero.
    let mut deltas = vec![vec![0i64; k]; targets];
    for (t, st) in strides.iter().enumerate() {
        for v in 0..k {
            let mut d = st[v] as i64;
            for w in v + 1..k {
                d -= (cards[w] as i64 - 1) * st[w] as i64;
            }
            deltas[t][v] = d;
        }
    }
    let mut digits = vec![0usize; k];
    let mut idx = vec![0usize; targets];
    for flat in 0..total {
        f(flat, &idx);
        if flat + 1 == total {
            break;
        }
        let mut v = k - 1;
        loop {
            digits[v] += 1;
            if digits[v] < cards[v] {
                for t in 0..targets {
                    idx[t] = (idx[t] as i64 + deltas[t][v]) as usize;
                }
                break;
            }
            digits[v] = 0;
            v -= 1;
        }
    }
}

/// -sum p log2 p with 0 log 0 = 0.
pub fn entropy_of_table(table: &[f64]) -> f64 {
    let mut h = 0.0f64;
    for &p in table {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// A conditional distribution p(targets | givens).
///
/// The table is given-major: row `g` holds the target masses for the `g`-th
/// conditioning cell (both sides last-variable-fastest). Rows whose
/// conditioning cell had zero marginal mass are flagged unconstrained.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionalPmf {
    targets: Vec<Variable>,
    givens: Vec<Variable>,
    table: Vec<f64>,
    constrained: Vec<bool>,
}

impl ConditionalPmf {
    /// Build from a given-major table, checking every row sums to 1.
    pub fn new(targets: Vec<Variable>, givens: Vec<Variable>, table: Vec<f64>) -> Result<Self> {
        check_vars(&targets)?;
        check_vars(&givens)?;
        for t in &targets {
            if givens.iter().any(|g| g.name == t.name) {
                return Err(Error::OverlappingSets(t.name.clone()));
            }
        }
        let t_size: usize = targets.iter().map(|v| v.cardinality).product();
        let g_size: usize = givens.iter().map(|v| v.cardinality).product::<usize>().max(1);
        if table.len() != t_size * g_size {
            return Err(Error::ShapeMismatch { expected: t_size * g_size, actual: table.len() });
        }
        let mut table = table;
        for g in 0..g_size {
            let row = &mut table[g * t_size..(g + 1) * t_size];
            let mut sum = 0.0f64;
            for (i, &m) in row.iter().enumerate() {
                if m < 0.0 || !m.is_finite() {
                    return Err(Error::NegativeMass { index: g * t_size + i, value: m });
                }
                sum += m;
            }
            if (sum - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::RowSum { row: g, sum });
            }
            if sum != 1.0 {
                for m in row.iter_mut() {
                    *m /= sum;
                }
            }
        }
        Ok(Self { targets, givens, table, constrained: vec![true; g_size] })
    }

    /// Deterministic kernel: target row `t = map(g)` gets all the mass.
    pub fn deterministic(
        targets: Vec<Variable>,
        givens: Vec<Variable>,
        map: impl Fn(usize) -> usize,
    ) -> Result<Self> {
        let t_size: usize = targets.iter().map(|v| v.cardinality).product();
        let g_size: usize = givens.iter().map(|v| v.cardinality).product::<usize>().max(1);
        let mut table = vec![0.0f64; t_size * g_size];
        for g in 0..g_size {
            let t = map(g);
            if t >= t_size {
                return Err(Error::IndexOutOfRange { index: t, limit: t_size });
            }
            table[g * t_size + t] = 1.0;
        }
        Self::new(targets, givens, table)
    }

    pub fn targets(&self) -> &[Variable] {
        &self.targets
    }

    pub fn givens(&self) -> &[Variable] {
        &self.givens
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn target_size(&self) -> usize {
        self.targets.iter().map(|v| v.cardinality).product()
    }

    pub fn given_size(&self) -> usize {
        self.givens.iter().map(|v| v.cardinality).product::<usize>().max(1)
    }

    /// Whether the conditioning cell `g` carried positive marginal mass.
    pub fn is_constrained(&self, g: usize) -> bool {
        self.constrained[g]
    }

    /// Target row for conditioning cell `g`.
    pub fn row(&self, g: usize) -> &[f64] {
        let t = self.target_size();
        &self.table[g * t..(g + 1) * t]
    }

    pub fn prob(&self, t: usize, g: usize) -> f64 {
        self.table[g * self.target_size() + t]
    }

    /// Canonical little blob used for deterministic tie-breaking between
    /// schemes with exactly equal objective values.
    pub fn canonical_bytes(&self, out: &mut Vec<u8>) {
        for v in self.targets.iter().chain(self.givens.iter()) {
            out.extend_from_slice(v.name.as_bytes());
            out.extend_from_slice(&(v.cardinality as u64).to_le_bytes());
        }
        for &m in &self.table {
            out.extend_from_slice(&m.to_bits().to_le_bytes());
        }
    }
}

/// Product measure: root joint times a chain of conditionals.
///
/// Each factor may condition only on root variables and targets of earlier
/// factors. The result carries the root variables followed by each factor's
/// targets, in order.
pub fn compose(root: &JointPmf, factors: &[&ConditionalPmf]) -> Result<JointPmf> {
    let mut vars: Vec<Variable> = root.variables().to_vec();
    for f in factors {
        for g in f.givens() {
            match vars.iter().find(|v| v.name == g.name) {
                None => return Err(Error::DanglingGiven(g.name.clone())),
                Some(v) if v.cardinality != g.cardinality => {
                    return Err(Error::CardinalityMismatch {
                        name: g.name.clone(),
                        expected: g.cardinality,
                        actual: v.cardinality,
                    })
                }
                _ => {}
            }
        }
        for t in f.targets() {
            if vars.iter().any(|v| v.name == t.name) {
                return Err(Error::DuplicateVariable(t.name.clone()));
            }
            vars.push(t.clone());
        }
    }
    let size = check_vars(&vars)?;

    let pos_of = |name: &str| vars.iter().position(|v| v.name == name).unwrap();

    // Per-result-variable stride contributions for every projection target:
    // the root index, then each factor's target and given indices.
    let contributions = |side: &[Variable]| -> Vec<usize> {
        let mut sub = vec![1usize; side.len()];
        for i in (0..side.len().saturating_sub(1)).rev() {
            sub[i] = sub[i + 1] * side[i + 1].cardinality;
        }
        let mut c = vec![0usize; vars.len()];
        for (v, &ss) in side.iter().zip(sub.iter()) {
            c[pos_of(&v.name)] = ss;
        }
        c
    };

    let mut proj_strides = vec![contributions(root.variables())];
    for f in factors {
        proj_strides.push(contributions(f.targets()));
        proj_strides.push(contributions(f.givens()));
    }
    let cards: Vec<usize> = vars.iter().map(|v| v.cardinality).collect();
    let factor_widths: Vec<usize> = factors.iter().map(|f| f.target_size()).collect();

    let mut mass = vec![0.0f64; size];
    let root_mass = root.mass();
    walk_projected(&cards, &proj_strides, |flat, idx| {
        let mut m = root_mass[idx[0]];
        if m == 0.0 {
            return;
        }
        for (fi, f) in factors.iter().enumerate() {
            let t = idx[1 + 2 * fi];
            let g = idx[2 + 2 * fi];
            m *= f.table()[g * factor_widths[fi] + t];
            if m == 0.0 {
                return;
            }
        }
        mass[flat] = m;
    });
    // The product of normalized factors over a normalized root is normalized
    // up to rounding; renormalize to keep downstream sums exact.
    JointPmf::new(vars, mass)
}
