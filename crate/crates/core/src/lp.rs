//! Exact phase-1 simplex with Bland's rule.
//!
//! [`solve_standard`] decides `{x ≥ 0 : A x = b}` and returns either a feasible
//! point or a Farkas vector `y` with `yᵀA ≤ 0` and `yᵀb > 0`. [`LinearSystem`]
//! layers free variables and `≥` rows on top of it.

use serde::{Deserialize, Serialize};

use crate::linalg::dot;
use crate::rational::Rat;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StandardOutcome {
    Feasible(Vec<Rat>),
    /// `y` with `yᵀA ≤ 0` componentwise and `yᵀb > 0`.
    Infeasible(Vec<Rat>),
}

/// Feasibility of `A x = b, x ≥ 0` (dense `A`, one row per entry of `b`).
pub fn solve_standard(a: &[Vec<Rat>], b: &[Rat], n: usize) -> StandardOutcome {
    let rows = a.len();
    let width = n + rows + 1;
    let rhs = width - 1;
    let mut signs = Vec::with_capacity(rows);
    let mut t: Vec<Vec<Rat>> = Vec::with_capacity(rows);
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        let flip = bi.is_negative();
        signs.push(flip);
        let mut r = Vec::with_capacity(width);
        r.extend(row.iter().map(|v| if flip { -v } else { v.clone() }));
        r.resize(width, Rat::zero());
        r[n + i] = Rat::one();
        r[rhs] = if flip { -bi } else { bi.clone() };
        t.push(r);
    }
    // Reduced costs of the phase-1 objective Σ artificials; obj[rhs] holds minus its value.
    let mut obj = vec![Rat::zero(); width];
    for r in &t {
        for j in 0..n {
            if !r[j].is_zero() {
                obj[j] -= &r[j];
            }
        }
        obj[rhs] -= &r[rhs];
    }
    let mut basis: Vec<usize> = (n..n + rows).collect();

    loop {
        let Some(e) = (0..rhs).find(|&j| obj[j].is_negative()) else { break };
        let mut leave: Option<(usize, Rat)> = None;
        for (i, r) in t.iter().enumerate() {
            if !r[e].is_positive() {
                continue;
            }
            let ratio = &r[rhs] / &r[e];
            leave = match leave {
                None => Some((i, ratio)),
                Some((li, lr)) => {
                    if ratio < lr || (ratio == lr && basis[i] < basis[li]) {
                        Some((i, ratio))
                    } else {
                        Some((li, lr))
                    }
                }
            };
        }
        let (l, _) = leave.expect("phase-1 objective is bounded below");
        pivot(&mut t, &mut obj, l, e);
        basis[l] = e;
    }

    if obj[rhs].is_zero() {
        let mut x = vec![Rat::zero(); n];
        for (i, &bv) in basis.iter().enumerate() {
            if bv < n {
                x[bv] = t[i][rhs].clone();
            }
        }
        StandardOutcome::Feasible(x)
    } else {
        let y = (0..rows)
            .map(|i| {
                let yi = Rat::one() - &obj[n + i];
                if signs[i] { -yi } else { yi }
            })
            .collect();
        StandardOutcome::Infeasible(y)
    }
}

fn pivot(t: &mut [Vec<Rat>], obj: &mut [Rat], l: usize, e: usize) {
    let inv = t[l][e].recip();
    let support: Vec<usize> = (0..t[l].len()).filter(|&k| !t[l][k].is_zero()).collect();
    for &k in &support {
        t[l][k] *= &inv;
    }
    let prow = t[l].clone();
    let eliminate = |row: &mut [Rat]| {
        if row[e].is_zero() {
            return;
        }
        let f = row[e].clone();
        for &k in &support {
            let delta = &f * &prow[k];
            row[k] -= &delta;
        }
    };
    for (i, row) in t.iter_mut().enumerate() {
        if i != l {
            eliminate(row);
        }
    }
    eliminate(obj);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    /// `coeffs · x + constant = 0`
    Eq,
    /// `coeffs · x + constant ≥ 0`
    Geq,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Row {
    pub coeffs: Vec<Rat>,
    pub constant: Rat,
    pub kind: RowKind,
}

impl Row {
    pub fn eval(&self, x: &[Rat]) -> Rat {
        dot(&self.coeffs, x) + &self.constant
    }

    pub fn holds(&self, x: &[Rat]) -> bool {
        let v = self.eval(x);
        match self.kind {
            RowKind::Eq => v.is_zero(),
            RowKind::Geq => !v.is_negative(),
        }
    }
}

/// Affine system over `num_vars` variables; variables flagged in `nonneg` are
/// additionally constrained to be `≥ 0`, the rest are free.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSystem {
    pub num_vars: usize,
    pub nonneg: Vec<bool>,
    pub rows: Vec<Row>,
}

/// Row multipliers `y` (with `y_i ≥ 0` on `≥` rows) whose combination has zero
/// coefficients on free variables, nonpositive coefficients on nonnegative
/// variables, and a negative constant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfeasibilityCertificate {
    pub multipliers: Vec<Rat>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Feasible(Vec<Rat>),
    Infeasible(InfeasibilityCertificate),
}

impl LinearSystem {
    pub fn free(num_vars: usize) -> Self {
        LinearSystem { num_vars, nonneg: vec![false; num_vars], rows: Vec::new() }
    }

    pub fn push(&mut self, coeffs: Vec<Rat>, constant: Rat, kind: RowKind) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.rows.push(Row { coeffs, constant, kind });
    }

    pub fn is_satisfied_by(&self, x: &[Rat]) -> bool {
        x.len() == self.num_vars
            && self.nonneg.iter().zip(x).all(|(&nn, v)| !nn || !v.is_negative())
            && self.rows.iter().all(|r| r.holds(x))
    }

    /// Checks a certificate exactly.
    pub fn certifies_infeasible(&self, cert: &InfeasibilityCertificate) -> bool {
        let y = &cert.multipliers;
        if y.len() != self.rows.len() {
            return false;
        }
        for (r, yi) in self.rows.iter().zip(y) {
            if r.kind == RowKind::Geq && yi.is_negative() {
                return false;
            }
        }
        for j in 0..self.num_vars {
            let c: Rat = self.rows.iter().zip(y).map(|(r, yi)| yi * &r.coeffs[j]).sum();
            if self.nonneg[j] { if c.is_positive() { return false; } } else if !c.is_zero() { return false; }
        }
        let constant: Rat = self.rows.iter().zip(y).map(|(r, yi)| yi * &r.constant).sum();
        constant.is_negative()
    }

    pub fn solve(&self) -> LpOutcome {
        // Columns: x⁺ for every variable, x⁻ for free variables, one slack per ≥ row.
        let free: Vec<usize> = (0..self.num_vars).filter(|&j| !self.nonneg[j]).collect();
        let geq: Vec<usize> = (0..self.rows.len()).filter(|&i| self.rows[i].kind == RowKind::Geq).collect();
        let n = self.num_vars + free.len() + geq.len();
        let mut a = Vec::with_capacity(self.rows.len());
        let mut b = Vec::with_capacity(self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            let mut row = Vec::with_capacity(n);
            row.extend(r.coeffs.iter().cloned());
            row.extend(free.iter().map(|&j| -&r.coeffs[j]));
            row.extend(geq.iter().map(|&g| if g == i { -Rat::one() } else { Rat::zero() }));
            a.push(row);
            b.push(-&r.constant);
        }
        match solve_standard(&a, &b, n) {
            StandardOutcome::Feasible(z) => {
                let mut x: Vec<Rat> = z[..self.num_vars].to_vec();
                for (k, &j) in free.iter().enumerate() {
                    x[j] -= &z[self.num_vars + k];
                }
                LpOutcome::Feasible(x)
            }
            StandardOutcome::Infeasible(y) => LpOutcome::Infeasible(InfeasibilityCertificate { multipliers: y }),
        }
    }
}
