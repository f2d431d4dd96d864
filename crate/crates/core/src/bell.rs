//! Bell inequalities: the CHSH family, evaluation, lifting to cones, and a
//! desk-scale check that a family characterizes noncontextuality.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::Outcome;
use crate::polytope::{enumerate_vertices, is_noncontextual, Caps, PolytopeError};
use crate::rational::Rat;
use crate::sampling::random_convex_combinations;
use crate::scenario::{coned_id, Scenario};
use crate::sdist::SDist;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum BellError {
    #[error("unknown simplex {0}")]
    UnknownSimplex(String),
    #[error("outcome {outcome:?} does not fit simplex {simplex}")]
    BadOutcome { simplex: String, outcome: Outcome },
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Term {
    pub simplex: String,
    pub outcome: Outcome,
    pub coef: Rat,
}

impl Term {
    pub fn new(simplex: &str, outcome: &[u32], coef: Rat) -> Self {
        Term { simplex: simplex.to_string(), outcome: Outcome(outcome.to_vec()), coef }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Le,
}

/// `Σ terms · p ≤ bound + Σ rhs_terms · p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearInequality {
    pub terms: Vec<Term>,
    pub rhs_terms: Vec<Term>,
    pub bound: Rat,
    pub sense: Sense,
}

fn canonical(terms: Vec<Term>) -> Vec<Term> {
    let mut merged: BTreeMap<(String, Outcome), Rat> = BTreeMap::new();
    for t in terms {
        *merged.entry((t.simplex, t.outcome)).or_default() += t.coef;
    }
    merged
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((simplex, outcome), coef)| Term { simplex, outcome, coef })
        .collect()
}

impl LinearInequality {
    /// Merges repeated coordinates, drops zero coefficients and sorts terms.
    pub fn new(terms: Vec<Term>, rhs_terms: Vec<Term>, bound: Rat) -> Self {
        LinearInequality { terms: canonical(terms), rhs_terms: canonical(rhs_terms), bound, sense: Sense::Le }
    }

    pub fn canonicalized(&self) -> Self {
        LinearInequality::new(self.terms.clone(), self.rhs_terms.clone(), self.bound.clone())
    }
}

/// The four CHSH chains as eight one-sided inequalities: for chain `k` (the one
/// with a minus sign on `s_{5-k}`), first `expr ≤ 2`, then `-expr ≤ 0`.
pub fn chsh_family() -> Vec<LinearInequality> {
    let mut out = Vec::with_capacity(8);
    for k in 1..=4 {
        let negated = 5 - k;
        let terms: Vec<Term> = (1..=4)
            .flat_map(|i| {
                let c = if i == negated { -Rat::one() } else { Rat::one() };
                let s = format!("s{i}");
                [Term::new(&s, &[0, 0], c.clone()), Term::new(&s, &[1, 1], c)]
            })
            .collect();
        let lower: Vec<Term> = terms.iter().map(|t| Term { coef: -&t.coef, ..t.clone() }).collect();
        out.push(LinearInequality::new(terms, vec![], Rat::from_int(2)));
        out.push(LinearInequality::new(lower, vec![], Rat::zero()));
    }
    out
}

/// Exact value of both sides.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    /// `Σ terms · p`.
    pub lhs: Rat,
    /// `bound + Σ rhs_terms · p`.
    pub rhs: Rat,
    pub satisfied: bool,
}

fn term_value(t: &Term, p: &SDist) -> Result<Rat, BellError> {
    let x = p.scenario();
    let k = x.lookup(&t.simplex).ok_or_else(|| BellError::UnknownSimplex(t.simplex.clone()))?;
    if t.outcome.len() != x.dim(k) + 1 || t.outcome.0.iter().any(|&a| a >= p.m()) {
        return Err(BellError::BadOutcome { simplex: t.simplex.clone(), outcome: t.outcome.clone() });
    }
    Ok(&t.coef * p.marginal(k).prob(&t.outcome))
}

pub fn evaluate(ineq: &LinearInequality, p: &SDist) -> Result<Evaluation, BellError> {
    let mut lhs = Rat::zero();
    for t in &ineq.terms {
        lhs += term_value(t, p)?;
    }
    let mut rhs = ineq.bound.clone();
    for t in &ineq.rhs_terms {
        rhs += term_value(t, p)?;
    }
    let satisfied = lhs <= rhs;
    Ok(Evaluation { lhs, rhs, satisfied })
}

pub fn satisfies_all(family: &[LinearInequality], p: &SDist) -> Result<bool, BellError> {
    for ineq in family {
        if !evaluate(ineq, p)?.satisfied {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Lifts each inequality to one inequality per `j ∈ Z_m` on the cone with apex `apex`:
/// `(x, y, B) ↦ ((c,x), (j,y), B)`, and the bound `R` becomes `R · Σ_y p_{(c,x_1)}(j, y)`
/// where `x_1` is the simplex of the first term.
pub fn lift_to_cone(family: &[LinearInequality], x: &Scenario, apex: &str, m: u32) -> Result<Vec<LinearInequality>, BellError> {
    let mut out = Vec::with_capacity(family.len() * m as usize);
    for ineq in family {
        for t in ineq.terms.iter().chain(&ineq.rhs_terms) {
            if x.lookup(&t.simplex).is_none() {
                return Err(BellError::UnknownSimplex(t.simplex.clone()));
            }
        }
        for j in 0..m {
            let lift = |t: &Term| {
                let mut o = vec![j];
                o.extend_from_slice(&t.outcome.0);
                Term { simplex: coned_id(apex, &t.simplex), outcome: Outcome(o), coef: t.coef.clone() }
            };
            let terms = ineq.terms.iter().map(lift).collect();
            let mut rhs_terms: Vec<Term> = ineq.rhs_terms.iter().map(lift).collect();
            if !ineq.bound.is_zero() {
                let first = ineq.terms.first().or(ineq.rhs_terms.first());
                if let Some(first) = first {
                    let k = x.lookup(&first.simplex).expect("checked above");
                    for y in Outcome::all(m, x.dim(k) + 1) {
                        let mut o = vec![j];
                        o.extend(y.0);
                        rhs_terms.push(Term {
                            simplex: coned_id(apex, &first.simplex),
                            outcome: Outcome(o),
                            coef: ineq.bound.clone(),
                        });
                    }
                }
            }
            out.push(LinearInequality::new(terms, rhs_terms, Rat::zero()));
        }
    }
    Ok(out)
}

/// Outcome of [`verify_characterization`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterizationReport {
    pub passed: bool,
    pub vertices: usize,
    pub noncontextual_vertices: usize,
    pub contextual_vertices: usize,
    /// Noncontextual vertices violating some member.
    pub violating_noncontextual: usize,
    /// Contextual vertices satisfying every member.
    pub undetected_contextual: usize,
    pub samples: usize,
    pub noncontextual_samples: usize,
    /// Samples where the LP verdict and family satisfaction disagree.
    pub sample_mismatches: usize,
    /// First failing point, if any.
    pub counterexample: Option<SDist>,
}

/// Checks on the enumerated vertices and on `samples` seeded random points that
/// satisfying the family is equivalent to noncontextuality.
pub fn verify_characterization(
    x: &Arc<Scenario>,
    m: u32,
    family: &[LinearInequality],
    samples: usize,
    seed: u64,
    caps: Caps,
) -> Result<CharacterizationReport, BellError> {
    let vertices = enumerate_vertices(x, m, caps)?;
    let mut report = CharacterizationReport {
        passed: true,
        vertices: vertices.len(),
        noncontextual_vertices: 0,
        contextual_vertices: 0,
        violating_noncontextual: 0,
        undetected_contextual: 0,
        samples,
        noncontextual_samples: 0,
        sample_mismatches: 0,
        counterexample: None,
    };
    let fail = |report: &mut CharacterizationReport, p: &SDist| {
        report.passed = false;
        if report.counterexample.is_none() {
            report.counterexample = Some(p.clone());
        }
    };
    for v in &vertices {
        let nc = is_noncontextual(v, caps)?.is_noncontextual();
        let sat = satisfies_all(family, v)?;
        if nc {
            report.noncontextual_vertices += 1;
            if !sat {
                report.violating_noncontextual += 1;
                fail(&mut report, v);
            }
        } else {
            report.contextual_vertices += 1;
            if sat {
                report.undetected_contextual += 1;
                fail(&mut report, v);
            }
        }
    }
    for p in random_convex_combinations(&vertices, samples, seed, 4) {
        let nc = is_noncontextual(&p, caps)?.is_noncontextual();
        if nc {
            report.noncontextual_samples += 1;
        }
        if nc != satisfies_all(family, &p)? {
            report.sample_mismatches += 1;
            fail(&mut report, &p);
        }
    }
    Ok(report)
}
