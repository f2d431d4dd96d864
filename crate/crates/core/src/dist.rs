//! Exact distributions on outcome tuples `Z_m^{k}`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rat;

/// A tuple of outcomes, each reduced mod `m`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Outcome(pub Vec<u32>);

impl Outcome {
    pub fn new(values: impl Into<Vec<u32>>) -> Self {
        Outcome(values.into())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Componentwise sum mod `m`.
    pub fn add(&self, other: &Outcome, m: u32) -> Outcome {
        Outcome(self.0.iter().zip(&other.0).map(|(a, b)| (a + b) % m).collect())
    }

    /// Componentwise difference mod `m`.
    pub fn sub(&self, other: &Outcome, m: u32) -> Outcome {
        Outcome(self.0.iter().zip(&other.0).map(|(a, b)| (a + m - b) % m).collect())
    }

    pub fn project(&self, positions: &[usize]) -> Outcome {
        Outcome(positions.iter().map(|&p| self.0[p]).collect())
    }

    /// All tuples of length `arity` over `Z_m` in lexicographic order.
    pub fn all(m: u32, arity: usize) -> Vec<Outcome> {
        let mut out = vec![Outcome(Vec::with_capacity(arity))];
        for _ in 0..arity {
            out = out
                .into_iter()
                .flat_map(|o| {
                    (0..m).map(move |a| {
                        let mut v = o.0.clone();
                        v.push(a);
                        Outcome(v)
                    })
                })
                .collect();
        }
        out
    }
}

impl fmt::Debug for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for Outcome {
    fn from(v: Vec<u32>) -> Self {
        Outcome(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DistError {
    #[error("modulus must be at least 2, got {0}")]
    BadModulus(u32),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),
    #[error("arity mismatch: {0} vs {1}")]
    ArityMismatch(usize, usize),
    #[error("outcome {outcome:?} is not a tuple of length {arity} over Z_{m}")]
    BadOutcome { outcome: Outcome, arity: usize, m: u32 },
    #[error("negative probability {prob} at {outcome:?}")]
    Negative { outcome: Outcome, prob: Rat },
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(Rat),
    #[error("face index {index} out of range for arity {arity}")]
    FaceOutOfRange { index: usize, arity: usize },
    #[error("duplicate outcome {0:?}")]
    DuplicateOutcome(Outcome),
}

/// A probability distribution on `Z_m^{arity}` with sparse support.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dist {
    m: u32,
    arity: usize,
    probs: BTreeMap<Outcome, Rat>,
}

impl fmt::Debug for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.probs.iter()).finish()
    }
}

impl Dist {
    /// Validates and builds a distribution; zero entries are dropped.
    pub fn new(m: u32, arity: usize, entries: impl IntoIterator<Item = (Outcome, Rat)>) -> Result<Self, DistError> {
        if m < 2 {
            return Err(DistError::BadModulus(m));
        }
        let mut probs = BTreeMap::new();
        let mut total = Rat::zero();
        for (outcome, prob) in entries {
            if outcome.len() != arity || outcome.0.iter().any(|&a| a >= m) {
                return Err(DistError::BadOutcome { outcome, arity, m });
            }
            if prob.is_negative() {
                return Err(DistError::Negative { outcome, prob });
            }
            total += &prob;
            if probs.contains_key(&outcome) {
                return Err(DistError::DuplicateOutcome(outcome));
            }
            if !prob.is_zero() {
                probs.insert(outcome, prob);
            }
        }
        if !total.is_one() {
            return Err(DistError::NotNormalized(total));
        }
        Ok(Dist { m, arity, probs })
    }

    /// Builds from a mass map known to be valid (used by internal operations).
    pub(crate) fn from_mass(m: u32, arity: usize, mass: BTreeMap<Outcome, Rat>) -> Self {
        let probs = mass.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        Dist { m, arity, probs }
    }

    pub fn delta(m: u32, outcome: Outcome) -> Self {
        assert!(m >= 2 && outcome.0.iter().all(|&a| a < m), "outcome out of range");
        let arity = outcome.len();
        Dist { m, arity, probs: BTreeMap::from([(outcome, Rat::one())]) }
    }

    pub fn uniform(m: u32, arity: usize) -> Self {
        let outcomes = Outcome::all(m, arity);
        let p = Rat::new(1, outcomes.len() as i64);
        Dist { m, arity, probs: outcomes.into_iter().map(|o| (o, p.clone())).collect() }
    }

    /// `S^j`: mass `1/m` on each pair `(a, a+j)`.
    pub fn average_power(m: u32, j: i64) -> Self {
        let shift = j.rem_euclid(m as i64) as u32;
        let p = Rat::new(1, m as i64);
        let probs = (0..m).map(|a| (Outcome(vec![a, (a + shift) % m]), p.clone())).collect();
        Dist { m, arity: 2, probs }
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn prob(&self, outcome: &Outcome) -> Rat {
        self.probs.get(outcome).cloned().unwrap_or_default()
    }

    /// Nonzero entries in lexicographic outcome order.
    pub fn support(&self) -> impl Iterator<Item = (&Outcome, &Rat)> {
        self.probs.iter()
    }

    pub fn in_support(&self, outcome: &Outcome) -> bool {
        self.probs.contains_key(outcome)
    }

    pub fn is_delta(&self) -> bool {
        self.probs.len() == 1
    }

    fn check_compatible(&self, other: &Dist) -> Result<(), DistError> {
        if self.m != other.m {
            return Err(DistError::ModulusMismatch(self.m, other.m));
        }
        if self.arity != other.arity {
            return Err(DistError::ArityMismatch(self.arity, other.arity));
        }
        Ok(())
    }

    /// `(P * Q)(a) = Σ_{a1 + a2 = a} P(a1) Q(a2)`.
    pub fn convolve(&self, other: &Dist) -> Result<Dist, DistError> {
        self.check_compatible(other)?;
        let mut mass: BTreeMap<Outcome, Rat> = BTreeMap::new();
        for (a, p) in &self.probs {
            for (b, q) in &other.probs {
                *mass.entry(a.add(b, self.m)).or_default() += p * q;
            }
        }
        Ok(Dist::from_mass(self.m, self.arity, mass))
    }

    /// Image under the face map `d_i`, which deletes coordinate `i`.
    pub fn marginalize(&self, i: usize) -> Result<Dist, DistError> {
        if i >= self.arity || self.arity < 2 {
            return Err(DistError::FaceOutOfRange { index: i, arity: self.arity });
        }
        let keep: Vec<usize> = (0..self.arity).filter(|&k| k != i).collect();
        Ok(self.project(&keep))
    }

    /// Marginal on the given coordinate positions (in the given order).
    pub fn project(&self, positions: &[usize]) -> Dist {
        let mut mass: BTreeMap<Outcome, Rat> = BTreeMap::new();
        for (a, p) in &self.probs {
            *mass.entry(a.project(positions)).or_default() += p;
        }
        Dist::from_mass(self.m, positions.len(), mass)
    }

    /// `y ↦ P(y - s)`: translate the distribution by `s`.
    pub fn shift(&self, s: &Outcome) -> Dist {
        assert_eq!(s.len(), self.arity, "shift length");
        let probs = self.probs.iter().map(|(a, p)| (a.add(s, self.m), p.clone())).collect();
        Dist { m: self.m, arity: self.arity, probs }
    }

    /// Convex combination `Σ w_k P_k`; weights must be nonnegative and sum to 1.
    pub fn mix<'a>(parts: impl IntoIterator<Item = (&'a Rat, &'a Dist)>) -> Result<Dist, DistError> {
        let mut m = None;
        let mut arity = None;
        let mut total = Rat::zero();
        let mut mass: BTreeMap<Outcome, Rat> = BTreeMap::new();
        for (w, d) in parts {
            match (m, arity) {
                (None, _) => {
                    m = Some(d.m);
                    arity = Some(d.arity);
                }
                (Some(mm), Some(aa)) => {
                    if mm != d.m {
                        return Err(DistError::ModulusMismatch(mm, d.m));
                    }
                    if aa != d.arity {
                        return Err(DistError::ArityMismatch(aa, d.arity));
                    }
                }
                _ => unreachable!(),
            }
            if w.is_negative() {
                return Err(DistError::NotNormalized(w.clone()));
            }
            total += w;
            for (a, p) in &d.probs {
                *mass.entry(a.clone()).or_default() += w * p;
            }
        }
        if !total.is_one() {
            return Err(DistError::NotNormalized(total));
        }
        Ok(Dist::from_mass(m.expect("nonempty mixture"), arity.expect("nonempty"), mass))
    }

    /// Splits on the first coordinate: entry `j` holds `λ_j = Σ P(j, a⃗)` and, when
    /// `λ_j > 0`, the normalized conditional on the remaining coordinates.
    pub fn split_first(&self) -> Vec<Part<Dist>> {
        assert!(self.arity >= 1, "cannot split a 0-tuple distribution");
        let parts: Vec<Vec<Outcome>> = (0..self.m)
            .map(|j| self.probs.keys().filter(|o| o.0[0] == j).cloned().collect())
            .collect();
        partition_split(&self.probs, &parts)
            .into_iter()
            .map(|part| Part {
                weight: part.weight,
                component: part.component.map(|mass| {
                    let tail = mass.into_iter().map(|(o, p)| (Outcome(o.0[1..].to_vec()), p)).collect();
                    Dist::from_mass(self.m, self.arity - 1, tail)
                }),
            })
            .collect()
    }

    /// Inverse of [`Dist::split_first`]: `P(a_0, a⃗) = λ_{a_0} · P^{(a_0)}(a⃗)`.
    pub fn join_first(m: u32, arity: usize, parts: &[Part<Dist>]) -> Dist {
        let mut mass = BTreeMap::new();
        for (j, part) in parts.iter().enumerate() {
            if let Some(d) = &part.component {
                for (a, p) in &d.probs {
                    let mut o = Vec::with_capacity(arity);
                    o.push(j as u32);
                    o.extend_from_slice(&a.0);
                    mass.insert(Outcome(o), &part.weight * p);
                }
            }
        }
        Dist::from_mass(m, arity, mass)
    }
}

/// A weighted component `⟨λ, a⟩`; `component` is `None` (the marker •) exactly when `λ = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Part<T> {
    pub weight: Rat,
    pub component: Option<T>,
}

impl<T> Part<T> {
    pub fn bullet() -> Self {
        Part { weight: Rat::zero(), component: None }
    }
}

/// Splits a finitely supported mass function along a partition of its universe:
/// `P^{(i)}(y) = P(y) / Σ_{x ∈ X_i} P(x)`.
pub fn partition_split<K: Ord + Clone>(mass: &BTreeMap<K, Rat>, parts: &[Vec<K>]) -> Vec<Part<BTreeMap<K, Rat>>> {
    parts
        .iter()
        .map(|part| {
            let weight: Rat = part.iter().filter_map(|k| mass.get(k)).sum();
            if weight.is_zero() {
                return Part::bullet();
            }
            let component = part
                .iter()
                .filter_map(|k| mass.get(k).filter(|p| !p.is_zero()).map(|p| (k.clone(), p / &weight)))
                .collect();
            Part { weight, component: Some(component) }
        })
        .collect()
}
