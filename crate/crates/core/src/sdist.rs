//! Simplicial distributions on `(X, Δ_{Z_m})`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::dist::{Dist, DistError, Outcome};
use crate::rational::Rat;
use crate::scenario::{Scenario, ScenarioError};

/// Default cap on the number of labelings `m^{|X_0|}`.
pub const DEFAULT_LABELING_CAP: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SDistError {
    #[error("generator {generator}: expected arity {expected}, got {found}")]
    Arity { generator: String, expected: usize, found: usize },
    #[error("generator {generator}: modulus {found}, expected {expected}")]
    Modulus { generator: String, expected: u32, found: u32 },
    #[error("missing distribution for generator {0}")]
    MissingGenerator(String),
    #[error("{0} is not a generator of the scenario")]
    NotAGenerator(String),
    #[error("marginal mismatch on face {face}: generator {first} gives {first_marginal:?}, generator {second} gives {second_marginal:?}")]
    Marginal { face: String, first: String, second: String, first_marginal: Dist, second_marginal: Dist },
    #[error("distributions live on different scenarios")]
    ScenarioMismatch,
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u32, u32),
    #[error("labeling count {count} exceeds cap {cap}")]
    CapExceeded { count: String, cap: u64 },
    #[error("missing label for vertex {0}")]
    MissingLabel(String),
    #[error("{0} is not a vertex of the scenario")]
    UnknownVertex(String),
    #[error("labeling has {found} entries, scenario has {expected} vertices")]
    LabelCount { expected: usize, found: usize },
    #[error("label {label} out of range for m = {m}")]
    LabelRange { label: u32, m: u32 },
    #[error("mixture weights must be nonnegative and sum to 1, got total {0}")]
    BadMixture(Rat),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// A simplicial distribution, stored as one distribution per generator
/// (in the scenario's generator order).
#[derive(Clone)]
pub struct SDist {
    scenario: Arc<Scenario>,
    m: u32,
    dists: Vec<Dist>,
}

impl PartialEq for SDist {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m && self.dists == other.dists && same_scenario(&self.scenario, &other.scenario)
    }
}

impl Eq for SDist {}

impl fmt::Debug for SDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut map = f.debug_map();
        for (slot, &g) in self.scenario.generators().iter().enumerate() {
            map.entry(&self.scenario.id(g), &self.dists[slot]);
        }
        map.finish()
    }
}

fn same_scenario(a: &Arc<Scenario>, b: &Arc<Scenario>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl SDist {
    /// Builds and validates from per-generator distributions (in generator order).
    pub fn new(scenario: Arc<Scenario>, m: u32, dists: Vec<Dist>) -> Result<Self, SDistError> {
        let gens = scenario.generators();
        if dists.len() != gens.len() {
            let missing = gens.get(dists.len()).map(|&g| scenario.id(g).to_string()).unwrap_or_default();
            return Err(SDistError::MissingGenerator(missing));
        }
        let p = SDist { scenario, m, dists };
        validate_sdist(&p)?;
        Ok(p)
    }

    /// Builds from a map keyed by generator id.
    pub fn from_map(scenario: Arc<Scenario>, m: u32, mut dists: BTreeMap<String, Dist>) -> Result<Self, SDistError> {
        let mut ordered = Vec::with_capacity(scenario.generators().len());
        for &g in scenario.generators() {
            let id = scenario.id(g);
            ordered.push(dists.remove(id).ok_or_else(|| SDistError::MissingGenerator(id.to_string()))?);
        }
        if let Some(extra) = dists.into_keys().next() {
            return Err(SDistError::NotAGenerator(extra));
        }
        SDist::new(scenario, m, ordered)
    }

    /// Every generator uniform.
    pub fn uniform(scenario: Arc<Scenario>, m: u32) -> Self {
        let dists = scenario.generators().iter().map(|&g| Dist::uniform(m, scenario.dim(g) + 1)).collect();
        SDist { scenario, m, dists }
    }

    pub fn scenario(&self) -> &Arc<Scenario> {
        &self.scenario
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Distributions in generator order.
    pub fn dists(&self) -> &[Dist] {
        &self.dists
    }

    pub fn generator_dist(&self, id: &str) -> Option<&Dist> {
        let k = self.scenario.lookup(id)?;
        self.scenario.generator_slot(k).map(|s| &self.dists[s])
    }

    /// `p_x` for any simplex `x`, read from its canonical (first) occurrence.
    pub fn marginal(&self, k: usize) -> Dist {
        let occ = &self.scenario.occurrences(k)[0];
        let slot = self.scenario.generator_slot(occ.generator).expect("occurrence in generator");
        self.dists[slot].project(&occ.positions)
    }

    pub fn marginal_by_id(&self, id: &str) -> Option<Dist> {
        self.scenario.lookup(id).map(|k| self.marginal(k))
    }

    pub fn is_deterministic(&self) -> bool {
        self.dists.iter().all(Dist::is_delta)
    }

    fn check_same(&self, other: &SDist) -> Result<(), SDistError> {
        if self.m != other.m {
            return Err(SDistError::ModulusMismatch(self.m, other.m));
        }
        if !same_scenario(&self.scenario, &other.scenario) {
            return Err(SDistError::ScenarioMismatch);
        }
        Ok(())
    }

    /// Convex combination `Σ w_k p_k` of distributions on one scenario.
    pub fn mix<'a>(parts: impl IntoIterator<Item = (&'a Rat, &'a SDist)>) -> Result<SDist, SDistError> {
        let parts: Vec<(&Rat, &SDist)> = parts.into_iter().collect();
        let first = parts.first().expect("nonempty mixture").1;
        for (_, p) in &parts {
            first.check_same(p)?;
        }
        let total: Rat = parts.iter().map(|(w, _)| *w).sum();
        if !total.is_one() || parts.iter().any(|(w, _)| w.is_negative()) {
            return Err(SDistError::BadMixture(total));
        }
        let dists = (0..first.dists.len())
            .map(|slot| Dist::mix(parts.iter().map(|(w, p)| (*w, &p.dists[slot]))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SDist { scenario: Arc::clone(&first.scenario), m: first.m, dists })
    }

    /// Re-targets onto an equal scenario value held by another `Arc`.
    pub fn with_scenario(&self, scenario: Arc<Scenario>) -> Result<SDist, SDistError> {
        if !same_scenario(&self.scenario, &scenario) {
            return Err(SDistError::ScenarioMismatch);
        }
        Ok(SDist { scenario, m: self.m, dists: self.dists.clone() })
    }
}

/// Checks arities and that every shared face receives the same marginal from
/// each generator containing it.
pub fn validate_sdist(p: &SDist) -> Result<(), SDistError> {
    let x = &p.scenario;
    for (slot, &g) in x.generators().iter().enumerate() {
        let d = &p.dists[slot];
        if d.m() != p.m {
            return Err(SDistError::Modulus { generator: x.id(g).to_string(), expected: p.m, found: d.m() });
        }
        if d.arity() != x.dim(g) + 1 {
            return Err(SDistError::Arity { generator: x.id(g).to_string(), expected: x.dim(g) + 1, found: d.arity() });
        }
    }
    for k in 0..x.len() {
        let occ = x.occurrences(k);
        if occ.len() < 2 {
            continue;
        }
        let marginal_of = |o: &crate::scenario::Occurrence| {
            p.dists[x.generator_slot(o.generator).expect("generator")].project(&o.positions)
        };
        let first = marginal_of(&occ[0]);
        for o in &occ[1..] {
            let other = marginal_of(o);
            if other != first {
                return Err(SDistError::Marginal {
                    face: x.id(k).to_string(),
                    first: x.id(occ[0].generator).to_string(),
                    second: x.id(o.generator).to_string(),
                    first_marginal: first,
                    second_marginal: other,
                });
            }
        }
    }
    Ok(())
}

/// A simplicial map `X → Δ_{Z_m}`, stored as labels indexed by the scenario's vertex order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DeterministicMap {
    m: u32,
    labels: Vec<u32>,
}

impl fmt::Debug for DeterministicMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "φ{:?}", self.labels)
    }
}

impl DeterministicMap {
    pub fn new(m: u32, labels: Vec<u32>) -> Result<Self, SDistError> {
        if let Some(&label) = labels.iter().find(|&&a| a >= m) {
            return Err(SDistError::LabelRange { label, m });
        }
        Ok(DeterministicMap { m, labels })
    }

    pub fn zero(m: u32, vertices: usize) -> Self {
        DeterministicMap { m, labels: vec![0; vertices] }
    }

    /// Builds from vertex id → label for the given scenario.
    pub fn from_labels(x: &Scenario, m: u32, labels: &BTreeMap<String, u32>) -> Result<Self, SDistError> {
        let mut out = Vec::with_capacity(x.vertices().len());
        for &v in x.vertices() {
            let id = x.id(v);
            let a = *labels.get(id).ok_or_else(|| SDistError::MissingLabel(id.to_string()))?;
            out.push(a);
        }
        if labels.len() != out.len() {
            let extra = labels.keys().find(|k| x.lookup(k).and_then(|v| x.vertex_slot(v)).is_none());
            return Err(SDistError::UnknownVertex(extra.cloned().unwrap_or_default()));
        }
        DeterministicMap::new(m, out)
    }

    pub fn to_labels(&self, x: &Scenario) -> BTreeMap<String, u32> {
        x.vertices().iter().zip(&self.labels).map(|(&v, &a)| (x.id(v).to_string(), a)).collect()
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Label of vertex index `v` of `x`.
    pub fn label(&self, x: &Scenario, v: usize) -> u32 {
        self.labels[x.vertex_slot(v).expect("vertex")]
    }

    /// `φ_k`: the outcome tuple this map assigns to simplex `k`.
    pub fn on_simplex(&self, x: &Scenario, k: usize) -> Outcome {
        Outcome(x.vertices_of(k).iter().map(|&v| self.label(x, v)).collect())
    }

    pub fn add(&self, other: &DeterministicMap) -> DeterministicMap {
        assert_eq!(self.m, other.m);
        let labels = self.labels.iter().zip(&other.labels).map(|(a, b)| (a + b) % self.m).collect();
        DeterministicMap { m: self.m, labels }
    }

    pub fn neg(&self) -> DeterministicMap {
        let labels = self.labels.iter().map(|a| (self.m - a) % self.m).collect();
        DeterministicMap { m: self.m, labels }
    }

    fn check_against(&self, x: &Scenario) -> Result<(), SDistError> {
        if self.labels.len() != x.vertices().len() {
            return Err(SDistError::LabelCount { expected: x.vertices().len(), found: self.labels.len() });
        }
        Ok(())
    }
}

/// All `m^{|X_0|}` labelings in lexicographic order of their label vectors.
pub fn enumerate_deterministic(x: &Scenario, m: u32, cap: u64) -> Result<Vec<DeterministicMap>, SDistError> {
    let n = x.vertices().len();
    let count = (m as u128).checked_pow(n as u32);
    match count {
        Some(c) if c <= cap as u128 => {}
        _ => {
            let shown = count.map(|c| c.to_string()).unwrap_or_else(|| format!("{m}^{n}"));
            return Err(SDistError::CapExceeded { count: shown, cap });
        }
    }
    Ok(Outcome::all(m, n).into_iter().map(|o| DeterministicMap { m, labels: o.0 }).collect())
}

/// `δ^φ`: each generator gets the delta at `φ` of its ordered vertices.
pub fn deterministic_sdist(x: &Arc<Scenario>, phi: &DeterministicMap) -> Result<SDist, SDistError> {
    phi.check_against(x)?;
    let dists = x.generators().iter().map(|&g| Dist::delta(phi.m, phi.on_simplex(x, g))).collect();
    Ok(SDist { scenario: Arc::clone(x), m: phi.m, dists })
}

/// A probability distribution on deterministic maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetMixture {
    weights: BTreeMap<DeterministicMap, Rat>,
}

impl DetMixture {
    pub fn new(entries: impl IntoIterator<Item = (DeterministicMap, Rat)>) -> Result<Self, SDistError> {
        let mut weights: BTreeMap<DeterministicMap, Rat> = BTreeMap::new();
        for (phi, w) in entries {
            if w.is_negative() {
                return Err(SDistError::BadMixture(w));
            }
            *weights.entry(phi).or_default() += w;
        }
        let total: Rat = weights.values().sum();
        if !total.is_one() {
            return Err(SDistError::BadMixture(total));
        }
        weights.retain(|_, w| !w.is_zero());
        Ok(DetMixture { weights })
    }

    pub fn delta(phi: DeterministicMap) -> Self {
        DetMixture { weights: BTreeMap::from([(phi, Rat::one())]) }
    }

    pub fn weights(&self) -> &BTreeMap<DeterministicMap, Rat> {
        &self.weights
    }

    /// `t·self + (1-t)·other`.
    pub fn combine(&self, t: &Rat, other: &DetMixture) -> DetMixture {
        let s = Rat::one() - t;
        let mut weights: BTreeMap<DeterministicMap, Rat> = BTreeMap::new();
        for (phi, w) in &self.weights {
            *weights.entry(phi.clone()).or_default() += t * w;
        }
        for (phi, w) in &other.weights {
            *weights.entry(phi.clone()).or_default() += &s * w;
        }
        weights.retain(|_, w| !w.is_zero());
        DetMixture { weights }
    }
}

/// `Θ(Q)_x(y) = Σ_{φ_x = y} Q(φ)`.
pub fn theta(x: &Arc<Scenario>, m: u32, q: &DetMixture) -> Result<SDist, SDistError> {
    let mut mass: Vec<BTreeMap<Outcome, Rat>> = vec![BTreeMap::new(); x.generators().len()];
    for (phi, w) in &q.weights {
        if phi.m != m {
            return Err(SDistError::ModulusMismatch(m, phi.m));
        }
        phi.check_against(x)?;
        for (slot, &g) in x.generators().iter().enumerate() {
            *mass[slot].entry(phi.on_simplex(x, g)).or_default() += w;
        }
    }
    let dists = x
        .generators()
        .iter()
        .zip(mass)
        .map(|(&g, m_g)| Dist::from_mass(m, x.dim(g) + 1, m_g))
        .collect();
    Ok(SDist { scenario: Arc::clone(x), m, dists })
}

/// `(p·q)_x = p_x * q_x`.
pub fn product(p: &SDist, q: &SDist) -> Result<SDist, SDistError> {
    p.check_same(q)?;
    let dists = p.dists.iter().zip(&q.dists).map(|(a, b)| a.convolve(b)).collect::<Result<Vec<_>, _>>()?;
    Ok(SDist { scenario: Arc::clone(&p.scenario), m: p.m, dists })
}

/// `(φ·q)_x(y) = q_x(y - φ_x)`.
pub fn act(phi: &DeterministicMap, q: &SDist) -> Result<SDist, SDistError> {
    if phi.m != q.m {
        return Err(SDistError::ModulusMismatch(q.m, phi.m));
    }
    let x = &q.scenario;
    phi.check_against(x)?;
    let dists = x.generators().iter().zip(&q.dists).map(|(&g, d)| d.shift(&phi.on_simplex(x, g))).collect();
    Ok(SDist { scenario: Arc::clone(x), m: q.m, dists })
}

/// Restriction along an id-preserving embedding `sub ↪ X`.
pub fn restrict(p: &SDist, sub: &Arc<Scenario>) -> Result<SDist, SDistError> {
    let map = p.scenario.embedding_of(sub)?;
    Ok(restrict_via(p, sub, &map))
}

/// Restriction along an explicit simplex-index map `sub → X` (assumed simplicial).
pub fn restrict_via(p: &SDist, sub: &Arc<Scenario>, map: &[usize]) -> SDist {
    let dists = sub.generators().iter().map(|&g| p.marginal(map[g])).collect();
    SDist { scenario: Arc::clone(sub), m: p.m, dists }
}

/// Restriction of a labeling along a simplex-index map `sub → X`.
pub fn restrict_map(phi: &DeterministicMap, x: &Scenario, sub: &Scenario, map: &[usize]) -> DeterministicMap {
    let labels = sub.vertices().iter().map(|&v| phi.label(x, map[v])).collect();
    DeterministicMap { m: phi.m, labels }
}

/// `q ⪯ p`: the support of every `q_x` lies in the support of `p_x`.
pub fn preceq(q: &SDist, p: &SDist) -> Result<bool, SDistError> {
    q.check_same(p)?;
    Ok(q.dists.iter().zip(&p.dists).all(|(a, b)| a.support().all(|(o, _)| b.in_support(o))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_cycle, build_line};

    fn chsh() -> Arc<Scenario> {
        Arc::new(build_cycle(4).unwrap())
    }

    fn o(v: &[u32]) -> Outcome {
        Outcome(v.to_vec())
    }

    fn pr_box(x: &Arc<Scenario>) -> SDist {
        let mut dists = BTreeMap::new();
        dists.insert("s1".to_string(), Dist::average_power(2, 0));
        for s in ["s2", "s3", "s4"] {
            dists.insert(s.to_string(), Dist::average_power(2, 1));
        }
        SDist::from_map(Arc::clone(x), 2, dists).unwrap()
    }

    #[test]
    fn validation_examples() {
        let x = chsh();
        let plus = SDist::new(Arc::clone(&x), 2, vec![Dist::average_power(2, 0); 4]).unwrap();
        assert!(validate_sdist(&plus).is_ok());
        pr_box(&x);
        let bad = SDist::new(
            Arc::clone(&x),
            2,
            vec![
                Dist::delta(2, o(&[0, 0])),
                Dist::delta(2, o(&[1, 0])),
                Dist::delta(2, o(&[0, 0])),
                Dist::delta(2, o(&[0, 0])),
            ],
        );
        match bad {
            Err(SDistError::Marginal { face, .. }) => assert_eq!(face, "v2"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn deterministic_counts() {
        let x = chsh();
        assert_eq!(enumerate_deterministic(&x, 2, DEFAULT_LABELING_CAP).unwrap().len(), 16);
        let cone = crate::scenario::cone(&x, "c").unwrap();
        assert_eq!(enumerate_deterministic(&cone.scenario, 2, DEFAULT_LABELING_CAP).unwrap().len(), 32);
        let pt = crate::scenario::build_point("v");
        assert_eq!(enumerate_deterministic(&pt, 3, DEFAULT_LABELING_CAP).unwrap().len(), 3);
        assert!(matches!(enumerate_deterministic(&x, 2, 15), Err(SDistError::CapExceeded { .. })));
    }

    #[test]
    fn deterministic_distributions() {
        let x = chsh();
        let zero = deterministic_sdist(&x, &DeterministicMap::zero(2, 4)).unwrap();
        assert!(zero.dists().iter().all(|d| *d == Dist::delta(2, o(&[0, 0]))));
        let line = Arc::new(build_line(3).unwrap());
        for h in 0..2 {
            let psi = DeterministicMap::new(2, vec![0, 0, 1, h]).unwrap();
            let d = deterministic_sdist(&line, &psi).unwrap();
            assert_eq!(d.dists()[0], Dist::delta(2, o(&[0, 0])));
            assert_eq!(d.dists()[1], Dist::delta(2, o(&[0, 1])));
            assert_eq!(d.dists()[2], Dist::delta(2, o(&[1, h])));
            assert!(validate_sdist(&d).is_ok());
        }
    }

    #[test]
    fn theta_examples() {
        let x = chsh();
        let maps = enumerate_deterministic(&x, 2, DEFAULT_LABELING_CAP).unwrap();
        let phi = maps[5].clone();
        assert_eq!(theta(&x, 2, &DetMixture::delta(phi.clone())).unwrap(), deterministic_sdist(&x, &phi).unwrap());
        let all = DetMixture::new(maps.into_iter().map(|p| (p, Rat::new(1, 16)))).unwrap();
        assert_eq!(theta(&x, 2, &all).unwrap(), SDist::uniform(Arc::clone(&x), 2));

        let line = Arc::new(build_line(2).unwrap());
        let q = DetMixture::new([
            (DeterministicMap::new(2, vec![0, 0, 0]).unwrap(), Rat::new(1, 2)),
            (DeterministicMap::new(2, vec![1, 1, 1]).unwrap(), Rat::new(1, 2)),
        ])
        .unwrap();
        let p = theta(&line, 2, &q).unwrap();
        assert!(p.dists().iter().all(|d| *d == Dist::average_power(2, 0)));
    }

    #[test]
    fn product_examples() {
        let x = chsh();
        let pr = pr_box(&x);
        let zero = deterministic_sdist(&x, &DeterministicMap::zero(2, 4)).unwrap();
        assert_eq!(product(&pr, &zero).unwrap(), pr);
        let sq = product(&pr, &pr).unwrap();
        assert!(sq.dists().iter().all(|d| *d == Dist::average_power(2, 0)));
        let u = SDist::uniform(Arc::clone(&x), 2);
        assert_eq!(product(&pr, &u).unwrap(), u);
    }

    #[test]
    fn act_examples() {
        let x = chsh();
        let pr = pr_box(&x);
        assert_eq!(act(&DeterministicMap::zero(2, 4), &pr).unwrap(), pr);
        // φ with φ_{s1} = (0,1)
        let phi = DeterministicMap::new(2, vec![0, 1, 1, 1]).unwrap();
        let moved = act(&phi, &pr).unwrap();
        assert_eq!(moved.dists()[0], Dist::average_power(2, 1));
        let psi = DeterministicMap::new(2, vec![1, 0, 1, 1]).unwrap();
        assert_eq!(
            act(&phi, &deterministic_sdist(&x, &psi).unwrap()).unwrap(),
            deterministic_sdist(&x, &phi.add(&psi)).unwrap()
        );
    }

    #[test]
    fn restriction_examples() {
        let x = chsh();
        let pr = pr_box(&x);
        let edge = Arc::new(x.closure("edge", &["s1"]).unwrap());
        let r = restrict(&pr, &edge).unwrap();
        assert_eq!(r.dists(), &[Dist::average_power(2, 0)]);
        let full = Arc::new(x.closure("full", &["s1", "s2", "s3", "s4"]).unwrap());
        assert_eq!(restrict(&pr, &full).unwrap().dists(), pr.dists());
        let line = Arc::new(x.closure("line", &["s1", "s2", "s3"]).unwrap());
        let u = restrict(&SDist::uniform(Arc::clone(&x), 2), &line).unwrap();
        assert!(u.dists().iter().all(|d| *d == Dist::uniform(2, 2)));
    }

    #[test]
    fn preceq_examples() {
        let x = chsh();
        let pr = pr_box(&x);
        assert!(preceq(&pr, &pr).unwrap());
        let zero = deterministic_sdist(&x, &DeterministicMap::zero(2, 4)).unwrap();
        assert!(preceq(&zero, &SDist::uniform(Arc::clone(&x), 2)).unwrap());
        let edge = Arc::new(build_line(1).unwrap());
        let plus = SDist::new(Arc::clone(&edge), 2, vec![Dist::average_power(2, 0)]).unwrap();
        let minus = SDist::new(Arc::clone(&edge), 2, vec![Dist::average_power(2, 1)]).unwrap();
        assert!(!preceq(&plus, &minus).unwrap());
    }

    #[test]
    fn label_round_trip() {
        let x = chsh();
        let phi = DeterministicMap::new(2, vec![1, 0, 0, 1]).unwrap();
        let labels = phi.to_labels(&x);
        assert_eq!(DeterministicMap::from_labels(&x, 2, &labels).unwrap(), phi);
        assert!(DeterministicMap::new(2, vec![2]).is_err());
    }
}
