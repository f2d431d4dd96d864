//! The polytope of simplicial distributions: H-representation, contextuality,
//! vertex certification and enumeration, vertex supports.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dd::polytope_vertices;
use crate::dist::{Dist, Outcome};
use crate::linalg::rank;
use crate::lp::{solve_standard, LinearSystem, Row, RowKind, StandardOutcome};
use crate::rational::Rat;
use crate::scenario::Scenario;
use crate::sdist::{
    deterministic_sdist, enumerate_deterministic, preceq, DetMixture, DeterministicMap, SDist, SDistError,
    DEFAULT_LABELING_CAP,
};

pub const DEFAULT_COORDINATE_CAP: usize = 40;

/// Size guards for enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Maximum number of coordinates handed to vertex enumeration.
    pub coordinates: usize,
    /// Maximum number of deterministic labelings `m^{|X_0|}`.
    pub labelings: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { coordinates: DEFAULT_COORDINATE_CAP, labelings: DEFAULT_LABELING_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PolytopeError {
    #[error("{coordinates} coordinates exceed the enumeration cap {cap}")]
    CoordinateCap { coordinates: usize, cap: usize },
    #[error("not a vertex: {0}")]
    NotAVertex(String),
    #[error(transparent)]
    SDist(#[from] SDistError),
}

/// One coordinate of the polytope: a generator and an outcome on it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CoordIndex {
    pub generator: String,
    pub outcome: Outcome,
}

/// Coordinates ordered by generator (scenario order) then outcome.
#[derive(Clone, Debug)]
pub struct Coordinates {
    scenario: Arc<Scenario>,
    m: u32,
    entries: Vec<(usize, Outcome)>,
    offsets: Vec<usize>,
}

impl Coordinates {
    pub fn new(scenario: &Arc<Scenario>, m: u32) -> Self {
        let mut entries = Vec::new();
        let mut offsets = Vec::new();
        for (slot, &g) in scenario.generators().iter().enumerate() {
            offsets.push(entries.len());
            for o in Outcome::all(m, scenario.dim(g) + 1) {
                entries.push((slot, o));
            }
        }
        offsets.push(entries.len());
        Coordinates { scenario: Arc::clone(scenario), m, entries, offsets }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scenario(&self) -> &Arc<Scenario> {
        &self.scenario
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `(generator slot, outcome)` of coordinate `i`.
    pub fn entry(&self, i: usize) -> (usize, &Outcome) {
        (self.entries[i].0, &self.entries[i].1)
    }

    pub fn index(&self) -> Vec<CoordIndex> {
        self.entries
            .iter()
            .map(|(slot, o)| CoordIndex {
                generator: self.scenario.id(self.scenario.generators()[*slot]).to_string(),
                outcome: o.clone(),
            })
            .collect()
    }

    /// Position of `(slot, outcome)`; outcomes are enumerated lexicographically.
    pub fn position(&self, slot: usize, outcome: &Outcome) -> usize {
        let rank = outcome.0.iter().fold(0usize, |acc, &a| acc * self.m as usize + a as usize);
        self.offsets[slot] + rank
    }

    pub fn range(&self, slot: usize) -> std::ops::Range<usize> {
        self.offsets[slot]..self.offsets[slot + 1]
    }

    pub fn to_vector(&self, p: &SDist) -> Vec<Rat> {
        let mut v = vec![Rat::zero(); self.len()];
        for (slot, d) in p.dists().iter().enumerate() {
            for (o, prob) in d.support() {
                v[self.position(slot, o)] = prob.clone();
            }
        }
        v
    }

    /// Builds and validates the distribution with the given coordinates.
    pub fn to_sdist(&self, v: &[Rat]) -> Result<SDist, SDistError> {
        let dists = (0..self.scenario.generators().len())
            .map(|slot| {
                let g = self.scenario.generators()[slot];
                let entries = self.range(slot).map(|i| (self.entries[i].1.clone(), v[i].clone()));
                Dist::new(self.m, self.scenario.dim(g) + 1, entries)
            })
            .collect::<Result<Vec<_>, _>>()?;
        SDist::new(Arc::clone(&self.scenario), self.m, dists)
    }
}

/// Exact affine description of the polytope. Rows read `coeffs · x + constant`
/// and are `= 0` (equalities) or `≥ 0` (inequalities).
#[derive(Clone, Debug)]
pub struct HRep {
    pub coordinates: Coordinates,
    pub equalities: Vec<Row>,
    pub inequalities: Vec<Row>,
}

impl HRep {
    pub fn num_coordinates(&self) -> usize {
        self.coordinates.len()
    }

    /// Affine dimension of the solution set (assuming it is nonempty).
    pub fn dimension(&self) -> usize {
        let n = self.num_coordinates();
        let rows: Vec<Vec<Rat>> = self.equalities.iter().map(|r| r.coeffs.clone()).collect();
        n - rank(&rows, n)
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.equalities.iter().chain(&self.inequalities).all(|r| r.holds(x))
    }

    pub fn to_system(&self) -> LinearSystem {
        let mut s = LinearSystem::free(self.num_coordinates());
        s.rows = self.equalities.iter().chain(&self.inequalities).cloned().collect();
        s
    }
}

/// Normalization per generator, face compatibility against the canonical occurrence
/// of each shared simplex, and nonnegativity.
pub fn build_hrep(x: &Arc<Scenario>, m: u32) -> HRep {
    let coords = Coordinates::new(x, m);
    let n = coords.len();
    let mut equalities = Vec::new();
    for slot in 0..x.generators().len() {
        let mut coeffs = vec![Rat::zero(); n];
        for i in coords.range(slot) {
            coeffs[i] = Rat::one();
        }
        equalities.push(Row { coeffs, constant: -Rat::one(), kind: RowKind::Eq });
    }
    for k in 0..x.len() {
        let occ = x.occurrences(k);
        if occ.len() < 2 {
            continue;
        }
        let slot_of = |g: usize| x.generator_slot(g).expect("generator");
        let first = &occ[0];
        for other in &occ[1..] {
            for y in Outcome::all(m, x.dim(k) + 1) {
                let mut coeffs = vec![Rat::zero(); n];
                for i in coords.range(slot_of(first.generator)) {
                    if coords.entries[i].1.project(&first.positions) == y {
                        coeffs[i] += Rat::one();
                    }
                }
                for i in coords.range(slot_of(other.generator)) {
                    if coords.entries[i].1.project(&other.positions) == y {
                        coeffs[i] -= &Rat::one();
                    }
                }
                equalities.push(Row { coeffs, constant: Rat::zero(), kind: RowKind::Eq });
            }
        }
    }
    let inequalities = (0..n)
        .map(|i| {
            let mut coeffs = vec![Rat::zero(); n];
            coeffs[i] = Rat::one();
            Row { coeffs, constant: Rat::zero(), kind: RowKind::Geq }
        })
        .collect();
    HRep { coordinates: coords, equalities, inequalities }
}

/// Feasibility of an affine system; see [`LinearSystem::solve`].
pub fn lp_feasible(system: &LinearSystem) -> crate::lp::LpOutcome {
    system.solve()
}

/// An affine functional `coeffs · x + constant` on polytope coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineFunctional {
    pub coeffs: Vec<Rat>,
    pub constant: Rat,
}

impl AffineFunctional {
    pub fn eval(&self, x: &[Rat]) -> Rat {
        crate::linalg::dot(&self.coeffs, x) + &self.constant
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Noncontextual,
    Contextual,
}

/// Outcome of the contextuality LP with an exact witness either way.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NoncontextualityCertificate {
    /// `theta(witness) = p`.
    Noncontextual(DetMixture),
    /// Positive on `p`, nonpositive on every deterministic distribution.
    Contextual(AffineFunctional),
}

impl NoncontextualityCertificate {
    pub fn verdict(&self) -> Verdict {
        match self {
            NoncontextualityCertificate::Noncontextual(_) => Verdict::Noncontextual,
            NoncontextualityCertificate::Contextual(_) => Verdict::Contextual,
        }
    }

    pub fn is_noncontextual(&self) -> bool {
        self.verdict() == Verdict::Noncontextual
    }
}

/// Decides whether `p` lies in the image of `Θ` by an LP over weights on
/// deterministic maps. Maps that put an outcome outside the support of `p` on
/// some generator cannot carry weight and are dropped before solving.
pub fn is_noncontextual(p: &SDist, caps: Caps) -> Result<NoncontextualityCertificate, PolytopeError> {
    let x = p.scenario();
    let m = p.m();
    let maps = enumerate_deterministic(x, m, caps.labelings)?;
    let coords = Coordinates::new(x, m);
    let target = coords.to_vector(p);

    let images: Vec<Vec<usize>> = maps
        .iter()
        .map(|phi| {
            x.generators().iter().enumerate().map(|(slot, &g)| coords.position(slot, &phi.on_simplex(x, g))).collect()
        })
        .collect();
    let kept: Vec<usize> = (0..maps.len()).filter(|&k| images[k].iter().all(|&i| target[i].is_positive())).collect();
    let rows_of: Vec<usize> = (0..coords.len()).filter(|&i| target[i].is_positive()).collect();
    let mut row_pos = vec![usize::MAX; coords.len()];
    for (r, &i) in rows_of.iter().enumerate() {
        row_pos[i] = r;
    }

    // Rows: one per support coordinate, plus normalization.
    let nrows = rows_of.len() + 1;
    let mut a = vec![vec![Rat::zero(); kept.len()]; nrows];
    for (col, &k) in kept.iter().enumerate() {
        for &i in &images[k] {
            a[row_pos[i]][col] = Rat::one();
        }
        a[nrows - 1][col] = Rat::one();
    }
    let mut b: Vec<Rat> = rows_of.iter().map(|&i| target[i].clone()).collect();
    b.push(Rat::one());

    match solve_standard(&a, &b, kept.len()) {
        StandardOutcome::Feasible(w) => {
            let entries = kept.iter().zip(w).filter(|(_, w)| !w.is_zero()).map(|(&k, w)| (maps[k].clone(), w));
            Ok(NoncontextualityCertificate::Noncontextual(DetMixture::new(entries)?))
        }
        StandardOutcome::Infeasible(y) => {
            let mut coeffs = vec![Rat::zero(); coords.len()];
            for (r, &i) in rows_of.iter().enumerate() {
                coeffs[i] = y[r].clone();
            }
            let mut f = AffineFunctional { coeffs, constant: y[nrows - 1].clone() };
            // Dropped maps may be positive under f; push them down through the
            // coordinates where p vanishes, which leaves f(p) unchanged.
            let eval_map = |f: &AffineFunctional, k: usize| -> Rat {
                images[k].iter().map(|&i| f.coeffs[i].clone()).sum::<Rat>() + &f.constant
            };
            let penalty = (0..maps.len())
                .filter(|k| kept.binary_search(k).is_err())
                .map(|k| eval_map(&f, k))
                .fold(Rat::zero(), |acc, v| if v > acc { v } else { acc });
            if penalty.is_positive() {
                for i in 0..coords.len() {
                    if target[i].is_zero() {
                        f.coeffs[i] = -penalty.clone();
                    }
                }
            }
            Ok(NoncontextualityCertificate::Contextual(f))
        }
    }
}

/// Re-checks a certificate from scratch.
pub fn verify_certificate(p: &SDist, cert: &NoncontextualityCertificate, caps: Caps) -> Result<bool, PolytopeError> {
    let x = p.scenario();
    match cert {
        NoncontextualityCertificate::Noncontextual(w) => Ok(crate::sdist::theta(x, p.m(), w)? == *p),
        NoncontextualityCertificate::Contextual(f) => {
            let coords = Coordinates::new(x, p.m());
            if f.coeffs.len() != coords.len() || !f.eval(&coords.to_vector(p)).is_positive() {
                return Ok(false);
            }
            for phi in enumerate_deterministic(x, p.m(), caps.labelings)? {
                let d = deterministic_sdist(x, &phi)?;
                if f.eval(&coords.to_vector(&d)).is_positive() {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Rank data behind a vertex decision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexReport {
    pub is_vertex: bool,
    /// Rank of the equalities together with the active nonnegativity rows.
    pub rank: usize,
    pub coordinates: usize,
    pub active_inequalities: usize,
}

/// `p` is a vertex iff the equalities and the nonnegativity rows active at `p`
/// have full rank.
pub fn is_vertex(p: &SDist) -> VertexReport {
    let coords = Coordinates::new(p.scenario(), p.m());
    let hrep = build_hrep(p.scenario(), p.m());
    let v = coords.to_vector(p);
    let support: Vec<usize> = (0..v.len()).filter(|&i| !v[i].is_zero()).collect();
    let active = v.len() - support.len();
    // Active unit rows eliminate their columns, leaving the equalities on the support.
    let restricted: Vec<Vec<Rat>> =
        hrep.equalities.iter().map(|r| support.iter().map(|&i| r.coeffs[i].clone()).collect()).collect();
    let r = active + rank(&restricted, support.len());
    VertexReport { is_vertex: r == v.len(), rank: r, coordinates: v.len(), active_inequalities: active }
}

fn face_vertices(x: &Arc<Scenario>, m: u32, support: Option<&[bool]>, caps: Caps) -> Result<Vec<SDist>, PolytopeError> {
    let hrep = build_hrep(x, m);
    let n = hrep.num_coordinates();
    let cols: Vec<usize> = match support {
        Some(s) => (0..n).filter(|&i| s[i]).collect(),
        None => (0..n).collect(),
    };
    if cols.len() > caps.coordinates {
        return Err(PolytopeError::CoordinateCap { coordinates: cols.len(), cap: caps.coordinates });
    }
    let rows: Vec<Vec<Rat>> =
        hrep.equalities.iter().map(|r| cols.iter().map(|&i| r.coeffs[i].clone()).collect()).collect();
    let rhs: Vec<Rat> = hrep.equalities.iter().map(|r| -&r.constant).collect();
    let mut out = Vec::new();
    for v in polytope_vertices(&rows, &rhs, cols.len()) {
        let mut full = vec![Rat::zero(); n];
        for (k, &i) in cols.iter().enumerate() {
            full[i] = v[k].clone();
        }
        out.push((full.clone(), hrep.coordinates.to_sdist(&full)?));
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out.into_iter().map(|(_, p)| p).collect())
}

/// All vertices of the polytope, sorted by coordinate vector.
pub fn enumerate_vertices(x: &Arc<Scenario>, m: u32, caps: Caps) -> Result<Vec<SDist>, PolytopeError> {
    face_vertices(x, m, None, caps)
}

/// Vertices `q ⪯ p`: the vertices of the face where every coordinate outside the
/// support of `p` vanishes.
pub fn vsupp(p: &SDist, caps: Caps) -> Result<Vec<SDist>, PolytopeError> {
    let coords = Coordinates::new(p.scenario(), p.m());
    let v = coords.to_vector(p);
    let support: Vec<bool> = v.iter().map(|x| !x.is_zero()).collect();
    let out = face_vertices(p.scenario(), p.m(), Some(&support), caps)?;
    debug_assert!(out.iter().all(|q| preceq(q, p).unwrap_or(false)));
    Ok(out)
}

/// Uniform mixture of a nonempty set of distributions on one scenario.
pub fn uniform_mixture(vs: &[SDist]) -> Result<SDist, SDistError> {
    let w = Rat::new(1, vs.len() as i64);
    SDist::mix(vs.iter().map(|p| (&w, p)))
}

/// Whether `vs` equals the vertex support of its uniform mixture.
pub fn is_closed_vertex_set(vs: &[SDist], caps: Caps) -> Result<bool, PolytopeError> {
    if vs.is_empty() {
        return Ok(true);
    }
    for (k, v) in vs.iter().enumerate() {
        if !is_vertex(v).is_vertex {
            return Err(PolytopeError::NotAVertex(format!("element {k}")));
        }
    }
    let coords = Coordinates::new(vs[0].scenario(), vs[0].m());
    let mixture = uniform_mixture(vs)?;
    let support: BTreeSet<Vec<Rat>> = vsupp(&mixture, caps)?.iter().map(|q| coords.to_vector(q)).collect();
    let given: BTreeSet<Vec<Rat>> = vs.iter().map(|q| coords.to_vector(q)).collect();
    Ok(support == given)
}

/// Deterministic distributions for every labeling, in labeling order.
pub fn deterministic_points(x: &Arc<Scenario>, m: u32, caps: Caps) -> Result<Vec<(DeterministicMap, SDist)>, PolytopeError> {
    enumerate_deterministic(x, m, caps.labelings)?
        .into_iter()
        .map(|phi| {
            let d = deterministic_sdist(x, &phi)?;
            Ok((phi, d))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::LpOutcome;
    use crate::scenario::{build_cycle, build_line, cone};
    use std::collections::BTreeMap;

    fn chsh() -> Arc<Scenario> {
        Arc::new(build_cycle(4).unwrap())
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
    fn hrep_dimensions() {
        let x = chsh();
        let h = build_hrep(&x, 2);
        assert_eq!(h.num_coordinates(), 16);
        assert_eq!(h.dimension(), 8);
        let edge = Arc::new(build_line(1).unwrap());
        let h = build_hrep(&edge, 2);
        assert_eq!((h.num_coordinates(), h.dimension()), (4, 3));
        let c = cone(&x, "c").unwrap();
        let h = build_hrep(&c.scenario, 2);
        assert_eq!((h.num_coordinates(), h.dimension()), (32, 17));
    }

    #[test]
    fn hrep_membership_matches_validation() {
        let x = chsh();
        let h = build_hrep(&x, 2);
        assert!(h.contains(&h.coordinates.to_vector(&pr_box(&x))));
        let mut v = h.coordinates.to_vector(&pr_box(&x));
        v.swap(0, 1);
        assert!(!h.contains(&v));
        assert!(h.coordinates.to_sdist(&v).is_err());
    }

    #[test]
    fn deterministic_completion_exists() {
        let x = chsh();
        let h = build_hrep(&x, 2);
        let mut s = h.to_system();
        for (i, &val) in [1i64, 0, 0, 0].iter().enumerate() {
            let mut coeffs = vec![Rat::zero(); 16];
            coeffs[i] = Rat::one();
            s.push(coeffs, Rat::from_int(-val), RowKind::Eq);
        }
        let LpOutcome::Feasible(p) = s.solve() else { panic!("expected feasible") };
        assert!(s.is_satisfied_by(&p));
    }

    #[test]
    fn contextuality_examples() {
        let x = chsh();
        let caps = Caps::default();
        let pr = pr_box(&x);
        let cert = is_noncontextual(&pr, caps).unwrap();
        assert_eq!(cert.verdict(), Verdict::Contextual);
        assert!(verify_certificate(&pr, &cert, caps).unwrap());

        let u = SDist::uniform(Arc::clone(&x), 2);
        let cert = is_noncontextual(&u, caps).unwrap();
        assert!(cert.is_noncontextual());
        assert!(verify_certificate(&u, &cert, caps).unwrap());

        // still contextual, and some labelings are dropped before solving
        let zero = deterministic_sdist(&x, &DeterministicMap::zero(2, 4)).unwrap();
        let (a, b) = (Rat::new(1, 4), Rat::new(3, 4));
        let mix = SDist::mix([(&a, &zero), (&b, &pr)]).unwrap();
        let cert = is_noncontextual(&mix, caps).unwrap();
        assert_eq!(cert.verdict(), Verdict::Contextual);
        assert!(verify_certificate(&mix, &cert, caps).unwrap());
    }

    #[test]
    fn vertex_examples() {
        let x = chsh();
        let zero = deterministic_sdist(&x, &DeterministicMap::zero(2, 4)).unwrap();
        assert!(is_vertex(&zero).is_vertex);
        let pr = pr_box(&x);
        let report = is_vertex(&pr);
        assert!(report.is_vertex);
        assert_eq!(report.rank, 16);
        let half = Rat::new(1, 2);
        assert!(!is_vertex(&SDist::mix([(&half, &zero), (&half, &pr)]).unwrap()).is_vertex);
    }

    #[test]
    fn chsh_has_24_vertices() {
        let x = chsh();
        let vs = enumerate_vertices(&x, 2, Caps::default()).unwrap();
        assert_eq!(vs.len(), 24);
        assert_eq!(vs.iter().filter(|v| v.is_deterministic()).count(), 16);
        assert!(vs.contains(&pr_box(&x)));
        let edge = Arc::new(build_line(1).unwrap());
        assert_eq!(enumerate_vertices(&edge, 2, Caps::default()).unwrap().len(), 4);
    }

    #[test]
    fn vsupp_examples() {
        let x = chsh();
        let caps = Caps::default();
        let zero = deterministic_sdist(&x, &DeterministicMap::zero(2, 4)).unwrap();
        assert_eq!(vsupp(&zero, caps).unwrap(), vec![zero.clone()]);
        assert_eq!(vsupp(&SDist::uniform(Arc::clone(&x), 2), caps).unwrap().len(), 24);
        assert!(is_closed_vertex_set(&[zero], caps).unwrap());
        let cap = Caps { coordinates: 10, ..caps };
        assert!(matches!(
            enumerate_vertices(&x, 2, cap),
            Err(PolytopeError::CoordinateCap { coordinates: 16, cap: 10 })
        ));
    }

    #[test]
    fn line_remark_family_is_not_closed() {
        // φ^{i,j} with σ1 = (i,j), σ2 = (j,i), σ3 = (i,j); labels (i, j, i, j).
        let line = Arc::new(build_line(3).unwrap());
        let caps = Caps::default();
        let det = |labels: Vec<u32>| deterministic_sdist(&line, &DeterministicMap::new(2, labels).unwrap()).unwrap();
        let family = vec![det(vec![0, 0, 0, 0]), det(vec![1, 0, 1, 0])];
        assert!(!is_closed_vertex_set(&family, caps).unwrap());
        let witness = det(vec![0, 0, 1, 0]);
        let support = vsupp(&uniform_mixture(&family).unwrap(), caps).unwrap();
        assert!(support.contains(&witness));
    }
}
