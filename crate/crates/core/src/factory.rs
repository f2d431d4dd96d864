//! Complete collections on short lines, the maps `ψ^h`, and the two
//! constructions of contextual vertices on suspensions.
//!
//! Both constructions recheck every hypothesis and certify their output (rank
//! test plus both contextuality LPs) before returning it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{Dist, Outcome, Part};
use crate::join::{suspension_assemble, suspension_noncontextuality_lp, JoinError, JoinPoint, SuspensionPoint};
use crate::linalg::solve_affine;
use crate::polytope::{
    is_closed_vertex_set, is_noncontextual, is_vertex, AffineFunctional, Caps, Coordinates,
    NoncontextualityCertificate, PolytopeError, VertexReport,
};
use crate::rational::Rat;
use crate::scenario::{build_cycle, build_line, is_connected, suspension, LineSpec, Scenario, ScenarioError, Suspension};
use crate::sdist::{act, deterministic_sdist, restrict, DeterministicMap, SDist, SDistError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sigma1Entry {
    pub i: u32,
    pub j: u32,
    pub value: [u32; 2],
}

/// Maps `φ^{i,j}` on `L^(3)` with `φ_{σ2} = (i,j)Aᵀ`, `φ_{σ3} = (i,j)Bᵀ` and
/// `φ_{σ1}` read from a table, together with the shift `h` used by `ψ^h`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetCollection {
    pub m: u32,
    pub a: [[u32; 2]; 2],
    pub b: [[u32; 2]; 2],
    pub h: u32,
    pub sigma1: Vec<Sigma1Entry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CollectionFailure {
    #[error("modulus must be at least 2")]
    Modulus,
    #[error("entry {0} is not reduced mod m")]
    EntryRange(String),
    #[error("sigma1 table must list each (i,j) exactly once; problem at ({0},{1})")]
    Table(u32, u32),
    #[error("condition (1): sigma1 values do not cover Z_m^2")]
    NotSurjective,
    #[error("condition (2): sigma2/sigma3 values are not given by (i,j)A^T and (i,j)B^T")]
    NotLinear,
    #[error("phi^({i},{j}) is not a labeling: edges {left} and {right} disagree on their shared vertex")]
    LabelMismatch { i: u32, j: u32, left: usize, right: usize },
    #[error("condition (3): gcd(det A, m) = {0}")]
    DetA(u64),
    #[error("condition (3): gcd(det B, m) = {0}")]
    DetB(u64),
    #[error("condition (3): gcd(a12(b21 - b11 h) - a11(b22 - b12 h), m) = {0}")]
    Mixed(u64),
    #[error("collection has {found} members, expected {expected}")]
    Count { expected: usize, found: usize },
    #[error("edge {edge} of member {j} is not of the form S^e")]
    NotAverage { j: usize, edge: usize },
    #[error("edge {0}: exponents do not form a permutation of Z_m")]
    NotPermutation(usize),
    #[error("S^{0} does not have uniform vertex marginals")]
    Marginal(i64),
}

fn modm(v: i64, m: u32) -> u32 {
    v.rem_euclid(m as i64) as u32
}

fn gcd_mod(v: i64, m: u32) -> u64 {
    (modm(v, m) as u64).gcd(&(m as u64))
}

impl DetCollection {
    /// `(σ1, σ2, σ3)` values of `φ^{i,j}`.
    pub fn edge_values(&self, i: u32, j: u32) -> Option<[[u32; 2]; 3]> {
        let s1 = self.sigma1.iter().find(|e| e.i == i && e.j == j)?.value;
        let lin = |mat: &[[u32; 2]; 2]| {
            let (i, j) = (i as i64, j as i64);
            [
                modm(mat[0][0] as i64 * i + mat[0][1] as i64 * j, self.m),
                modm(mat[1][0] as i64 * i + mat[1][1] as i64 * j, self.m),
            ]
        };
        Some([s1, lin(&self.a), lin(&self.b)])
    }

    /// Labelings of `L^(3)` (vertex order `v1..v4`) in `(i, j)` row-major order.
    pub fn maps(&self) -> Vec<((u32, u32), DeterministicMap)> {
        let mut out = Vec::new();
        for i in 0..self.m {
            for j in 0..self.m {
                if let Some([s1, _, s3]) = self.edge_values(i, j) {
                    let labels = vec![s1[0], s1[1], s3[0], s3[1]];
                    out.push(((i, j), DeterministicMap::new(self.m, labels).expect("reduced")));
                }
            }
        }
        out
    }

    fn with_table(m: u32, a: [[u32; 2]; 2], b: [[u32; 2]; 2], h: u32, f: impl Fn(u32, u32) -> [u32; 2]) -> Self {
        let sigma1 = (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| Sigma1Entry { i, j, value: f(i, j) }).collect();
        DetCollection { m, a, b, h, sigma1 }
    }

    /// `m = 2`: `σ1, σ3 ↦ (i, i+j)`, `σ2 ↦ (i+j, i)`, with `h = 1`.
    pub fn three_way() -> Self {
        DetCollection::with_table(2, [[1, 1], [1, 0]], [[1, 0], [1, 1]], 1, |i, j| [i, (i + j) % 2])
    }

    /// Odd `m`: `σ1 ↦ (i, i+j)`, `σ2 ↦ (i+j, i+2j)`, `σ3 ↦ (i+2j, i+3j)`, with `h = 0`.
    pub fn arithmetic(m: u32) -> Self {
        let r = |v: u32| v % m;
        DetCollection::with_table(m, [[1, 1], [1, r(2)]], [[1, r(2)], [1, r(3)]], 0, move |i, j| [i, (i + j) % m])
    }

    /// `m = 2`: `σ1, σ3 ↦ (i, j)`, `σ2 ↦ (j, i)`, with `h = 1`. Complete, but its
    /// `j = 0` pair is not a closed set of vertices.
    pub fn swap() -> Self {
        DetCollection::with_table(2, [[0, 1], [1, 0]], [[1, 0], [0, 1]], 1, |i, j| [i, j])
    }

    /// Infers `A`, `B` from the maps at `(1,0)` and `(0,1)`; linearity is checked by validation.
    pub fn from_edge_values(m: u32, h: u32, values: &BTreeMap<(u32, u32), [[u32; 2]; 3]>) -> Option<Self> {
        let e10 = values.get(&(1 % m, 0))?;
        let e01 = values.get(&(0, 1 % m))?;
        let a = [[e10[1][0], e01[1][0]], [e10[1][1], e01[1][1]]];
        let b = [[e10[2][0], e01[2][0]], [e10[2][1], e01[2][1]]];
        let sigma1 = values.iter().map(|(&(i, j), v)| Sigma1Entry { i, j, value: v[0] }).collect();
        let c = DetCollection { m, a, b, h, sigma1 };
        for (&(i, j), v) in values {
            if c.edge_values(i, j).as_ref() != Some(v) {
                return None;
            }
        }
        Some(c)
    }
}

/// Checks conditions (1)–(3) and that every `φ^{i,j}` is a labeling of `L^(3)`.
pub fn validate_det_collection(c: &DetCollection) -> Result<(), Vec<CollectionFailure>> {
    let m = c.m;
    if m < 2 {
        return Err(vec![CollectionFailure::Modulus]);
    }
    let mut failures = Vec::new();
    let in_range = |v: u32| v < m;
    for (name, mat) in [("a", &c.a), ("b", &c.b)] {
        if !mat.iter().flatten().all(|&v| in_range(v)) {
            failures.push(CollectionFailure::EntryRange(name.into()));
        }
    }
    if !in_range(c.h) {
        failures.push(CollectionFailure::EntryRange("h".into()));
    }
    let mut seen = BTreeSet::new();
    for e in &c.sigma1 {
        if !in_range(e.i) || !in_range(e.j) || !seen.insert((e.i, e.j)) {
            failures.push(CollectionFailure::Table(e.i, e.j));
        }
        if !e.value.iter().all(|&v| in_range(v)) {
            failures.push(CollectionFailure::EntryRange(format!("sigma1({},{})", e.i, e.j)));
        }
    }
    if seen.len() != (m * m) as usize && failures.is_empty() {
        let missing = (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).find(|k| !seen.contains(k)).unwrap_or((0, 0));
        failures.push(CollectionFailure::Table(missing.0, missing.1));
    }
    if !failures.is_empty() {
        return Err(failures);
    }
    let values: BTreeSet<[u32; 2]> = c.sigma1.iter().map(|e| e.value).collect();
    if values.len() != (m * m) as usize {
        failures.push(CollectionFailure::NotSurjective);
    }
    for i in 0..m {
        for j in 0..m {
            let [s1, s2, s3] = c.edge_values(i, j).expect("table complete");
            if s1[1] != s2[0] {
                failures.push(CollectionFailure::LabelMismatch { i, j, left: 1, right: 2 });
            }
            if s2[1] != s3[0] {
                failures.push(CollectionFailure::LabelMismatch { i, j, left: 2, right: 3 });
            }
        }
    }
    let [[a11, a12], [a21, a22]] = c.a.map(|r| r.map(|v| v as i64));
    let [[b11, b12], [b21, b22]] = c.b.map(|r| r.map(|v| v as i64));
    let h = c.h as i64;
    let g = gcd_mod(a11 * a22 - a12 * a21, m);
    if g != 1 {
        failures.push(CollectionFailure::DetA(g));
    }
    let g = gcd_mod(b11 * b22 - b12 * b21, m);
    if g != 1 {
        failures.push(CollectionFailure::DetB(g));
    }
    let g = gcd_mod(a12 * (b21 - b11 * h) - a11 * (b22 - b12 * h), m);
    if g != 1 {
        failures.push(CollectionFailure::Mixed(g));
    }
    if failures.is_empty() { Ok(()) } else { Err(failures) }
}

/// `q^j_{σ_k} = S^{e(j,k)}` on `L^(2)`; `exponents[j] = [e(j,1), e(j,2)]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvgCollection {
    pub m: u32,
    pub exponents: Vec<[i64; 2]>,
}

impl AvgCollection {
    pub fn diagonal(m: u32) -> Self {
        AvgCollection { m, exponents: (0..m as i64).map(|j| [j, j]).collect() }
    }

    /// All `(m!)^2` collections, in lexicographic order of the two permutations.
    pub fn all(m: u32) -> Vec<Self> {
        let perms = permutations(m as usize);
        let mut out = Vec::new();
        for p1 in &perms {
            for p2 in &perms {
                let exponents = (0..m as usize).map(|j| [p1[j] as i64, p2[j] as i64]).collect();
                out.push(AvgCollection { m, exponents });
            }
        }
        out
    }

    /// The members as distributions on `L^(2)`.
    pub fn family(&self, line: &Arc<Scenario>) -> Vec<SDist> {
        self.exponents
            .iter()
            .map(|e| {
                let dists = e.iter().map(|&k| Dist::average_power(self.m, k)).collect();
                SDist::new(Arc::clone(line), self.m, dists).expect("average distributions glue on L^(2)")
            })
            .collect()
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

pub fn validate_avg_collection(c: &AvgCollection) -> Result<(), Vec<CollectionFailure>> {
    let m = c.m;
    if m < 2 {
        return Err(vec![CollectionFailure::Modulus]);
    }
    let mut failures = Vec::new();
    if c.exponents.len() != m as usize {
        failures.push(CollectionFailure::Count { expected: m as usize, found: c.exponents.len() });
        return Err(failures);
    }
    for edge in 0..2 {
        let values: BTreeSet<u32> = c.exponents.iter().map(|e| modm(e[edge], m)).collect();
        if values.len() != m as usize {
            failures.push(CollectionFailure::NotPermutation(edge + 1));
        }
    }
    for e in c.exponents.iter().flatten() {
        let s = Dist::average_power(m, *e);
        let uniform = Dist::uniform(m, 1);
        if s.marginalize(0).ok().as_ref() != Some(&uniform) || s.marginalize(1).ok().as_ref() != Some(&uniform) {
            failures.push(CollectionFailure::Marginal(*e));
        }
    }
    if failures.is_empty() { Ok(()) } else { Err(failures) }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FactoryError {
    #[error("line must have {expected} edges, got {found}")]
    LineLength { expected: usize, found: usize },
    #[error("line must satisfy d_0(s_k) = d_1(s_(k+1)) for consecutive edges")]
    LineOrientation,
    #[error("extension labels vertex {vertex} with {found}, but the line forces {forced}")]
    InconsistentExtension { vertex: String, forced: u32, found: u32 },
    #[error("no label for vertex {0}")]
    MissingLabel(String),
    #[error("construction refused: {}", .0.iter().map(|h| h.to_string()).collect::<Vec<_>>().join("; "))]
    Hypotheses(Vec<Hypothesis>),
    #[error("output failed certification: {0}")]
    Certification(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    SDist(#[from] SDistError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Join(#[from] JoinError),
}

/// A failed hypothesis of a vertex construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Hypothesis {
    Connected,
    InputCount { expected: usize, found: usize },
    Modulus,
    IsVertex(String),
    ClosedSet(u32),
    DeterministicOnLine(String),
    Collection(Vec<CollectionFailure>),
    PsiOnLine,
    PsiInvariance,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hypothesis::Connected => write!(f, "base scenario must be connected"),
            Hypothesis::InputCount { expected, found } => write!(f, "expected {expected} input distributions, got {found}"),
            Hypothesis::Modulus => write!(f, "inputs disagree on the modulus or scenario"),
            Hypothesis::IsVertex(which) => write!(f, "{which} is not a vertex"),
            Hypothesis::ClosedSet(j) => write!(f, "closed-set hypothesis fails for j = {j}"),
            Hypothesis::DeterministicOnLine(which) => write!(f, "{which} is not deterministic on the line"),
            Hypothesis::Collection(fs) => write!(
                f,
                "restrictions to the line do not form a complete collection: {}",
                fs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ")
            ),
            Hypothesis::PsiOnLine => write!(f, "psi does not restrict to the required map on the line"),
            Hypothesis::PsiInvariance => write!(f, "psi-invariance of the uniform mixture fails"),
        }
    }
}

/// Line vertices `u_0..u_n` for a standard line of `n` edges.
fn standard_line_vertices(x: &Scenario, line: &LineSpec, n: usize) -> Result<Vec<usize>, FactoryError> {
    if line.edges.len() != n {
        return Err(FactoryError::LineLength { expected: n, found: line.edges.len() });
    }
    if !line.is_standard() {
        return Err(FactoryError::LineOrientation);
    }
    Ok(line.resolve(x)?)
}

fn forced_line_labels(n: usize, h: u32) -> Result<Vec<u32>, FactoryError> {
    match n {
        3 => Ok(vec![0, 0, 1, h]),
        2 => Ok(vec![0, 0, 1]),
        _ => Err(FactoryError::LineLength { expected: 3, found: n }),
    }
}

/// `ψ` on `x` restricting to `ψ^h` on a line of three edges (or to
/// `σ1 ↦ (0,0), σ2 ↦ (0,1)` on a line of two edges), with the remaining vertex
/// labels taken from `extension`.
pub fn psi_map(
    x: &Scenario,
    line: &LineSpec,
    m: u32,
    h: u32,
    extension: &BTreeMap<String, u32>,
) -> Result<DeterministicMap, FactoryError> {
    let n = line.edges.len();
    let forced = forced_line_labels(n, h % m)?;
    let verts = standard_line_vertices(x, line, n)?;
    let mut labels = BTreeMap::new();
    for (&v, &a) in verts.iter().zip(&forced) {
        labels.insert(x.id(v).to_string(), a);
    }
    for (id, &a) in extension {
        match labels.get(id) {
            Some(&f) if f != a % m => {
                return Err(FactoryError::InconsistentExtension { vertex: id.clone(), forced: f, found: a })
            }
            Some(_) => {}
            None => {
                labels.insert(id.clone(), a % m);
            }
        }
    }
    for &v in x.vertices() {
        if !labels.contains_key(x.id(v)) {
            return Err(FactoryError::MissingLabel(x.id(v).to_string()));
        }
    }
    Ok(DeterministicMap::from_labels(x, m, &labels)?)
}

/// Exact evidence that a constructed point is a contextual vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certification {
    pub vertex: VertexReport,
    /// Separating functional from the contextuality LP on the suspension.
    pub functional: AffineFunctional,
    /// Verdict of the two-sided LP over mixtures on the base (false = contextual).
    pub suspension_lp_noncontextual: bool,
}

#[derive(Clone, Debug)]
pub struct ConstructedVertex {
    pub suspension: Suspension,
    pub point: SuspensionPoint,
    pub sdist: SDist,
    pub certification: Certification,
}

/// Inferred collection data for the first construction.
#[derive(Clone, Debug)]
pub struct DetConstruction {
    pub vertex: ConstructedVertex,
    pub collection: DetCollection,
}

fn certify(s: &Suspension, sp: &SuspensionPoint, m: u32, caps: Caps) -> Result<ConstructedVertex, FactoryError> {
    let p = suspension_assemble(s, sp, m)?;
    let vertex = is_vertex(&p);
    if !vertex.is_vertex {
        return Err(FactoryError::Certification(format!("rank {} of {}", vertex.rank, vertex.coordinates)));
    }
    let functional = match is_noncontextual(&p, caps)? {
        NoncontextualityCertificate::Contextual(f) => f,
        NoncontextualityCertificate::Noncontextual(_) => {
            return Err(FactoryError::Certification("point is noncontextual".into()))
        }
    };
    let lp = suspension_noncontextuality_lp(s, sp, m, caps)?;
    if lp.noncontextual {
        return Err(FactoryError::Certification("suspension LP found mixtures".into()));
    }
    Ok(ConstructedVertex {
        suspension: s.clone(),
        point: sp.clone(),
        sdist: p,
        certification: Certification { vertex, functional, suspension_lp_noncontextual: false },
    })
}

fn uniform_join(m: u32, comps: Vec<SDist>) -> JoinPoint {
    let w = Rat::new(1, m as i64);
    JoinPoint { parts: comps.into_iter().map(|c| Part { weight: w.clone(), component: Some(c) }).collect() }
}

fn mixture_uniform(items: &[&SDist]) -> Result<SDist, SDistError> {
    let w = Rat::new(1, items.len() as i64);
    SDist::mix(items.iter().map(|p| (&w, *p)))
}

fn same_setup(x: &Arc<Scenario>, m: u32, items: &[&SDist]) -> bool {
    items.iter().all(|p| p.m() == m && **p.scenario() == **x)
}

/// First construction. `q[i][j]` is `q^{i,j}`; `line` is a standard `L^(3)` in `x`.
pub fn build_suspension_vertex_det(
    x: &Arc<Scenario>,
    line: &LineSpec,
    q: &[Vec<SDist>],
    psi: &DeterministicMap,
    caps: Caps,
) -> Result<DetConstruction, FactoryError> {
    let m = psi.m();
    let verts = standard_line_vertices(x, line, 3)?;
    let mut failed = Vec::new();
    if !is_connected(x)? {
        failed.push(Hypothesis::Connected);
    }
    let count: usize = q.iter().map(Vec::len).sum();
    if q.len() != m as usize || q.iter().any(|row| row.len() != m as usize) {
        return Err(FactoryError::Hypotheses(vec![Hypothesis::InputCount { expected: (m * m) as usize, found: count }]));
    }
    let all: Vec<&SDist> = q.iter().flatten().collect();
    if !same_setup(x, m, &all) {
        return Err(FactoryError::Hypotheses(vec![Hypothesis::Modulus]));
    }
    for (i, row) in q.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            if !is_vertex(p).is_vertex {
                failed.push(Hypothesis::IsVertex(format!("q^({i},{j})")));
            }
        }
    }
    for j in 0..m as usize {
        let family: Vec<SDist> = q.iter().map(|row| row[j].clone()).collect();
        let mut distinct: Vec<SDist> = Vec::new();
        for p in family {
            if !distinct.contains(&p) {
                distinct.push(p);
            }
        }
        if distinct.iter().all(|p| is_vertex(p).is_vertex) && !is_closed_vertex_set(&distinct, caps)? {
            failed.push(Hypothesis::ClosedSet(j as u32));
        }
    }

    // Restrictions to the line must be deterministic and form a complete collection.
    let lsc = Arc::new(x.closure("line", &line.edges.iter().map(String::as_str).collect::<Vec<_>>())?);
    let psi_line: Vec<u32> = verts.iter().map(|&v| psi.label(x, v)).collect();
    let h = psi_line[3];
    let mut values = BTreeMap::new();
    for (i, row) in q.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            let r = restrict(p, &lsc)?;
            let mut edges = [[0u32; 2]; 3];
            let mut deterministic = true;
            for (k, e) in line.edges.iter().enumerate() {
                let d = r.generator_dist(e).expect("line edge");
                match d.support().next() {
                    Some((o, _)) if d.is_delta() => edges[k] = [o.0[0], o.0[1]],
                    _ => deterministic = false,
                }
            }
            if !deterministic {
                failed.push(Hypothesis::DeterministicOnLine(format!("q^({i},{j})")));
            }
            values.insert((i as u32, j as u32), edges);
        }
    }
    let collection = DetCollection::from_edge_values(m, h, &values);
    match &collection {
        Some(c) => {
            if let Err(fs) = validate_det_collection(c) {
                failed.push(Hypothesis::Collection(fs));
            }
        }
        None => failed.push(Hypothesis::Collection(vec![CollectionFailure::NotLinear])),
    }
    if psi_line[..3] != [0, 0, 1] {
        failed.push(Hypothesis::PsiOnLine);
    }
    let grand = mixture_uniform(&all)?;
    if act(psi, &grand)? != grand {
        failed.push(Hypothesis::PsiInvariance);
    }
    if !failed.is_empty() {
        return Err(FactoryError::Hypotheses(failed));
    }

    let s = suspension(x)?;
    let p: Vec<SDist> = (0..m as usize)
        .map(|j| mixture_uniform(&q.iter().map(|row| &row[j]).collect::<Vec<_>>()))
        .collect::<Result<_, _>>()?;
    let down = p.iter().map(|pj| act(psi, pj)).collect::<Result<Vec<_>, _>>()?;
    let sp = SuspensionPoint { up: uniform_join(m, p), down: uniform_join(m, down) };
    let vertex = certify(&s, &sp, m, caps)?;
    Ok(DetConstruction { vertex, collection: collection.expect("validated") })
}

/// Second construction. `p[j]` is `p^j`; `line` is a standard `L^(2)` in `x`.
pub fn build_suspension_vertex_avg(
    x: &Arc<Scenario>,
    line: &LineSpec,
    p: &[SDist],
    psi: &DeterministicMap,
    caps: Caps,
) -> Result<(ConstructedVertex, AvgCollection), FactoryError> {
    let m = psi.m();
    let verts = standard_line_vertices(x, line, 2)?;
    let mut failed = Vec::new();
    if !is_connected(x)? {
        failed.push(Hypothesis::Connected);
    }
    if p.len() != m as usize {
        return Err(FactoryError::Hypotheses(vec![Hypothesis::InputCount { expected: m as usize, found: p.len() }]));
    }
    let all: Vec<&SDist> = p.iter().collect();
    if !same_setup(x, m, &all) {
        return Err(FactoryError::Hypotheses(vec![Hypothesis::Modulus]));
    }
    for (j, pj) in p.iter().enumerate() {
        if !is_vertex(pj).is_vertex {
            failed.push(Hypothesis::IsVertex(format!("p^{j}")));
        }
    }
    let lsc = Arc::new(x.closure("line", &line.edges.iter().map(String::as_str).collect::<Vec<_>>())?);
    let mut exponents = Vec::new();
    let mut shape_failures = Vec::new();
    for (j, pj) in p.iter().enumerate() {
        let r = restrict(pj, &lsc)?;
        let mut e = [0i64; 2];
        for (k, id) in line.edges.iter().enumerate() {
            let d = r.generator_dist(id).expect("line edge");
            match (0..m as i64).find(|&s| Dist::average_power(m, s) == *d) {
                Some(s) => e[k] = s,
                None => shape_failures.push(CollectionFailure::NotAverage { j, edge: k + 1 }),
            }
        }
        exponents.push(e);
    }
    let collection = AvgCollection { m, exponents };
    if !shape_failures.is_empty() {
        failed.push(Hypothesis::Collection(shape_failures));
    } else if let Err(fs) = validate_avg_collection(&collection) {
        failed.push(Hypothesis::Collection(fs));
    }
    let psi_line: Vec<u32> = verts.iter().map(|&v| psi.label(x, v)).collect();
    if psi_line != [0, 0, 1] {
        failed.push(Hypothesis::PsiOnLine);
    }
    let grand = mixture_uniform(&all)?;
    if act(psi, &grand)? != grand {
        failed.push(Hypothesis::PsiInvariance);
    }
    if !failed.is_empty() {
        return Err(FactoryError::Hypotheses(failed));
    }

    let s = suspension(x)?;
    let down = p.iter().map(|pj| act(psi, pj)).collect::<Result<Vec<_>, _>>()?;
    let sp = SuspensionPoint { up: uniform_join(m, p.to_vec()), down: uniform_join(m, down) };
    Ok((certify(&s, &sp, m, caps)?, collection))
}

/// Solution set of `Σ λ_k f_k = Σ μ_k ψ·f_k`, `Σ λ = Σ μ = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub unknowns: usize,
    pub nullspace_dimension: usize,
    pub unique: bool,
    /// All weights equal `1/K`.
    pub uniform: bool,
    /// `λ` followed by `μ`, when unique.
    pub solution: Option<Vec<Rat>>,
    pub consistent: bool,
}

pub fn collection_uniqueness_solve(family: &[SDist], psi: &DeterministicMap) -> Result<UniquenessReport, FactoryError> {
    let k = family.len();
    assert!(k > 0, "empty family");
    let coords = Coordinates::new(family[0].scenario(), family[0].m());
    let left: Vec<Vec<Rat>> = family.iter().map(|f| coords.to_vector(f)).collect();
    let right: Vec<Vec<Rat>> =
        family.iter().map(|f| act(psi, f).map(|g| coords.to_vector(&g))).collect::<Result<_, _>>()?;
    let n = 2 * k;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for c in 0..coords.len() {
        let mut row = Vec::with_capacity(n);
        row.extend(left.iter().map(|v| v[c].clone()));
        row.extend(right.iter().map(|v| -&v[c]));
        rows.push(row);
        rhs.push(Rat::zero());
    }
    for side in 0..2 {
        rows.push((0..n).map(|t| if t / k == side { Rat::one() } else { Rat::zero() }).collect());
        rhs.push(Rat::one());
    }
    let Some((x0, kernel)) = solve_affine(&rows, &rhs, n) else {
        return Ok(UniquenessReport {
            unknowns: n,
            nullspace_dimension: 0,
            unique: false,
            uniform: false,
            solution: None,
            consistent: false,
        });
    };
    let unique = kernel.is_empty();
    let target = Rat::new(1, k as i64);
    let uniform = unique && x0.iter().all(|v| *v == target);
    Ok(UniquenessReport {
        unknowns: n,
        nullspace_dimension: kernel.len(),
        unique,
        uniform,
        solution: unique.then_some(x0),
        consistent: true,
    })
}

/// Uniqueness for a deterministic collection with `ψ^h`, on `L^(3)`.
pub fn det_collection_uniqueness(c: &DetCollection) -> Result<UniquenessReport, FactoryError> {
    let line = Arc::new(build_line(3)?);
    let family = c
        .maps()
        .into_iter()
        .map(|(_, phi)| deterministic_sdist(&line, &phi))
        .collect::<Result<Vec<_>, _>>()?;
    let psi = DeterministicMap::new(c.m, vec![0, 0, 1, c.h % c.m])?;
    collection_uniqueness_solve(&family, &psi)
}

/// Uniqueness for an average collection with `σ1 ↦ (0,0), σ2 ↦ (0,1)`, on `L^(2)`.
pub fn avg_collection_uniqueness(c: &AvgCollection) -> Result<UniquenessReport, FactoryError> {
    let line = Arc::new(build_line(2)?);
    let psi = DeterministicMap::new(c.m, vec![0, 0, 1])?;
    collection_uniqueness_solve(&c.family(&line), &psi)
}

/// Outcome on `Z_m^2` helper for tables.
pub fn pair(a: u32, b: u32) -> Outcome {
    Outcome(vec![a, b])
}

/// Inputs of the first construction.
#[derive(Clone, Debug)]
pub struct DetInputs {
    pub x: Arc<Scenario>,
    pub line: LineSpec,
    pub q: Vec<Vec<SDist>>,
    pub psi: DeterministicMap,
}

/// Inputs of the second construction.
#[derive(Clone, Debug)]
pub struct AvgInputs {
    pub x: Arc<Scenario>,
    pub line: LineSpec,
    pub p: Vec<SDist>,
    pub psi: DeterministicMap,
}

fn cycle_labels(x: &Arc<Scenario>, labels: [u32; 4]) -> SDist {
    let phi = DeterministicMap::new(2, labels.to_vec()).expect("binary labels");
    deterministic_sdist(x, &phi).expect("labeling")
}

/// `q^{i,j}` on the CHSH scenario with labels `(i, i+j, i, i+j)` and `ψ = (0,0,1,1)`.
pub fn three_way_inputs() -> DetInputs {
    let x = Arc::new(build_cycle(4).expect("cycle"));
    let q = (0..2u32)
        .map(|i| (0..2u32).map(|j| cycle_labels(&x, [i, (i + j) % 2, i, (i + j) % 2])).collect())
        .collect();
    let psi = DeterministicMap::new(2, vec![0, 0, 1, 1]).expect("binary labels");
    DetInputs { x, line: LineSpec::standard(&["s1", "s2", "s3"]), q, psi }
}

/// `q^{i,j} = δ^{φ^{i,j}}` on `L^(3)` for a deterministic collection, with `ψ = ψ^h`.
pub fn pure_line_inputs(c: &DetCollection) -> DetInputs {
    let x = Arc::new(build_line(3).expect("line"));
    let maps: BTreeMap<(u32, u32), DeterministicMap> = c.maps().into_iter().collect();
    let q = (0..c.m)
        .map(|i| (0..c.m).map(|j| deterministic_sdist(&x, &maps[&(i, j)]).expect("labeling")).collect())
        .collect();
    let psi = DeterministicMap::new(c.m, vec![0, 0, 1, c.h % c.m]).expect("reduced");
    DetInputs { x, line: LineSpec::standard(&["s1", "s2", "s3"]), q, psi }
}

/// Two PR boxes on the CHSH scenario: `p^0` is `p+` except `p-` on `σ3`, `p^1` the opposite.
pub fn pr_class2_inputs() -> AvgInputs {
    let x = Arc::new(build_cycle(4).expect("cycle"));
    let p = (0..2i64)
        .map(|j| {
            let dists = (0..4)
                .map(|k| Dist::average_power(2, if k == 2 { 1 - j } else { j }))
                .collect();
            SDist::new(Arc::clone(&x), 2, dists).expect("PR box")
        })
        .collect();
    let psi = DeterministicMap::new(2, vec![0, 0, 1, 1]).expect("binary labels");
    AvgInputs { x, line: LineSpec::standard(&["s1", "s2"]), p, psi }
}

/// `p^j = (S^j, S^j)` on `L^(2)`.
pub fn average_line_inputs(m: u32) -> AvgInputs {
    let x = Arc::new(build_line(2).expect("line"));
    let p = AvgCollection::diagonal(m).family(&x);
    let psi = DeterministicMap::new(m, vec![0, 0, 1]).expect("reduced");
    AvgInputs { x, line: LineSpec::standard(&["s1", "s2"]), p, psi }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_det_collections_validate() {
        assert_eq!(validate_det_collection(&DetCollection::three_way()), Ok(()));
        assert_eq!(validate_det_collection(&DetCollection::arithmetic(3)), Ok(()));
        assert_eq!(validate_det_collection(&DetCollection::arithmetic(5)), Ok(()));
        assert_eq!(validate_det_collection(&DetCollection::swap()), Ok(()));
        let mut bad = DetCollection::swap();
        bad.h = 0;
        assert_eq!(validate_det_collection(&bad), Err(vec![CollectionFailure::Mixed(2)]));
    }

    #[test]
    fn even_modulus_breaks_condition_three() {
        let c = DetCollection::arithmetic(4);
        let err = validate_det_collection(&c).unwrap_err();
        assert!(err.contains(&CollectionFailure::Mixed(2)));
    }

    #[test]
    fn table_problems_reported() {
        let mut c = DetCollection::three_way();
        c.sigma1[1].value = c.sigma1[0].value;
        let err = validate_det_collection(&c).unwrap_err();
        assert!(err.contains(&CollectionFailure::NotSurjective));
        let mut c = DetCollection::three_way();
        c.sigma1.pop();
        assert!(matches!(validate_det_collection(&c).unwrap_err()[0], CollectionFailure::Table(1, 1)));
    }

    #[test]
    fn avg_collections() {
        assert_eq!(validate_avg_collection(&AvgCollection::diagonal(3)), Ok(()));
        let shifted = AvgCollection { m: 3, exponents: (0..3).map(|j| [j, j + 1]).collect() };
        assert_eq!(validate_avg_collection(&shifted), Ok(()));
        let constant = AvgCollection { m: 3, exponents: vec![[0, 0]; 3] };
        assert!(validate_avg_collection(&constant).is_err());
        assert_eq!(AvgCollection::all(2).len(), 4);
        assert_eq!(AvgCollection::all(3).len(), 36);
    }

    #[test]
    fn psi_examples() {
        let x = build_cycle(4).unwrap();
        let line = LineSpec::standard(&["s1", "s2", "s3"]);
        let psi = psi_map(&x, &line, 2, 1, &BTreeMap::new()).unwrap();
        assert_eq!(psi.labels(), &[0, 0, 1, 1]);
        assert_eq!(psi.on_simplex(&x, x.lookup("s4").unwrap()), pair(1, 0));
        let l3 = build_line(3).unwrap();
        let psi = psi_map(&l3, &LineSpec::standard(&["s1", "s2", "s3"]), 2, 0, &BTreeMap::new()).unwrap();
        assert_eq!(psi.labels(), &[0, 0, 1, 0]);
        let conflict = BTreeMap::from([("v2".to_string(), 1)]);
        assert!(matches!(psi_map(&x, &line, 2, 1, &conflict), Err(FactoryError::InconsistentExtension { .. })));
    }

    #[test]
    fn uniqueness_examples() {
        let r = det_collection_uniqueness(&DetCollection::three_way()).unwrap();
        assert!(r.unique && r.uniform);
        assert_eq!(r.solution.unwrap()[0], Rat::new(1, 4));
        let r = avg_collection_uniqueness(&AvgCollection::diagonal(3)).unwrap();
        assert!(r.unique && r.uniform);
        // duplicated maps leave a free direction
        let line = Arc::new(build_line(3).unwrap());
        let phi = DeterministicMap::new(2, vec![0, 0, 0, 0]).unwrap();
        let d = deterministic_sdist(&line, &phi).unwrap();
        let psi = DeterministicMap::zero(2, 4);
        let r = collection_uniqueness_solve(&[d.clone(), d], &psi).unwrap();
        assert!(!r.unique);
        assert!(r.nullspace_dimension > 0);
    }

    #[test]
    fn three_way_vertex() {
        let inp = three_way_inputs();
        let out = build_suspension_vertex_det(&inp.x, &inp.line, &inp.q, &inp.psi, Caps::default()).unwrap();
        assert_eq!(out.collection.a, [[1, 1], [1, 0]]);
        assert_eq!(out.collection.b, [[1, 0], [1, 1]]);
        assert_eq!(out.collection.h, 1);
        assert!(out.vertex.certification.vertex.is_vertex);
    }

    #[test]
    fn pure_line_vertex_m3() {
        let inp = pure_line_inputs(&DetCollection::arithmetic(3));
        let out = build_suspension_vertex_det(&inp.x, &inp.line, &inp.q, &inp.psi, Caps::default()).unwrap();
        assert_eq!(out.collection, DetCollection::arithmetic(3));
        assert!(!out.vertex.certification.suspension_lp_noncontextual);
    }

    #[test]
    fn pr_class2_vertex() {
        let inp = pr_class2_inputs();
        let (out, c) = build_suspension_vertex_avg(&inp.x, &inp.line, &inp.p, &inp.psi, Caps::default()).unwrap();
        assert_eq!(c, AvgCollection::diagonal(2));
        assert!(out.certification.vertex.is_vertex);
        let zero = DeterministicMap::zero(2, 4);
        let err = build_suspension_vertex_avg(&inp.x, &inp.line, &inp.p, &zero, Caps::default()).unwrap_err();
        assert_eq!(err, FactoryError::Hypotheses(vec![Hypothesis::PsiOnLine]));
    }

    #[test]
    fn swap_collection_refused() {
        let inp = pure_line_inputs(&DetCollection::swap());
        let err = build_suspension_vertex_det(&inp.x, &inp.line, &inp.q, &inp.psi, Caps::default()).unwrap_err();
        assert_eq!(err, FactoryError::Hypotheses(vec![Hypothesis::ClosedSet(0), Hypothesis::ClosedSet(1)]));
    }

    #[test]
    fn every_average_collection_is_uniquely_uniform() {
        for m in [2, 3] {
            for c in AvgCollection::all(m) {
                let r = avg_collection_uniqueness(&c).unwrap();
                assert!(r.unique && r.uniform, "{c:?}");
            }
        }
    }

    #[test]
    fn average_line_refused_and_not_a_vertex() {
        let inp = average_line_inputs(3);
        let err = build_suspension_vertex_avg(&inp.x, &inp.line, &inp.p, &inp.psi, Caps::default()).unwrap_err();
        let expected = (0..3).map(|j| Hypothesis::IsVertex(format!("p^{j}"))).collect();
        assert_eq!(err, FactoryError::Hypotheses(expected));
        let s = suspension(&inp.x).unwrap();
        let down = inp.p.iter().map(|p| act(&inp.psi, p).unwrap()).collect();
        let sp = SuspensionPoint { up: uniform_join(3, inp.p.clone()), down: uniform_join(3, down) };
        let p = suspension_assemble(&s, &sp, 3).unwrap();
        let rep = is_vertex(&p);
        assert_eq!((rep.is_vertex, rep.rank, rep.coordinates), (false, 106, 108));
        assert!(!is_noncontextual(&p, Caps::default()).unwrap().is_noncontextual());
    }
}
