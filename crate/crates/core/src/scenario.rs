//! Finitely generated measurement spaces.
//!
//! A [`Scenario`] stores only nondegenerate simplices together with their face
//! maps (a Δ-set presentation). Simplices are addressed by dense indices; the
//! string ids are kept for I/O and for matching sub-scenarios against hosts.
//!
//! Outcome tuples on a simplex of dimension `n` are read in the order of the
//! simplex's vertices `v_0, ..., v_n`, where `v_i` is the face obtained by
//! deleting every position except `i`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Input description of one simplex: its id and ordered face ids (`faces[i]` is `d_i`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplexSpec {
    pub id: String,
    pub dim: usize,
    #[serde(default)]
    pub faces: Vec<String>,
}

/// Unvalidated scenario description, mirroring the JSON file format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    pub simplices: Vec<SimplexSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simplex {
    pub id: String,
    pub dim: usize,
    pub faces: Vec<usize>,
}

/// One way a simplex sits inside a generator: the generator index and the
/// sorted vertex positions of the generator that span it.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occurrence {
    pub generator: usize,
    pub positions: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("simplex {simplex}: face count {found} does not match dimension {dim}")]
    FaceCount { simplex: String, dim: usize, found: usize },
    #[error("simplex {simplex}: face d_{index} = {face} has dimension {face_dim}, expected {expected}")]
    FaceDimension { simplex: String, index: usize, face: String, face_dim: usize, expected: usize },
    #[error("simplex {simplex}: d_{i} d_{j} = {lhs} but d_{jm1} d_{i} = {rhs}", jm1 = j - 1)]
    SimplicialIdentity { simplex: String, i: usize, j: usize, lhs: String, rhs: String },
    #[error("simplex {simplex} is not reachable from any generator")]
    Unreachable { simplex: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("simplex {simplex} references missing face {face}")]
    DanglingFace { simplex: String, face: String },
    #[error("duplicate simplex id {0}")]
    DuplicateId(String),
    #[error("scenario violates {} invariant(s): {}", .0.len(), display_list(.0))]
    Violations(Vec<Violation>),
    #[error("scenario has no simplices")]
    Empty,
    #[error("{0}")]
    InvalidArgument(String),
    #[error("simplex id {0} already present in the scenario")]
    NameCollision(String),
    #[error("simplex {0} is not part of the host scenario")]
    NotEmbedded(String),
    #[error("invalid line: {0}")]
    InvalidLine(String),
}

fn display_list<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

/// A validated measurement space.
#[derive(Clone, Debug)]
pub struct Scenario {
    name: String,
    simplices: Vec<Simplex>,
    index: HashMap<String, usize>,
    generators: Vec<usize>,
    vertices: Vec<usize>,
    vertex_slot: Vec<Option<usize>>,
    occurrences: Vec<Vec<Occurrence>>,
    vertex_lists: Vec<Vec<usize>>,
}

impl PartialEq for Scenario {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.simplices == other.simplices
    }
}

impl Eq for Scenario {}

/// Checks the Δ-set invariants of a description.
///
/// A dangling face reference or duplicate id is reported as a hard error;
/// everything else is collected into [`ScenarioError::Violations`].
pub fn validate_scenario(spec: &ScenarioSpec) -> Result<(), ScenarioError> {
    resolve(spec).map(|_| ())
}

fn resolve(spec: &ScenarioSpec) -> Result<Vec<Simplex>, ScenarioError> {
    let mut index = HashMap::new();
    for (k, s) in spec.simplices.iter().enumerate() {
        if index.insert(s.id.clone(), k).is_some() {
            return Err(ScenarioError::DuplicateId(s.id.clone()));
        }
    }
    let mut simplices = Vec::with_capacity(spec.simplices.len());
    for s in &spec.simplices {
        let mut faces = Vec::with_capacity(s.faces.len());
        for f in &s.faces {
            match index.get(f) {
                Some(&k) => faces.push(k),
                None => {
                    return Err(ScenarioError::DanglingFace { simplex: s.id.clone(), face: f.clone() })
                }
            }
        }
        simplices.push(Simplex { id: s.id.clone(), dim: s.dim, faces });
    }

    let mut violations = Vec::new();
    for s in &simplices {
        let expected = if s.dim == 0 { 0 } else { s.dim + 1 };
        if s.faces.len() != expected {
            violations.push(Violation::FaceCount { simplex: s.id.clone(), dim: s.dim, found: s.faces.len() });
            continue;
        }
        for (i, &f) in s.faces.iter().enumerate() {
            if simplices[f].dim + 1 != s.dim {
                violations.push(Violation::FaceDimension {
                    simplex: s.id.clone(),
                    index: i,
                    face: simplices[f].id.clone(),
                    face_dim: simplices[f].dim,
                    expected: s.dim - 1,
                });
            }
        }
    }
    if !violations.is_empty() {
        return Err(ScenarioError::Violations(violations));
    }

    for s in &simplices {
        if s.dim < 2 {
            continue;
        }
        for j in 1..=s.dim {
            for i in 0..j {
                let lhs = simplices[s.faces[j]].faces[i];
                let rhs = simplices[s.faces[i]].faces[j - 1];
                if lhs != rhs {
                    violations.push(Violation::SimplicialIdentity {
                        simplex: s.id.clone(),
                        i,
                        j,
                        lhs: simplices[lhs].id.clone(),
                        rhs: simplices[rhs].id.clone(),
                    });
                }
            }
        }
    }

    // Every simplex must be an iterated face of a generator. In a finite Δ-set this
    // always holds once dimensions are consistent, but we check it anyway since
    // it is cheap and keeps the invariant explicit.
    let generators = compute_generators(&simplices);
    let mut seen = vec![false; simplices.len()];
    let mut queue: VecDeque<usize> = generators.iter().copied().collect();
    while let Some(k) = queue.pop_front() {
        if std::mem::replace(&mut seen[k], true) {
            continue;
        }
        queue.extend(simplices[k].faces.iter().copied());
    }
    for (k, s) in simplices.iter().enumerate() {
        if !seen[k] {
            violations.push(Violation::Unreachable { simplex: s.id.clone() });
        }
    }

    if violations.is_empty() {
        Ok(simplices)
    } else {
        Err(ScenarioError::Violations(violations))
    }
}

fn compute_generators(simplices: &[Simplex]) -> Vec<usize> {
    let mut is_face = vec![false; simplices.len()];
    for s in simplices {
        for &f in &s.faces {
            is_face[f] = true;
        }
    }
    (0..simplices.len()).filter(|&k| !is_face[k]).collect()
}

impl Scenario {
    pub fn from_spec(spec: &ScenarioSpec) -> Result<Self, ScenarioError> {
        let simplices = resolve(spec)?;
        Ok(Self::assemble(spec.name.clone(), simplices))
    }

    fn assemble(name: String, simplices: Vec<Simplex>) -> Self {
        let index = simplices.iter().enumerate().map(|(k, s)| (s.id.clone(), k)).collect();
        let generators = compute_generators(&simplices);
        let vertices: Vec<usize> = (0..simplices.len()).filter(|&k| simplices[k].dim == 0).collect();
        let mut vertex_slot = vec![None; simplices.len()];
        for (slot, &v) in vertices.iter().enumerate() {
            vertex_slot[v] = Some(slot);
        }

        let mut occ_sets: Vec<BTreeSet<Occurrence>> = vec![BTreeSet::new(); simplices.len()];
        for &g in &generators {
            let mut stack = vec![(g, (0..=simplices[g].dim).collect::<Vec<_>>())];
            while let Some((s, positions)) = stack.pop() {
                let occ = Occurrence { generator: g, positions: positions.clone() };
                if !occ_sets[s].insert(occ) {
                    continue;
                }
                for (i, &f) in simplices[s].faces.iter().enumerate() {
                    let mut p = positions.clone();
                    p.remove(i);
                    stack.push((f, p));
                }
            }
        }
        let occurrences: Vec<Vec<Occurrence>> = occ_sets.into_iter().map(|s| s.into_iter().collect()).collect();

        let mut vertex_lists = Vec::with_capacity(simplices.len());
        for k in 0..simplices.len() {
            vertex_lists.push(Self::vertex_list_of(&simplices, k));
        }

        Scenario { name, simplices, index, generators, vertices, vertex_slot, occurrences, vertex_lists }
    }

    fn vertex_list_of(simplices: &[Simplex], k: usize) -> Vec<usize> {
        let s = &simplices[k];
        if s.dim == 0 {
            return vec![k];
        }
        // v_i for i < n comes from d_n (which keeps positions 0..n-1), v_n from d_0.
        let mut front = Self::vertex_list_of(simplices, s.faces[s.dim]);
        let back = Self::vertex_list_of(simplices, s.faces[0]);
        front.push(*back.last().expect("nonempty"));
        front
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn simplex(&self, k: usize) -> &Simplex {
        &self.simplices[k]
    }

    pub fn dim(&self, k: usize) -> usize {
        self.simplices[k].dim
    }

    pub fn id(&self, k: usize) -> &str {
        &self.simplices[k].id
    }

    pub fn lookup(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Simplices that are not a face of any other simplex, in index order.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn generator_slot(&self, k: usize) -> Option<usize> {
        self.generators.binary_search(&k).ok()
    }

    /// The 0-simplices in index order; labelings are indexed by this list.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn vertex_slot(&self, k: usize) -> Option<usize> {
        self.vertex_slot[k]
    }

    /// Ordered vertices `v_0..v_n` of simplex `k`.
    pub fn vertices_of(&self, k: usize) -> &[usize] {
        &self.vertex_lists[k]
    }

    /// All ways simplex `k` appears inside a generator, sorted.
    pub fn occurrences(&self, k: usize) -> &[Occurrence] {
        &self.occurrences[k]
    }

    pub fn count_by_dim(&self) -> Vec<usize> {
        let max = self.simplices.iter().map(|s| s.dim).max().unwrap_or(0);
        let mut counts = vec![0; max + 1];
        for s in &self.simplices {
            counts[s.dim] += 1;
        }
        counts
    }

    pub fn to_spec(&self) -> ScenarioSpec {
        ScenarioSpec {
            name: self.name.clone(),
            m: None,
            simplices: self
                .simplices
                .iter()
                .map(|s| SimplexSpec {
                    id: s.id.clone(),
                    dim: s.dim,
                    faces: s.faces.iter().map(|&f| self.simplices[f].id.clone()).collect(),
                })
                .collect(),
        }
    }

    /// Sub-scenario generated by the given simplex ids (closed under faces), keeping ids.
    pub fn closure(&self, name: &str, ids: &[&str]) -> Result<Scenario, ScenarioError> {
        let mut keep = BTreeSet::new();
        let mut stack = Vec::new();
        for id in ids {
            stack.push(self.lookup(id).ok_or_else(|| ScenarioError::NotEmbedded(id.to_string()))?);
        }
        while let Some(k) = stack.pop() {
            if keep.insert(k) {
                stack.extend(self.simplices[k].faces.iter().copied());
            }
        }
        let order: Vec<usize> = keep.into_iter().collect();
        let spec = ScenarioSpec {
            name: name.to_string(),
            m: None,
            simplices: order
                .iter()
                .map(|&k| {
                    let s = &self.simplices[k];
                    SimplexSpec {
                        id: s.id.clone(),
                        dim: s.dim,
                        faces: s.faces.iter().map(|&f| self.simplices[f].id.clone()).collect(),
                    }
                })
                .collect(),
        };
        Scenario::from_spec(&spec)
    }

    /// Index map of `sub` into `self`, matching by id and checking faces agree.
    pub fn embedding_of(&self, sub: &Scenario) -> Result<Vec<usize>, ScenarioError> {
        let mut map = Vec::with_capacity(sub.len());
        for s in sub.simplices() {
            let k = self.lookup(&s.id).ok_or_else(|| ScenarioError::NotEmbedded(s.id.clone()))?;
            map.push(k);
        }
        for (k, s) in sub.simplices().iter().enumerate() {
            let host = &self.simplices[map[k]];
            let faces: Vec<usize> = s.faces.iter().map(|&f| map[f]).collect();
            if host.dim != s.dim || host.faces != faces {
                return Err(ScenarioError::NotEmbedded(s.id.clone()));
            }
        }
        Ok(map)
    }
}

fn vertex_spec(id: String) -> SimplexSpec {
    SimplexSpec { id, dim: 0, faces: vec![] }
}

fn edge_spec(id: String, d0: String, d1: String) -> SimplexSpec {
    SimplexSpec { id, dim: 1, faces: vec![d0, d1] }
}

/// The single-vertex scenario.
pub fn build_point(id: &str) -> Scenario {
    let spec = ScenarioSpec { name: "point".into(), m: None, simplices: vec![vertex_spec(id.into())] };
    Scenario::from_spec(&spec).expect("point is valid")
}

/// Cycle with `n` edges `s1..sn`: `d_1(s_k) = v_k`, `d_0(s_k) = v_{k+1 mod n}`.
pub fn build_cycle(n: usize) -> Result<Scenario, ScenarioError> {
    if n < 3 {
        return Err(ScenarioError::InvalidArgument(format!("cycle needs at least 3 edges, got {n}")));
    }
    let mut simplices: Vec<SimplexSpec> = (1..=n).map(|k| vertex_spec(format!("v{k}"))).collect();
    for k in 1..=n {
        let next = k % n + 1;
        simplices.push(edge_spec(format!("s{k}"), format!("v{next}"), format!("v{k}")));
    }
    Scenario::from_spec(&ScenarioSpec { name: format!("cycle-{n}"), m: None, simplices })
}

/// Line with `n` edges: `d_1(s_k) = v_k`, `d_0(s_k) = v_{k+1}`.
pub fn build_line(n: usize) -> Result<Scenario, ScenarioError> {
    if n < 1 {
        return Err(ScenarioError::InvalidArgument("line needs at least 1 edge".into()));
    }
    let mut simplices: Vec<SimplexSpec> = (1..=n + 1).map(|k| vertex_spec(format!("v{k}"))).collect();
    for k in 1..=n {
        simplices.push(edge_spec(format!("s{k}"), format!("v{}", k + 1), format!("v{k}")));
    }
    Scenario::from_spec(&ScenarioSpec { name: format!("line-{n}"), m: None, simplices })
}

/// A cone `CX` with the maps relating it to `X`.
#[derive(Clone, Debug)]
pub struct Cone {
    pub base: Arc<Scenario>,
    pub scenario: Arc<Scenario>,
    /// Index of the cone point.
    pub apex: usize,
    /// `X ↪ CX`, indexed by base simplex.
    pub include: Vec<usize>,
    /// `σ ↦ (c, σ)`, indexed by base simplex.
    pub coned: Vec<usize>,
}

/// Id of the simplex `(c, σ)`.
pub fn coned_id(apex: &str, id: &str) -> String {
    format!("({apex},{id})")
}

/// Cone on `x` with cone point `apex`.
///
/// `(c,σ)` has `d_0 = σ` and `d_i = (c, d_{i-1} σ)` for `i ≥ 1`; for a vertex `v`,
/// `d_1(c,v) = c`. The cone point is vertex 0 of every new simplex.
pub fn cone(x: &Arc<Scenario>, apex: &str) -> Result<Cone, ScenarioError> {
    if x.lookup(apex).is_some() {
        return Err(ScenarioError::NameCollision(apex.to_string()));
    }
    let mut spec = x.to_spec();
    spec.name = format!("cone({})", x.name());
    spec.simplices.push(vertex_spec(apex.to_string()));
    for s in x.simplices() {
        let id = coned_id(apex, &s.id);
        if x.lookup(&id).is_some() {
            return Err(ScenarioError::NameCollision(id));
        }
        let mut faces = vec![s.id.clone()];
        if s.dim == 0 {
            faces.push(apex.to_string());
        } else {
            faces.extend(s.faces.iter().map(|&f| coned_id(apex, x.id(f))));
        }
        spec.simplices.push(SimplexSpec { id, dim: s.dim + 1, faces });
    }
    let scenario = Arc::new(Scenario::from_spec(&spec)?);
    let n = x.len();
    Ok(Cone {
        base: Arc::clone(x),
        apex: n,
        include: (0..n).collect(),
        coned: (0..n).map(|k| n + 1 + k).collect(),
        scenario,
    })
}

/// Suspension `ΣX`: two cones on `x` glued along `x`.
#[derive(Clone, Debug)]
pub struct Suspension {
    pub base: Arc<Scenario>,
    pub scenario: Arc<Scenario>,
    /// The `s_1` copy, cone point `c+`.
    pub up: Cone,
    /// The `s_2` copy, cone point `c-`.
    pub down: Cone,
    /// `s_1: C⁺X → ΣX` on simplex indices.
    pub s1: Vec<usize>,
    /// `s_2: C⁻X → ΣX` on simplex indices.
    pub s2: Vec<usize>,
}

pub const UP_APEX: &str = "c+";
pub const DOWN_APEX: &str = "c-";

pub fn suspension(x: &Arc<Scenario>) -> Result<Suspension, ScenarioError> {
    let up = cone(x, UP_APEX)?;
    let down = cone(x, DOWN_APEX)?;
    let mut spec = up.scenario.to_spec();
    spec.name = format!("suspension({})", x.name());
    let down_spec = down.scenario.to_spec();
    // Down cone contributes its apex and coned simplices; base simplices are shared.
    for (k, s) in down_spec.simplices.into_iter().enumerate() {
        if k >= x.len() {
            if up.scenario.lookup(&s.id).is_some() {
                return Err(ScenarioError::NameCollision(s.id));
            }
            spec.simplices.push(s);
        }
    }
    let scenario = Arc::new(Scenario::from_spec(&spec)?);
    let s1 = (0..up.scenario.len()).collect();
    let up_len = up.scenario.len();
    let s2 = (0..down.scenario.len())
        .map(|k| if k < x.len() { k } else { up_len + (k - x.len()) })
        .collect();
    Ok(Suspension { base: Arc::clone(x), scenario, up, down, s1, s2 })
}

/// Disjoint union with ids prefixed `l.` and `r.`.
pub fn disjoint_union(x: &Scenario, y: &Scenario) -> Scenario {
    let mut simplices = Vec::with_capacity(x.len() + y.len());
    for (prefix, sc) in [("l.", x), ("r.", y)] {
        for s in sc.to_spec().simplices {
            simplices.push(SimplexSpec {
                id: format!("{prefix}{}", s.id),
                dim: s.dim,
                faces: s.faces.iter().map(|f| format!("{prefix}{f}")).collect(),
            });
        }
    }
    let spec = ScenarioSpec { name: format!("{}+{}", x.name(), y.name()), m: None, simplices };
    Scenario::from_spec(&spec).expect("union of valid scenarios is valid")
}

/// Whether the vertex/edge graph is connected.
pub fn is_connected(x: &Scenario) -> Result<bool, ScenarioError> {
    let verts = x.vertices();
    if verts.is_empty() {
        return Err(ScenarioError::Empty);
    }
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for s in x.simplices() {
        if s.dim == 1 {
            adj.entry(s.faces[0]).or_default().push(s.faces[1]);
            adj.entry(s.faces[1]).or_default().push(s.faces[0]);
        }
    }
    let mut seen = BTreeSet::new();
    let mut stack = vec![verts[0]];
    while let Some(v) = stack.pop() {
        if seen.insert(v) {
            if let Some(ns) = adj.get(&v) {
                stack.extend(ns.iter().copied());
            }
        }
    }
    Ok(seen.len() == verts.len())
}

/// A line inside a host scenario: edges in order with orientation bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineSpec {
    pub edges: Vec<String>,
    /// `orientation[k]` is `i_k`: the gluing is `d_{i_k}(σ_k) = d_{1-i_{k+1}}(σ_{k+1})`.
    pub orientation: Vec<u8>,
}

impl LineSpec {
    /// Line with the convention `d_0(σ_k) = d_1(σ_{k+1})`.
    pub fn standard(edges: &[&str]) -> Self {
        LineSpec { edges: edges.iter().map(|e| e.to_string()).collect(), orientation: vec![0; edges.len()] }
    }

    pub fn is_standard(&self) -> bool {
        self.orientation.iter().all(|&b| b == 0)
    }

    /// Checks the line inside `host` and returns its ordered vertex indices
    /// `u_0, ..., u_n` with `u_0 = d_{1-i_1}(σ_1)` and `u_k = d_{i_k}(σ_k)`.
    pub fn resolve(&self, host: &Scenario) -> Result<Vec<usize>, ScenarioError> {
        if self.edges.is_empty() || self.edges.len() != self.orientation.len() {
            return Err(ScenarioError::InvalidLine("edge and orientation lists must be nonempty and equal length".into()));
        }
        let mut idx = Vec::new();
        for e in &self.edges {
            let k = host.lookup(e).ok_or_else(|| ScenarioError::NotEmbedded(e.clone()))?;
            if host.dim(k) != 1 {
                return Err(ScenarioError::InvalidLine(format!("{e} is not an edge")));
            }
            if idx.contains(&k) {
                return Err(ScenarioError::InvalidLine(format!("edge {e} repeated")));
            }
            idx.push(k);
        }
        for &b in &self.orientation {
            if b > 1 {
                return Err(ScenarioError::InvalidLine("orientation bits must be 0 or 1".into()));
            }
        }
        let face = |k: usize, i: u8| host.simplex(k).faces[i as usize];
        let mut verts = vec![face(idx[0], 1 - self.orientation[0])];
        for k in 0..idx.len() {
            if k > 0 {
                let prev = face(idx[k - 1], self.orientation[k - 1]);
                let cur = face(idx[k], 1 - self.orientation[k]);
                if prev != cur {
                    return Err(ScenarioError::InvalidLine(format!(
                        "d_{}({}) != d_{}({})",
                        self.orientation[k - 1],
                        self.edges[k - 1],
                        1 - self.orientation[k],
                        self.edges[k]
                    )));
                }
            }
            verts.push(face(idx[k], self.orientation[k]));
        }
        Ok(verts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn faces_of(x: &Scenario, id: &str) -> Vec<String> {
        let k = x.lookup(id).unwrap();
        x.simplex(k).faces.iter().map(|&f| x.id(f).to_string()).collect()
    }

    #[test]
    fn chsh_cycle_gluing() {
        let x = build_cycle(4).unwrap();
        assert_eq!(x.count_by_dim(), vec![4, 4]);
        assert_eq!(x.generators().len(), 4);
        // d_0(σ_k) = d_1(σ_{k+1}) cyclically
        for k in 1..=4 {
            let next = k % 4 + 1;
            assert_eq!(faces_of(&x, &format!("s{k}"))[0], faces_of(&x, &format!("s{next}"))[1]);
        }
        assert!(validate_scenario(&x.to_spec()).is_ok());
    }

    #[test]
    fn small_cycles_and_lines() {
        assert_eq!(build_cycle(3).unwrap().count_by_dim(), vec![3, 3]);
        assert!(build_cycle(2).is_err());
        assert_eq!(build_line(3).unwrap().count_by_dim(), vec![4, 3]);
        assert_eq!(build_line(2).unwrap().count_by_dim(), vec![3, 2]);
        assert_eq!(build_line(1).unwrap().count_by_dim(), vec![2, 1]);
        assert!(build_line(0).is_err());
    }

    #[test]
    fn identity_violation_names_simplex() {
        // Triangle t over edges where d_0 of d_1(t) disagrees with d_0 of d_0(t).
        let spec = ScenarioSpec {
            name: "bad".into(),
            m: None,
            simplices: vec![
                vertex_spec("a".into()),
                vertex_spec("b".into()),
                vertex_spec("c".into()),
                edge_spec("bc".into(), "c".into(), "b".into()),
                edge_spec("ac".into(), "c".into(), "a".into()),
                edge_spec("ab".into(), "a".into(), "a".into()),
                SimplexSpec { id: "t".into(), dim: 2, faces: vec!["bc".into(), "ac".into(), "ab".into()] },
            ],
        };
        match validate_scenario(&spec) {
            Err(ScenarioError::Violations(v)) => {
                assert!(v.iter().any(|e| matches!(e, Violation::SimplicialIdentity { simplex, .. } if simplex == "t")));
            }
            other => panic!("expected violations, got {other:?}"),
        }
    }

    #[test]
    fn dangling_face_reported() {
        let spec = ScenarioSpec {
            name: "bad".into(),
            m: None,
            simplices: vec![vertex_spec("a".into()), edge_spec("e".into(), "a".into(), "zz".into())],
        };
        assert_eq!(
            validate_scenario(&spec),
            Err(ScenarioError::DanglingFace { simplex: "e".into(), face: "zz".into() })
        );
    }

    #[test]
    fn cone_of_chsh() {
        let x = Arc::new(build_cycle(4).unwrap());
        let c = cone(&x, "c").unwrap();
        let cx = &c.scenario;
        assert_eq!(cx.count_by_dim(), vec![5, 8, 4]);
        assert_eq!(cx.generators().len(), 4);
        // d_1(τ_k) = d_2(τ_{k+1})
        for k in 1..=4 {
            let next = k % 4 + 1;
            let t = faces_of(cx, &format!("(c,s{k})"));
            let u = faces_of(cx, &format!("(c,s{next})"));
            assert_eq!(t[1], u[2]);
        }
        // cone point is vertex 0
        for &g in cx.generators() {
            assert_eq!(cx.vertices_of(g)[0], c.apex);
        }
        for k in 0..x.len() {
            let ck = c.coned[k];
            assert_eq!(cx.dim(ck), x.dim(k) + 1);
            assert_eq!(cx.simplex(ck).faces[0], c.include[k]);
        }
    }

    #[test]
    fn cone_of_point_is_an_edge() {
        let p = Arc::new(build_point("v"));
        let c = cone(&p, "c").unwrap();
        assert_eq!(faces_of(&c.scenario, "(c,v)"), vec!["v".to_string(), "c".to_string()]);
        assert!(cone(&p, "v").is_err());
    }

    #[test]
    fn suspension_counts_and_legs() {
        let x = Arc::new(build_cycle(4).unwrap());
        let s = suspension(&x).unwrap();
        assert_eq!(s.scenario.count_by_dim(), vec![6, 12, 8]);
        for (cone, leg) in [(&s.up, &s.s1), (&s.down, &s.s2)] {
            for k in 0..cone.scenario.len() {
                let mapped: Vec<usize> = cone.scenario.simplex(k).faces.iter().map(|&f| leg[f]).collect();
                assert_eq!(s.scenario.simplex(leg[k]).faces, mapped);
                assert_eq!(s.scenario.id(leg[k]), cone.scenario.id(k));
            }
        }
        // the two legs meet exactly in X
        let up: BTreeSet<usize> = s.s1.iter().copied().collect();
        let down: BTreeSet<usize> = s.s2.iter().copied().collect();
        let common: Vec<usize> = up.intersection(&down).copied().collect();
        assert_eq!(common, (0..x.len()).collect::<Vec<_>>());
        assert!(is_connected(&s.scenario).unwrap());
    }

    #[test]
    fn suspension_of_point() {
        let p = Arc::new(build_point("v"));
        let s = suspension(&p).unwrap();
        assert_eq!(s.scenario.count_by_dim(), vec![3, 2]);
        assert_eq!(faces_of(&s.scenario, "(c+,v)"), vec!["v".to_string(), "c+".to_string()]);
        assert_eq!(faces_of(&s.scenario, "(c-,v)"), vec!["v".to_string(), "c-".to_string()]);
    }

    #[test]
    fn unions_and_connectivity() {
        let p = build_point("v");
        let pp = disjoint_union(&p, &p);
        assert_eq!(pp.count_by_dim(), vec![2]);
        assert!(!is_connected(&pp).unwrap());
        let c = build_cycle(4).unwrap();
        let cc = disjoint_union(&c, &c);
        assert_eq!(cc.count_by_dim(), vec![8, 8]);
        assert!(!is_connected(&cc).unwrap());
        assert!(is_connected(&c).unwrap());
        let empty = Scenario::from_spec(&ScenarioSpec { name: "e".into(), m: None, simplices: vec![] }).unwrap();
        assert_eq!(is_connected(&empty), Err(ScenarioError::Empty));
    }

    #[test]
    fn cone_is_natural_in_inclusions() {
        let x = Arc::new(build_cycle(4).unwrap());
        let edge = Arc::new(x.closure("edge", &["s1"]).unwrap());
        let ce = cone(&edge, "c").unwrap();
        let cx = cone(&x, "c").unwrap();
        assert!(cx.scenario.embedding_of(&ce.scenario).is_ok());
    }

    #[test]
    fn line_resolution() {
        let x = build_cycle(4).unwrap();
        let line = LineSpec::standard(&["s1", "s2", "s3"]);
        let verts = line.resolve(&x).unwrap();
        let ids: Vec<&str> = verts.iter().map(|&v| x.id(v)).collect();
        assert_eq!(ids, vec!["v1", "v2", "v3", "v4"]);
        let bad = LineSpec::standard(&["s1", "s3"]);
        assert!(bad.resolve(&x).is_err());
        let reversed = LineSpec { edges: vec!["s2".into(), "s1".into()], orientation: vec![1, 1] };
        let ids: Vec<&str> = reversed.resolve(&x).unwrap().iter().map(|&v| x.id(v)).collect();
        assert_eq!(ids, vec!["v3", "v2", "v1"]);
    }

    #[test]
    fn occurrences_in_cone() {
        let x = Arc::new(build_cycle(4).unwrap());
        let c = cone(&x, "c").unwrap();
        let cx = &c.scenario;
        // the cone point sits at position 0 of all four triangles
        let occ = cx.occurrences(c.apex);
        assert_eq!(occ.len(), 4);
        assert!(occ.iter().all(|o| o.positions == vec![0]));
        // each base vertex lies in two triangles
        let v1 = cx.lookup("v1").unwrap();
        assert_eq!(cx.occurrences(v1).len(), 2);
    }
}
