//! Join decompositions of distributions on cones and suspensions.
//!
//! A distribution `p` on a cone `CX` with connected `X` is the same thing as a
//! tuple `(⟨λ_0, p^(0)⟩, …, ⟨λ_{m-1}, p^(m-1)⟩)` where `λ_j` is the probability that
//! the cone point reads `j` and `p^(j)` is the conditional distribution on `X`.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::dist::{Dist, Part};
use crate::lp::{solve_standard, StandardOutcome};
use crate::polytope::{Caps, Coordinates, PolytopeError};
use crate::rational::Rat;
use crate::scenario::{is_connected, Cone, ScenarioError, Suspension};
use crate::sdist::{enumerate_deterministic, restrict_via, DetMixture, SDist, SDistError};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum JoinError {
    #[error("base scenario is not connected")]
    NotConnected,
    #[error("cone-point weight {j} differs between generators {first} and {second}")]
    InconsistentWeight { j: usize, first: String, second: String },
    #[error("join point has {found} parts, expected {expected}")]
    PartCount { expected: usize, found: usize },
    #[error("weights sum to {0}, not 1")]
    WeightSum(Rat),
    #[error("part {0}: weight is zero exactly when the component is missing")]
    BulletMismatch(usize),
    #[error("part {0}: negative weight")]
    NegativeWeight(usize),
    #[error("up and down mixtures disagree on the base")]
    GluingMismatch,
    #[error("distribution is on a different scenario")]
    WrongScenario,
    #[error(transparent)]
    SDist(#[from] SDistError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

/// `(⟨λ_0, p^(0)⟩, …, ⟨λ_{m-1}, p^(m-1)⟩)`, with `None` for the marker •.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinPoint {
    pub parts: Vec<Part<SDist>>,
}

impl JoinPoint {
    /// `κ_j(q)`: all weight on component `j`.
    pub fn concentrated(m: u32, j: usize, q: SDist) -> Self {
        let mut parts: Vec<Part<SDist>> = (0..m).map(|_| Part::bullet()).collect();
        parts[j] = Part { weight: Rat::one(), component: Some(q) };
        JoinPoint { parts }
    }

    pub fn weights(&self) -> Vec<Rat> {
        self.parts.iter().map(|p| p.weight.clone()).collect()
    }

    /// `Σ λ_j p^(j)` on the base.
    pub fn mixture(&self) -> Result<SDist, SDistError> {
        SDist::mix(self.parts.iter().filter_map(|p| p.component.as_ref().map(|c| (&p.weight, c))))
    }

    fn check(&self, m: u32, base: &Arc<crate::scenario::Scenario>) -> Result<(), JoinError> {
        if self.parts.len() != m as usize {
            return Err(JoinError::PartCount { expected: m as usize, found: self.parts.len() });
        }
        let mut total = Rat::zero();
        for (j, part) in self.parts.iter().enumerate() {
            if part.weight.is_negative() {
                return Err(JoinError::NegativeWeight(j));
            }
            if part.weight.is_zero() != part.component.is_none() {
                return Err(JoinError::BulletMismatch(j));
            }
            if let Some(c) = &part.component {
                if c.m() != m || **c.scenario() != **base {
                    return Err(JoinError::WrongScenario);
                }
            }
            total += &part.weight;
        }
        if !total.is_one() {
            return Err(JoinError::WeightSum(total));
        }
        Ok(())
    }
}

fn base_generator_of(cone: &Cone, cone_generator: usize) -> usize {
    cone.coned.iter().position(|&k| k == cone_generator).expect("cone generators are coned simplices")
}

/// `λ_j = Σ_{a⃗} p_{(c,x)}(j, a⃗)` and `p^(j)_x(a⃗) = p_{(c,x)}(j, a⃗) / λ_j`.
pub fn cone_decompose(cone: &Cone, p: &SDist) -> Result<JoinPoint, JoinError> {
    if !is_connected(&cone.base)? {
        return Err(JoinError::NotConnected);
    }
    if **p.scenario() != *cone.scenario {
        return Err(JoinError::WrongScenario);
    }
    let cx = &cone.scenario;
    let m = p.m();
    let mut weights: Option<(Vec<Rat>, usize)> = None;
    let mut components: Vec<BTreeMap<String, Dist>> = vec![BTreeMap::new(); m as usize];
    for (slot, &g) in cx.generators().iter().enumerate() {
        let split = p.dists()[slot].split_first();
        let w: Vec<Rat> = split.iter().map(|s| s.weight.clone()).collect();
        match &weights {
            None => weights = Some((w, g)),
            Some((w0, g0)) => {
                if let Some(j) = (0..w.len()).find(|&j| w[j] != w0[j]) {
                    return Err(JoinError::InconsistentWeight {
                        j,
                        first: cx.id(*g0).to_string(),
                        second: cx.id(g).to_string(),
                    });
                }
            }
        }
        let base_id = cone.base.id(base_generator_of(cone, g)).to_string();
        for (j, s) in split.into_iter().enumerate() {
            if let Some(d) = s.component {
                components[j].insert(base_id.clone(), d);
            }
        }
    }
    let (weights, _) = weights.expect("cone has generators");
    let parts = weights
        .into_iter()
        .zip(components)
        .map(|(weight, comp)| {
            if weight.is_zero() {
                Ok(Part::bullet())
            } else {
                Ok(Part { weight, component: Some(SDist::from_map(Arc::clone(&cone.base), m, comp)?) })
            }
        })
        .collect::<Result<Vec<_>, SDistError>>()?;
    Ok(JoinPoint { parts })
}

/// `p_{(c,x)}(a_0, a⃗) = λ_{a_0} · p^{(a_0)}_x(a⃗)`.
pub fn cone_assemble(cone: &Cone, jp: &JoinPoint, m: u32) -> Result<SDist, JoinError> {
    jp.check(m, &cone.base)?;
    let cx = &cone.scenario;
    let dists = cx
        .generators()
        .iter()
        .map(|&g| {
            let b = base_generator_of(cone, g);
            let slot = cone.base.generator_slot(b).expect("base generator");
            let parts: Vec<Part<Dist>> = jp
                .parts
                .iter()
                .map(|p| Part { weight: p.weight.clone(), component: p.component.as_ref().map(|c| c.dists()[slot].clone()) })
                .collect();
            Dist::join_first(m, cx.dim(g) + 1, &parts)
        })
        .collect();
    Ok(SDist::new(Arc::clone(cx), m, dists)?)
}

/// Join decompositions of the two cone halves of a suspension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuspensionPoint {
    pub up: JoinPoint,
    pub down: JoinPoint,
}

impl SuspensionPoint {
    pub fn glues(&self) -> Result<bool, SDistError> {
        Ok(self.up.mixture()? == self.down.mixture()?)
    }
}

pub fn suspension_decompose(s: &Suspension, p: &SDist) -> Result<SuspensionPoint, JoinError> {
    if **p.scenario() != *s.scenario {
        return Err(JoinError::WrongScenario);
    }
    let up = restrict_via(p, &s.up.scenario, &s.s1);
    let down = restrict_via(p, &s.down.scenario, &s.s2);
    let sp = SuspensionPoint { up: cone_decompose(&s.up, &up)?, down: cone_decompose(&s.down, &down)? };
    if !sp.glues()? {
        return Err(JoinError::GluingMismatch);
    }
    Ok(sp)
}

pub fn suspension_assemble(s: &Suspension, sp: &SuspensionPoint, m: u32) -> Result<SDist, JoinError> {
    sp.up.check(m, &s.base)?;
    sp.down.check(m, &s.base)?;
    if !sp.glues()? {
        return Err(JoinError::GluingMismatch);
    }
    let up = cone_assemble(&s.up, &sp.up, m)?;
    let down = cone_assemble(&s.down, &sp.down, m)?;
    let mut by_index: BTreeMap<usize, Dist> = BTreeMap::new();
    for (cone, leg, q) in [(&s.up, &s.s1, &up), (&s.down, &s.s2, &down)] {
        for (slot, &g) in cone.scenario.generators().iter().enumerate() {
            by_index.insert(leg[g], q.dists()[slot].clone());
        }
    }
    let dists = s.scenario.generators().iter().map(|g| by_index.remove(g).expect("generator covered")).collect();
    Ok(SDist::new(Arc::clone(&s.scenario), m, dists)?)
}

/// Result of the suspension noncontextuality LP. When feasible, the witnesses
/// `Q^{up,j}` and `Q^{down,j}` are given for every nonzero weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuspensionLpResult {
    pub noncontextual: bool,
    pub up: Vec<Option<DetMixture>>,
    pub down: Vec<Option<DetMixture>>,
}

/// Searches for mixtures `Q^{up,j}`, `Q^{down,j}` on `X` with `Θ(Q^{up,j}) = p^{up,j}`,
/// `Θ(Q^{down,j}) = p^{down,j}` and `Σ λ_j Q^{up,j} = Σ μ_j Q^{down,j}`.
pub fn suspension_noncontextuality_lp(
    s: &Suspension,
    sp: &SuspensionPoint,
    m: u32,
    caps: Caps,
) -> Result<SuspensionLpResult, JoinError> {
    let x = &s.base;
    let maps = enumerate_deterministic(x, m, caps.labelings)?;
    let coords = Coordinates::new(x, m);
    let images: Vec<Vec<usize>> = maps
        .iter()
        .map(|phi| x.generators().iter().enumerate().map(|(slot, &g)| coords.position(slot, &phi.on_simplex(x, g))).collect())
        .collect();

    // One block of weight variables per (side, j) with positive weight.
    struct Block {
        side: usize,
        j: usize,
        weight: Rat,
        target: Vec<Rat>,
        maps: Vec<usize>,
        offset: usize,
    }
    let mut blocks = Vec::new();
    let mut nvars = 0;
    for (side, jp) in [&sp.up, &sp.down].into_iter().enumerate() {
        for (j, part) in jp.parts.iter().enumerate() {
            let Some(c) = &part.component else { continue };
            let target = coords.to_vector(c);
            let kept: Vec<usize> = (0..maps.len()).filter(|&k| images[k].iter().all(|&i| target[i].is_positive())).collect();
            let n = kept.len();
            blocks.push(Block { side, j, weight: part.weight.clone(), target, maps: kept, offset: nvars });
            nvars += n;
        }
    }

    let mut a: Vec<Vec<Rat>> = Vec::new();
    let mut b: Vec<Rat> = Vec::new();
    for blk in &blocks {
        for i in (0..coords.len()).filter(|&i| blk.target[i].is_positive()) {
            let mut row = vec![Rat::zero(); nvars];
            for (col, &k) in blk.maps.iter().enumerate() {
                if images[k].contains(&i) {
                    row[blk.offset + col] = Rat::one();
                }
            }
            a.push(row);
            b.push(blk.target[i].clone());
        }
        let mut row = vec![Rat::zero(); nvars];
        for col in 0..blk.maps.len() {
            row[blk.offset + col] = Rat::one();
        }
        a.push(row);
        b.push(Rat::one());
    }
    for k in 0..maps.len() {
        let mut row = vec![Rat::zero(); nvars];
        let mut any = false;
        for blk in &blocks {
            if let Ok(col) = blk.maps.binary_search(&k) {
                row[blk.offset + col] = if blk.side == 0 { blk.weight.clone() } else { -&blk.weight };
                any = true;
            }
        }
        if any {
            a.push(row);
            b.push(Rat::zero());
        }
    }

    let mut result = SuspensionLpResult {
        noncontextual: false,
        up: vec![None; m as usize],
        down: vec![None; m as usize],
    };
    if let StandardOutcome::Feasible(w) = solve_standard(&a, &b, nvars) {
        result.noncontextual = true;
        for blk in &blocks {
            let entries = blk
                .maps
                .iter()
                .enumerate()
                .filter(|(col, _)| !w[blk.offset + col].is_zero())
                .map(|(col, &k)| (maps[k].clone(), w[blk.offset + col].clone()));
            let q = DetMixture::new(entries)?;
            if blk.side == 0 {
                result.up[blk.j] = Some(q);
            } else {
                result.down[blk.j] = Some(q);
            }
        }
    }
    Ok(result)
}
