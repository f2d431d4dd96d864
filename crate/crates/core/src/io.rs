//! JSON wire formats. Rationals are always "a/b" strings.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dist::{Dist, Outcome, Part};
use crate::join::{JoinPoint, SuspensionPoint};
use crate::polytope::{AffineFunctional, CoordIndex, Coordinates, NoncontextualityCertificate, Verdict};
use crate::rational::Rat;
use crate::scenario::Scenario;
use crate::sdist::{DetMixture, DeterministicMap, SDist, SDistError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbEntry {
    pub outcome: Outcome,
    pub prob: Rat,
}

/// `{"m", "generators": {id: [{outcome, prob}]}}`; omitted outcomes have probability 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SDistJson {
    pub m: u32,
    pub generators: BTreeMap<String, Vec<ProbEntry>>,
}

impl SDistJson {
    pub fn from_sdist(p: &SDist) -> Self {
        let x = p.scenario();
        let generators = x
            .generators()
            .iter()
            .zip(p.dists())
            .map(|(&g, d)| {
                let entries = d.support().map(|(o, r)| ProbEntry { outcome: o.clone(), prob: r.clone() }).collect();
                (x.id(g).to_string(), entries)
            })
            .collect();
        SDistJson { m: p.m(), generators }
    }

    pub fn to_sdist(&self, x: &Arc<Scenario>) -> Result<SDist, SDistError> {
        let mut dists = BTreeMap::new();
        for (id, entries) in &self.generators {
            let k = x.lookup(id).ok_or_else(|| SDistError::NotAGenerator(id.clone()))?;
            let arity = x.dim(k) + 1;
            let d = Dist::new(self.m, arity, entries.iter().map(|e| (e.outcome.clone(), e.prob.clone())))?;
            dists.insert(id.clone(), d);
        }
        SDist::from_map(Arc::clone(x), self.m, dists)
    }
}

/// Vertex id → label.
pub type LabelsJson = BTreeMap<String, u32>;

pub fn labels_to_json(phi: &DeterministicMap, x: &Scenario) -> LabelsJson {
    phi.to_labels(x)
}

pub fn labels_from_json(x: &Scenario, m: u32, labels: &LabelsJson) -> Result<DeterministicMap, SDistError> {
    DeterministicMap::from_labels(x, m, labels)
}

/// One `⟨λ_j, p^(j)⟩` with `null` for •.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartJson {
    pub weight: Rat,
    pub dist: Option<SDistJson>,
}

pub type JoinPointJson = Vec<PartJson>;

pub fn join_to_json(jp: &JoinPoint) -> JoinPointJson {
    jp.parts
        .iter()
        .map(|p| PartJson { weight: p.weight.clone(), dist: p.component.as_ref().map(SDistJson::from_sdist) })
        .collect()
}

pub fn join_from_json(base: &Arc<Scenario>, parts: &JoinPointJson) -> Result<JoinPoint, SDistError> {
    let parts = parts
        .iter()
        .map(|p| {
            Ok(Part { weight: p.weight.clone(), component: p.dist.as_ref().map(|d| d.to_sdist(base)).transpose()? })
        })
        .collect::<Result<_, SDistError>>()?;
    Ok(JoinPoint { parts })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuspensionPointJson {
    pub up: JoinPointJson,
    pub down: JoinPointJson,
}

impl SuspensionPointJson {
    pub fn from_point(sp: &SuspensionPoint) -> Self {
        SuspensionPointJson { up: join_to_json(&sp.up), down: join_to_json(&sp.down) }
    }

    pub fn to_point(&self, base: &Arc<Scenario>) -> Result<SuspensionPoint, SDistError> {
        Ok(SuspensionPoint { up: join_from_json(base, &self.up)?, down: join_from_json(base, &self.down)? })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixtureEntry {
    pub labels: LabelsJson,
    pub weight: Rat,
}

/// A contextuality verdict with its witness: mixture weights when noncontextual,
/// the separating functional (with its coordinate index) when contextual.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixture: Option<Vec<MixtureEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<AffineFunctional>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Vec<CoordIndex>>,
}

impl CertificateJson {
    pub fn from_certificate(cert: &NoncontextualityCertificate, x: &Arc<Scenario>, m: u32) -> Self {
        match cert {
            NoncontextualityCertificate::Noncontextual(q) => CertificateJson {
                verdict: Verdict::Noncontextual,
                mixture: Some(
                    q.weights()
                        .iter()
                        .map(|(phi, w)| MixtureEntry { labels: phi.to_labels(x), weight: w.clone() })
                        .collect(),
                ),
                functional: None,
                coordinates: None,
            },
            NoncontextualityCertificate::Contextual(f) => CertificateJson {
                verdict: Verdict::Contextual,
                mixture: None,
                functional: Some(f.clone()),
                coordinates: Some(Coordinates::new(x, m).index()),
            },
        }
    }

    pub fn to_certificate(&self, x: &Arc<Scenario>, m: u32) -> Result<NoncontextualityCertificate, SDistError> {
        match (self.verdict, &self.mixture, &self.functional) {
            (Verdict::Noncontextual, Some(entries), _) => {
                let weights = entries
                    .iter()
                    .map(|e| Ok((DeterministicMap::from_labels(x, m, &e.labels)?, e.weight.clone())))
                    .collect::<Result<Vec<_>, SDistError>>()?;
                Ok(NoncontextualityCertificate::Noncontextual(DetMixture::new(weights)?))
            }
            (Verdict::Contextual, _, Some(f)) => Ok(NoncontextualityCertificate::Contextual(f.clone())),
            _ => Err(SDistError::BadMixture(Rat::zero())),
        }
    }
}
