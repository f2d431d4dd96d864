//! Reading input files, with digests recorded for the run report.

use std::fmt::Display;
use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use sha2::{Digest, Sha256};

use sctx_core::polytope::Caps;
use sctx_core::scenario::{Scenario, ScenarioSpec};

use crate::report::InputDigest;

/// Failure classes that map to exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad input: parse errors, validation failures, refused constructions.
    Validation(String),
    Internal(String),
}

impl Failure {
    pub fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Internal(m) => m,
        }
    }
}

pub fn invalid(e: impl Display) -> Failure {
    Failure::Validation(e.to_string())
}

pub fn internal(e: impl Display) -> Failure {
    Failure::Internal(e.to_string())
}

#[derive(Default)]
pub struct Inputs {
    pub digests: Vec<InputDigest>,
}

impl Inputs {
    pub fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let bytes = std::fs::read(path).map_err(|e| internal(format!("{}: {e}", path.display())))?;
        self.digests.push(InputDigest { path: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) });
        String::from_utf8(bytes).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }

    pub fn json<T: DeserializeOwned>(&mut self, path: &Path) -> Result<T, Failure> {
        let text = self.read(path)?;
        serde_json::from_str(&text)
            .map_err(|e| invalid(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column())))
    }

    pub fn scenario(&mut self, path: &Path) -> Result<Arc<Scenario>, Failure> {
        Ok(self.scenario_with_m(path)?.0)
    }

    /// The scenario together with its optional `"m"` field.
    pub fn scenario_with_m(&mut self, path: &Path) -> Result<(Arc<Scenario>, Option<u32>), Failure> {
        let spec: ScenarioSpec = self.json(path)?;
        let x = parse_scenario(&spec).map_err(|e| invalid(format!("{}: {}", path.display(), e.message())))?;
        Ok((x, spec.m))
    }
}

pub fn parse_scenario(spec: &ScenarioSpec) -> Result<Arc<Scenario>, Failure> {
    Scenario::from_spec(spec).map(Arc::new).map_err(invalid)
}

/// `SCTX_CAP=<coordinates>[,<labelings>]`.
pub fn caps_from_env() -> Result<Caps, Failure> {
    let mut caps = Caps::default();
    let Ok(v) = std::env::var("SCTX_CAP") else { return Ok(caps) };
    let mut parts = v.split(',');
    let bad = || invalid(format!("SCTX_CAP must be <coordinates>[,<labelings>], got {v:?}"));
    if let Some(c) = parts.next() {
        caps.coordinates = c.trim().parse().map_err(|_| bad())?;
    }
    if let Some(l) = parts.next() {
        caps.labelings = l.trim().parse().map_err(|_| bad())?;
    }
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(caps)
}
