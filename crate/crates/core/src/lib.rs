//! Exact computations with simplicial distributions on measurement scenarios.
//!
//! The crate covers scenario construction (cycles, lines, cones, suspensions),
//! distributions and simplicial distributions with exact rational arithmetic,
//! contextuality and vertex certification, vertex enumeration, join
//! decompositions on cones and suspensions, Bell inequalities and their lift to
//! cones, and two constructions of contextual vertices on suspensions.

pub mod bell;
pub mod dd;
pub mod dist;
pub mod factory;
pub mod io;
pub mod join;
pub mod linalg;
pub mod lp;
pub mod polytope;
pub mod rational;
pub mod sampling;
pub mod scenario;
pub mod sdist;

pub use dist::{Dist, Outcome, Part};
pub use rational::Rat;
pub use scenario::{Scenario, ScenarioSpec};
pub use sdist::{DetMixture, DeterministicMap, SDist};
