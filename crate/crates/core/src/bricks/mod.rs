//! Partition families, strong bricks, the geometric brick over (F_p)⁵ and
//! chains glued from bricks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod brick;
pub mod chain;
pub mod family;
pub mod geometric;

pub use brick::{family_by_name, verify_family, verify_strong_brick, BrickReport, Clause, FamilyReport, Status, StrongBrick, DEFAULT_BUDGET};
pub use chain::{exact_window_check, product_type_witness, GlueMode, GluedChain, WitnessKind, WitnessReport};
pub use family::{Mode, PartitionFamily};
pub use geometric::{verify_geometric_brick, GeometricBrick, GeometricReport, Rho0Scope};

use crate::exec::Execution;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BrickError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("invariant {clause} violated: {witness}")]
    Invariant { clause: String, witness: String },
    #[error("incompatible bricks: {0}")]
    Incompatible(String),
}

/// Brick file: `{"family": "quartic", "q": 5, "mode": "materialized"}`
/// or `{"family": "geometric", "p": 2}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrickSpec {
    pub family: String,
    #[serde(default)]
    pub p: Option<u32>,
    #[serde(default)]
    pub q: Option<u64>,
    #[serde(default)]
    pub mode: Mode,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum AnyBrickReport {
    Geometric(GeometricReport),
    Strong(BrickReport),
}

impl AnyBrickReport {
    pub fn has_failure(&self) -> bool {
        match self {
            AnyBrickReport::Geometric(r) => !r.passes(),
            AnyBrickReport::Strong(r) => r.has_failure(),
        }
    }

    /// Some clause was only checked on a sample.
    pub fn is_partial(&self) -> bool {
        match self {
            AnyBrickReport::Geometric(r) => !r.rho0_exhaustive,
            AnyBrickReport::Strong(r) => !r.passes() && !r.has_failure(),
        }
    }
}

/// Builds and verifies the brick a brick file describes.
pub fn verify_spec(spec: &BrickSpec, budget: u64, seed: u64, exec: Execution) -> Result<AnyBrickReport, BrickError> {
    match spec.family.as_str() {
        "geometric" => {
            let p = spec.p.ok_or_else(|| BrickError::BadParameter("geometric brick needs p".into()))?;
            let b = GeometricBrick::new(p)?;
            // Each ρ₀ is a transport problem on (p+1)p⁴ lines per side.
            let scope = match p {
                2 => Rho0Scope::All,
                3 => Rho0Scope::Sample { pairs: 64, seed },
                _ => Rho0Scope::Skip,
            };
            Ok(AnyBrickReport::Geometric(verify_geometric_brick(&b, scope, exec)))
        }
        name => {
            let q = spec.q.ok_or_else(|| BrickError::BadParameter(format!("{name} family needs q")))?;
            let fam = brick::family_by_name(name, q, spec.mode)?;
            let b = StrongBrick::assemble(fam, budget, exec)?;
            Ok(AnyBrickReport::Strong(verify_strong_brick(&b, budget, seed, exec)))
        }
    }
}
