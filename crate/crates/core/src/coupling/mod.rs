//! Exact overlaps, Kantorovich-Rubinstein distances, finite Markov chains and
//! non-anticipative couplings of two copies of a chain.

pub mod chain;
pub mod dist;
pub mod immersion;
pub mod kr;
pub mod montecarlo;
pub mod strategy;

pub use chain::{ChainError, ExplicitUniformChain, FiniteProcessLaw, UniformSteps};
pub use dist::{independent_coupling, maximal_coupling, overlap, total_variation, Dist, JointDist};
pub use immersion::{immersion_check_paths, immersion_check_strategy, pair_path_law, ImmersionVerdict, PathLaw};
pub use kr::{kr_distance, transport_cost};
pub use montecarlo::{
    half_product_bound, icosiness_probe, large_sets_check, run_coupling, wilson, BoundStatus, CouplingReport,
    CouplingRun, ProbeReport, ProbeVerdict, StartMode,
};
pub use strategy::{verify_marginals, PairScope, PairStrategy, Strategy, StrategySpec};

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct SeparationBound {
    pub n: i64,
    /// Smallest P[next ≠] over distinct state pairs under any coupling:
    /// 1 − max overlap.
    #[serde(with = "crate::rational::serde_str")]
    pub worst_separation: BigRational,
    pub worst_pair: Option<(u64, u64)>,
    pub pairs_checked: u128,
}

/// Exhaustive scan of the step out of depth d: for every distinct pair of
/// states, 1 − overlap of the two step laws. Equal states give the trivial
/// bound 0 and are skipped.
pub fn step_separation_bound(chain: &dyn UniformSteps, d: u64, budget: u128) -> Result<SeparationBound, ChainError> {
    let n = chain.state_count(d);
    let pairs = n as u128 * (n as u128).saturating_sub(1) / 2;
    if pairs > budget {
        return Err(ChainError::BudgetExceeded { needed: pairs, budget });
    }
    let r = chain.step_size(d);
    let mut best = (0u64, None);
    for a in 0..n {
        for b in a + 1..n {
            let k = chain.common_count(d, a, b);
            if k > best.0 || best.1.is_none() {
                best = (k, Some((a, b)));
            }
        }
    }
    Ok(SeparationBound {
        n: crate::sequences::index_of_depth(d),
        worst_separation: BigRational::one() - BigRational::new(best.0.into(), r.into()),
        worst_pair: best.1,
        pairs_checked: pairs,
    })
}
