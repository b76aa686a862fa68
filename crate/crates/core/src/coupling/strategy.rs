//! Pair strategies: how two copies of a uniform-step chain move together.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::chain::{ChainError, UniformSteps};
use super::dist::{independent_coupling, maximal_coupling, JointDist};
use crate::exec::{map_reduce, rng_for, Execution};
use crate::sequences::index_of_depth;

/// A coupling of one step of two copies. `joint` is the exact law; `sample`
/// must draw from it.
pub trait PairStrategy: Sync {
    fn name(&self) -> String;

    fn joint(&self, chain: &dyn UniformSteps, d: u64, a: u64, b: u64) -> JointDist;

    fn sample(&self, chain: &dyn UniformSteps, d: u64, a: u64, b: u64, rng: &mut dyn rand::RngCore) -> (u64, u64) {
        self.joint(chain, d, a, b).sample(rng)
    }

    /// Exact marginals of the joint step law, point by point.
    fn marginals(&self, chain: &dyn UniformSteps, d: u64, a: u64, b: u64) -> (Marginal, Marginal) {
        let joint = self.joint(chain, d, a, b);
        let side = |first| Marginal::collect(joint.total, joint.marginal(first));
        (side(true), side(false))
    }
}

/// Point masses `weight / total` of one marginal, ascending by state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marginal {
    pub total: u128,
    pub atoms: Vec<(u64, u128)>,
}

impl Marginal {
    /// Merges repeated states and drops zero weights; `total` is kept as
    /// given, so the masses need not sum to one.
    pub fn collect(total: u128, points: impl IntoIterator<Item = (u64, u128)>) -> Marginal {
        let mut v: Vec<(u64, u128)> = points.into_iter().filter(|&(_, w)| w > 0).collect();
        v.sort_unstable_by_key(|&(x, _)| x);
        let mut atoms: Vec<(u64, u128)> = Vec::with_capacity(v.len());
        for (x, w) in v {
            match atoms.last_mut() {
                Some((y, q)) if *y == x => *q += w,
                _ => atoms.push((x, w)),
            }
        }
        Marginal { total, atoms }
    }

    pub fn prob(&self, s: u64) -> BigRational {
        let w = self.atoms.binary_search_by_key(&s, |&(x, _)| x).map_or(0, |i| self.atoms[i].1);
        BigRational::new(BigInt::from(w), BigInt::from(self.total))
    }
}

fn matches_kernel(m: &Marginal, chain: &dyn UniformSteps, d: u64, s: u64) -> bool {
    let k = chain.kernel(d, s);
    let kt = k.total() as u128;
    m.atoms.len() == k.atoms().len()
        && m.atoms.iter().zip(k.atoms()).all(|(&(x, w), &(y, kw))| {
            x == y && w.checked_mul(kt).is_some_and(|l| Some(l) == (kw as u128).checked_mul(m.total))
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Maximal coupling of the two step laws at every pair state.
    GreedyMaximal,
    /// Both copies use the same innovation index.
    Diagonal,
    IndependentProduct,
}

/// Strategy file: `{"type": "greedy_maximal"}`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategySpec {
    #[serde(rename = "type")]
    pub kind: Strategy,
}

/// Draws from the support out of `a` minus the support out of `b`, given
/// that it has `r − common` points.
fn sample_outside(chain: &dyn UniformSteps, d: u64, a: u64, b: u64, rng: &mut dyn rand::RngCore) -> u64 {
    let r = chain.step_size(d);
    loop {
        let x = chain.step_point(d, a, rng.random_range(0..r));
        if chain.step_rank(d, b, x).is_none() {
            return x;
        }
    }
}

impl PairStrategy for Strategy {
    fn name(&self) -> String {
        match self {
            Strategy::GreedyMaximal => "greedy_maximal",
            Strategy::Diagonal => "diagonal",
            Strategy::IndependentProduct => "independent_product",
        }
        .into()
    }

    fn joint(&self, chain: &dyn UniformSteps, d: u64, a: u64, b: u64) -> JointDist {
        match self {
            Strategy::GreedyMaximal => maximal_coupling(&chain.kernel(d, a), &chain.kernel(d, b)),
            Strategy::Diagonal => JointDist::new(
                (0..chain.step_size(d))
                    .map(|i| ((chain.step_point(d, a, i), chain.step_point(d, b, i)), 1))
                    .collect(),
            ),
            Strategy::IndependentProduct => independent_coupling(&chain.kernel(d, a), &chain.kernel(d, b)),
        }
    }

    /// Marginals from the structure the sampler draws from, without
    /// materialising the joint (r² atoms for large supports).
    fn marginals(&self, chain: &dyn UniformSteps, d: u64, a: u64, b: u64) -> (Marginal, Marginal) {
        let r = chain.step_size(d);
        match self {
            Strategy::GreedyMaximal => {
                let k = if a == b { r } else { chain.common_count(d, a, b) };
                let common: Vec<u64> = if a == b {
                    chain.step_support(d, a)
                } else {
                    (0..k).map(|i| chain.common_point(d, a, b, i)).collect()
                };
                let outside = |x: u64, y: u64| -> Vec<u64> {
                    chain.step_support(d, x).into_iter().filter(|&z| chain.step_rank(d, y, z).is_none()).collect()
                };
                // Merge mass k/r spread over the k common points, the rest
                // (r − k)/r over the points only this copy can reach; all
                // over the common denominator r·k·|own|.
                let side = |own: Vec<u64>| {
                    let o = own.len() as u128;
                    let (r, k) = (r as u128, k as u128);
                    let total = r * k.max(1) * o.max(1);
                    let per_common = if k == 0 { 0 } else { total / r };
                    let per_rest = if o == 0 { 0 } else { total / (r * o) * (r - k) };
                    Marginal::collect(
                        total,
                        common.iter().map(|&c| (c, per_common)).chain(own.into_iter().map(|z| (z, per_rest))),
                    )
                };
                if a == b {
                    (side(Vec::new()), side(Vec::new()))
                } else {
                    (side(outside(a, b)), side(outside(b, a)))
                }
            }
            Strategy::Diagonal => {
                let pts = |s| Marginal::collect(r as u128, (0..r).map(|i| (chain.step_point(d, s, i), 1)));
                (pts(a), pts(b))
            }
            Strategy::IndependentProduct => {
                let pts = |s| Marginal::collect(r as u128, chain.step_support(d, s).into_iter().map(|x| (x, 1)));
                (pts(a), pts(b))
            }
        }
    }

    fn sample(&self, chain: &dyn UniformSteps, d: u64, a: u64, b: u64, rng: &mut dyn rand::RngCore) -> (u64, u64) {
        let r = chain.step_size(d);
        match self {
            Strategy::GreedyMaximal => {
                if a == b {
                    let x = chain.step_point(d, a, rng.random_range(0..r));
                    return (x, x);
                }
                // Both laws are uniform on r points sharing k of them: meet
                // with probability k/r at a uniform common point, else move
                // independently on the two set differences.
                let k = chain.common_count(d, a, b);
                if rng.random_range(0..r) < k {
                    let x = chain.common_point(d, a, b, rng.random_range(0..k));
                    (x, x)
                } else {
                    (sample_outside(chain, d, a, b, rng), sample_outside(chain, d, b, a, rng))
                }
            }
            Strategy::Diagonal => {
                let i = rng.random_range(0..r);
                (chain.step_point(d, a, i), chain.step_point(d, b, i))
            }
            Strategy::IndependentProduct => (
                chain.step_point(d, a, rng.random_range(0..r)),
                chain.step_point(d, b, rng.random_range(0..r)),
            ),
        }
    }
}

/// Which state pairs the marginal-consistency check visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairScope {
    /// Every pair when the level has at most `budget` pairs, else `sample`
    /// seeded random pairs plus their diagonal.
    Auto { budget: u64, sample: u64, seed: u64 },
    Exhaustive,
}

impl Default for PairScope {
    fn default() -> Self {
        PairScope::Auto { budget: 1 << 24, sample: 2000, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelConsistency {
    pub n: i64,
    pub pairs_checked: u64,
    pub exhaustive: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyReport {
    pub strategy: String,
    pub levels: Vec<LevelConsistency>,
}

impl ConsistencyReport {
    pub fn exhaustive(&self) -> bool {
        self.levels.iter().all(|l| l.exhaustive)
    }
}

/// Checks that each marginal of every joint step kernel is the copy's own
/// kernel. This is the immersion contract for strategy-built pair chains.
pub fn verify_marginals(
    chain: &dyn UniformSteps,
    strat: &dyn PairStrategy,
    scope: PairScope,
    exec: Execution,
) -> Result<ConsistencyReport, ChainError> {
    let mut levels = Vec::new();
    for d in (1..=chain.depth()).rev() {
        let n = chain.state_count(d);
        let check = |a: u64, b: u64| -> Option<String> {
            let (first, second) = strat.marginals(chain, d, a, b);
            if !matches_kernel(&first, chain, d, a) {
                Some(format!("first marginal at pair ({a},{b}) differs from the copy kernel"))
            } else if !matches_kernel(&second, chain, d, b) {
                Some(format!("second marginal at pair ({a},{b}) differs from the copy kernel"))
            } else {
                None
            }
        };
        let pairs = n as u128 * n as u128;
        let (witness, checked, exhaustive) = match scope {
            PairScope::Auto { budget, .. } if pairs > budget as u128 => {
                let PairScope::Auto { sample, seed, .. } = scope else { unreachable!() };
                // Each check lists both supports, so large steps get fewer pairs.
                let sample = sample.min((1u64 << 20) / chain.step_size(d)).max(32);
                let w = map_reduce(
                    exec,
                    sample,
                    None,
                    |i| {
                        let mut rng = rng_for(seed, "marginal_pairs", d * sample + i);
                        let a = rng.random_range(0..n);
                        // Equal states, neighbouring codes and codes one step
                        // size apart alongside uniform pairs.
                        let b = match i % 8 {
                            0 => a,
                            1 => a ^ 1,
                            2 => (a + chain.step_size(d)) % n,
                            _ => rng.random_range(0..n),
                        };
                        check(a, b.min(n - 1))
                    },
                    |x: Option<String>, y| x.or(y),
                );
                (w, sample, false)
            }
            _ => {
                let w = map_reduce(
                    exec,
                    n,
                    None,
                    |a| (0..n).find_map(|b| check(a, b)),
                    |x: Option<String>, y| x.or(y),
                );
                (w, n * n, true)
            }
        };
        if let Some(detail) = witness {
            return Err(ChainError::InconsistentStrategy { level: index_of_depth(d), detail });
        }
        levels.push(LevelConsistency { n: index_of_depth(d), pairs_checked: checked, exhaustive });
    }
    Ok(ConsistencyReport { strategy: strat.name(), levels })
}
