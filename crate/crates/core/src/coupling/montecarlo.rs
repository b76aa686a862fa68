//! Monte Carlo runs of a pair chain, Wilson intervals and the bound checks
//! built on them.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::chain::{ChainError, UniformSteps};
use super::strategy::{verify_marginals, PairScope, PairStrategy};
use crate::exec::{map_reduce, rng_for, Execution};
use crate::rational;
use crate::sequences::index_of_depth;

/// Deepest level supported by the difference masks.
pub const MAX_DEPTH: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum StartMode {
    /// The copies evolve independently down to `depth` (default: deepest
    /// level) and are coupled from there on.
    Independent { depth: Option<u64> },
    /// One shared path down to `depth`, coupled from there on.
    Identical { depth: Option<u64> },
}

impl StartMode {
    fn depth(self, chain: &dyn UniformSteps) -> u64 {
        let d = match self {
            StartMode::Independent { depth } | StartMode::Identical { depth } => depth,
        };
        d.unwrap_or(chain.depth()).min(chain.depth())
    }
}

/// Outcome counts of a run: `masks[m]` replicates had copies differing
/// exactly at the depths whose bits are set in m.
#[derive(Debug, Clone, Serialize)]
pub struct CouplingRun {
    pub strategy: String,
    pub start: StartMode,
    pub start_depth: u64,
    pub depth: u64,
    pub replicates: u64,
    pub seed: u64,
    pub masks: BTreeMap<u32, u64>,
}

impl CouplingRun {
    /// Replicates whose copies differ at every depth in `depths`.
    pub fn count_all_differ(&self, depths: &[u64]) -> u64 {
        let want: u32 = depths.iter().map(|&d| 1u32 << d).sum();
        self.masks.iter().filter(|(&m, _)| m & want == want).map(|(_, &c)| c).sum()
    }

    pub fn count_differ(&self, d: u64) -> u64 {
        self.count_all_differ(&[d])
    }
}

fn pair_path(
    chain: &dyn UniformSteps,
    strat: &dyn PairStrategy,
    start: StartMode,
    start_depth: u64,
    rng: &mut dyn rand::RngCore,
) -> u32 {
    let m = chain.depth();
    let mut a = chain.sample_start(rng);
    let mut b = match start {
        StartMode::Independent { .. } => chain.sample_start(rng),
        StartMode::Identical { .. } => a,
    };
    let mut mask = (a != b) as u32 * (1 << m);
    for d in (1..=m).rev() {
        (a, b) = if d > start_depth {
            let x = chain.step_point(d, a, rng.random_range(0..chain.step_size(d)));
            let y = match start {
                StartMode::Independent { .. } => chain.step_point(d, b, rng.random_range(0..chain.step_size(d))),
                StartMode::Identical { .. } => x,
            };
            (x, y)
        } else {
            strat.sample(chain, d, a, b, rng)
        };
        if a != b {
            mask |= 1 << (d - 1);
        }
    }
    mask
}

/// Simulates `replicates` pair paths after checking the strategy's
/// marginals. Replicate i uses the seed derived from (seed, "coupling", i).
pub fn run_coupling(
    chain: &dyn UniformSteps,
    strat: &dyn PairStrategy,
    start: StartMode,
    replicates: u64,
    seed: u64,
    scope: PairScope,
    exec: Execution,
) -> Result<CouplingRun, ChainError> {
    if chain.depth() > MAX_DEPTH {
        return Err(ChainError::BudgetExceeded { needed: chain.depth() as u128, budget: MAX_DEPTH as u128 });
    }
    verify_marginals(chain, strat, scope, exec)?;
    let start_depth = start.depth(chain);
    let chunk = 1024u64;
    let masks = map_reduce(
        exec,
        replicates.div_ceil(chunk),
        BTreeMap::new(),
        |c| {
            let mut local = BTreeMap::new();
            for i in c * chunk..((c + 1) * chunk).min(replicates) {
                let mut rng = rng_for(seed, "coupling", i);
                *local.entry(pair_path(chain, strat, start, start_depth, &mut rng)).or_insert(0u64) += 1;
            }
            local
        },
        |mut x, y| {
            for (k, v) in y {
                *x.entry(k).or_insert(0) += v;
            }
            x
        },
    );
    Ok(CouplingRun {
        strategy: strat.name(),
        start,
        start_depth,
        depth: chain.depth(),
        replicates,
        seed,
        masks,
    })
}

/// Wilson score interval for `k` successes in `n` trials at the given
/// two-sided confidence.
pub fn wilson(k: u64, n: u64, confidence: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(0.5 + confidence / 2.0);
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

pub const CONFIDENCE: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    /// The whole interval respects the bound.
    Pass,
    /// The estimate or part of the interval is on the wrong side.
    Inconclusive,
    /// The whole interval is on the wrong side.
    Violation,
    NoBound,
}

fn status_lower(ci_low: f64, ci_high: f64, bound: Option<f64>) -> BoundStatus {
    match bound {
        None => BoundStatus::NoBound,
        Some(b) if ci_low >= b => BoundStatus::Pass,
        Some(b) if ci_high < b => BoundStatus::Violation,
        Some(_) => BoundStatus::Inconclusive,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelRow {
    pub level: i64,
    pub neq_count: u64,
    #[serde(with = "rational::serde_str")]
    pub p_neq_exact: BigRational,
    pub p_neq_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    #[serde(serialize_with = "rational::serialize_opt")]
    pub bound: Option<BigRational>,
    pub status: BoundStatus,
}

/// P[≠ at the shallower level] ≥ factor · P[≠ at the deeper level].
#[derive(Debug, Clone, Serialize)]
pub struct StepRow {
    pub from_level: i64,
    pub to_level: i64,
    #[serde(with = "rational::serde_str")]
    pub factor: BigRational,
    pub lhs_estimate: f64,
    pub rhs_estimate: f64,
    pub status: BoundStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct CouplingReport {
    pub schema_version: u32,
    pub strategy: String,
    pub start: StartMode,
    pub start_level: i64,
    pub replicates: u64,
    pub seed: u64,
    pub confidence: f64,
    pub levels: Vec<LevelRow>,
    pub steps: Vec<StepRow>,
}

pub const REPORT_SCHEMA_VERSION: u32 = 1;

impl CouplingReport {
    /// `bounds` gives lower bounds on P[≠] per depth; `floors[d]` is a
    /// guaranteed lower bound on P[≠ at d−1 | ≠ at d] (None: no guarantee),
    /// and `step_pairs` lists (deeper, shallower) depth pairs to compare with
    /// the product of the floors in between.
    pub fn new(
        run: &CouplingRun,
        bounds: &BTreeMap<u64, BigRational>,
        floors: &[Option<BigRational>],
        step_pairs: &[(u64, u64)],
    ) -> CouplingReport {
        let n = run.replicates;
        let levels = (0..=run.start_depth)
            .rev()
            .map(|d| {
                let k = run.count_differ(d);
                let (lo, hi) = wilson(k, n, CONFIDENCE);
                let bound = bounds.get(&d).cloned();
                LevelRow {
                    level: index_of_depth(d),
                    neq_count: k,
                    p_neq_exact: BigRational::new(BigInt::from(k), BigInt::from(n.max(1))),
                    p_neq_estimate: k as f64 / n.max(1) as f64,
                    ci_low: lo,
                    ci_high: hi,
                    status: status_lower(lo, hi, bound.as_ref().map(rational::to_f64)),
                    bound,
                }
            })
            .collect();
        let steps = step_pairs
            .iter()
            .filter_map(|&(deep, shallow)| {
                let factor = (shallow + 1..=deep).try_fold(BigRational::one(), |acc, d| {
                    floors.get(d as usize).cloned().flatten().map(|f| acc * f)
                })?;
                let f = rational::to_f64(&factor);
                let (kd, ks) = (run.count_differ(deep), run.count_differ(shallow));
                let (dlo, _) = wilson(kd, n, CONFIDENCE);
                let (slo, shi) = wilson(ks, n, CONFIDENCE);
                let (_, dhi) = wilson(kd, n, CONFIDENCE);
                let status = if slo >= f * dhi {
                    BoundStatus::Pass
                } else if shi < f * dlo {
                    BoundStatus::Violation
                } else {
                    BoundStatus::Inconclusive
                };
                Some(StepRow {
                    from_level: index_of_depth(deep),
                    to_level: index_of_depth(shallow),
                    factor,
                    lhs_estimate: ks as f64 / n.max(1) as f64,
                    rhs_estimate: f * kd as f64 / n.max(1) as f64,
                    status,
                })
            })
            .collect();
        CouplingReport {
            schema_version: REPORT_SCHEMA_VERSION,
            strategy: run.strategy.clone(),
            start: run.start,
            start_level: index_of_depth(run.start_depth),
            replicates: n,
            seed: run.seed,
            confidence: CONFIDENCE,
            levels,
            steps,
        }
    }

    pub fn has_violation(&self) -> bool {
        self.levels.iter().any(|l| l.status == BoundStatus::Violation)
            || self.steps.iter().any(|s| s.status == BoundStatus::Violation)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("level,neq_count,p_neq_exact,p_neq_estimate,ci_low,ci_high,bound,status\n");
        for l in &self.levels {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                l.level,
                l.neq_count,
                rational::format(&l.p_neq_exact),
                l.p_neq_estimate,
                l.ci_low,
                l.ci_high,
                l.bound.as_ref().map(rational::format).unwrap_or_default(),
                serde_json::to_value(l.status).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
            ));
        }
        out
    }
}

/// ½ · Π (1 − α_k).
pub fn half_product_bound(alphas: &[BigRational]) -> BigRational {
    alphas.iter().fold(BigRational::new(1.into(), 2.into()), |acc, a| acc * (BigRational::one() - a))
}

#[derive(Debug, Clone, Serialize)]
pub struct LargeSetsRow {
    /// Deepest level n of the intersection ∩_{n≤k≤0} [Y′_k ≠ Y″_k].
    pub level: i64,
    pub count: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// (1 − |E_n|⁻¹) · Π_{n<k≤0} γ_k.
    #[serde(with = "rational::serde_str")]
    pub bound: BigRational,
    /// Exact probability under independent copies of independent uniform
    /// variables: Π_{n≤k≤0} (1 − |E_k|⁻¹).
    #[serde(with = "rational::serde_str")]
    pub exact: BigRational,
    pub status: BoundStatus,
}

/// The recursion bound on P[∩ [Y′_k ≠ Y″_k]] for independent copies, with
/// Y_k the states at `depths` (shallowest first) and `gammas[i]` the
/// per-step constant into `depths[i]`.
pub fn large_sets_check(
    chain: &dyn UniformSteps,
    run: &CouplingRun,
    depths: &[u64],
    gammas: &[BigRational],
) -> Vec<LargeSetsRow> {
    let n = run.replicates;
    (0..depths.len())
        .map(|i| {
            let window = &depths[..=i];
            let size = chain.state_count(depths[i]);
            let miss = |s: u64| BigRational::one() - BigRational::new(1.into(), BigInt::from(s));
            let bound = gammas[..i].iter().fold(miss(size), |acc, g| acc * g);
            let exact = window.iter().fold(BigRational::one(), |acc, &d| acc * miss(chain.state_count(d)));
            let k = run.count_all_differ(window);
            let (lo, hi) = wilson(k, n, CONFIDENCE);
            LargeSetsRow {
                level: index_of_depth(depths[i]),
                count: k,
                estimate: k as f64 / n.max(1) as f64,
                ci_low: lo,
                ci_high: hi,
                status: status_lower(lo, hi, Some(rational::to_f64(&bound))),
                bound,
                exact,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    pub strategy: String,
    pub neq_count: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeVerdict {
    /// The analytic bound exceeds δ: no non-anticipative coupling with
    /// independent start brings the target copies within δ.
    Negated,
    /// Some supplied strategy has its whole interval at or below δ.
    Achieved,
    /// Neither; nothing is claimed beyond the window.
    Reported,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub target_level: i64,
    pub delta: f64,
    pub rows: Vec<ProbeRow>,
    pub min_estimate: f64,
    #[serde(serialize_with = "rational::serialize_opt")]
    pub analytic_bound: Option<BigRational>,
    pub verdict: ProbeVerdict,
}

/// Estimates min over `strategies` of P[R′ ≠ R″] for R = `target(Z_d)` at
/// depth `target_depth`.
#[allow(clippy::too_many_arguments)]
pub fn icosiness_probe(
    chain: &dyn UniformSteps,
    target_depth: u64,
    target: &(dyn Fn(u64) -> u64 + Sync),
    delta: f64,
    strategies: &[&dyn PairStrategy],
    start: StartMode,
    analytic_bound: Option<BigRational>,
    replicates: u64,
    seed: u64,
    exec: Execution,
) -> Result<ProbeReport, ChainError> {
    let m = chain.depth();
    let start_depth = start.depth(chain);
    let mut rows = Vec::new();
    for (si, strat) in strategies.iter().enumerate() {
        verify_marginals(chain, *strat, PairScope::default(), exec)?;
        let k = map_reduce(
            exec,
            replicates,
            0u64,
            |i| {
                let mut rng = rng_for(seed, "probe", i + (si as u64) * replicates);
                let mut a = chain.sample_start(&mut rng);
                let mut b = match start {
                    StartMode::Independent { .. } => chain.sample_start(&mut rng),
                    StartMode::Identical { .. } => a,
                };
                for d in (target_depth + 1..=m).rev() {
                    (a, b) = if d > start_depth {
                        let x = chain.step_point(d, a, rng.random_range(0..chain.step_size(d)));
                        let y = match start {
                            StartMode::Independent { .. } => chain.step_point(d, b, rng.random_range(0..chain.step_size(d))),
                            StartMode::Identical { .. } => x,
                        };
                        (x, y)
                    } else {
                        strat.sample(chain, d, a, b, &mut rng)
                    };
                }
                (target(a) != target(b)) as u64
            },
            |x, y| x + y,
        );
        let (lo, hi) = wilson(k, replicates, CONFIDENCE);
        rows.push(ProbeRow {
            strategy: strat.name(),
            neq_count: k,
            estimate: k as f64 / replicates.max(1) as f64,
            ci_low: lo,
            ci_high: hi,
        });
    }
    let min_estimate = rows.iter().map(|r| r.estimate).fold(f64::INFINITY, f64::min);
    let verdict = if analytic_bound.as_ref().is_some_and(|b| !b.is_zero() && rational::to_f64(b) > delta) {
        ProbeVerdict::Negated
    } else if rows.iter().any(|r| r.ci_high <= delta) {
        ProbeVerdict::Achieved
    } else {
        ProbeVerdict::Reported
    };
    Ok(ProbeReport {
        target_level: index_of_depth(target_depth),
        delta,
        rows,
        min_estimate,
        analytic_bound,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::super::strategy::Strategy;
    use super::*;
    use crate::coupling::chain::{ExplicitUniformChain, FiniteProcessLaw};
    use crate::coupling::dist::Dist;

    fn chain() -> ExplicitUniformChain {
        let law = FiniteProcessLaw::new(
            vec![4, 3],
            Dist::uniform(0..3),
            vec![vec![], vec![Dist::uniform([0, 1]), Dist::uniform([1, 2]), Dist::uniform([2, 3])]],
        )
        .unwrap();
        ExplicitUniformChain::new(law).unwrap()
    }

    #[test]
    fn wilson_matches_reference_values() {
        // 50/100 at 95%: 0.4038..0.5962.
        let (lo, hi) = wilson(50, 100, 0.95);
        assert!((lo - 0.40383).abs() < 1e-4 && (hi - 0.59617).abs() < 1e-4, "{lo} {hi}");
        let (lo, hi) = wilson(0, 10, 0.99);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.3 && hi < 0.5);
    }

    #[test]
    fn identical_start_diagonal_never_separates() {
        let run = run_coupling(
            &chain(),
            &Strategy::Diagonal,
            StartMode::Identical { depth: None },
            5000,
            1,
            PairScope::Exhaustive,
            Execution::Sequential,
        )
        .unwrap();
        assert_eq!(run.masks.len(), 1);
        assert_eq!(run.masks.get(&0), Some(&5000));
    }

    #[test]
    fn independent_start_collision_rate() {
        let run = run_coupling(
            &chain(),
            &Strategy::IndependentProduct,
            StartMode::Independent { depth: None },
            60_000,
            2,
            PairScope::Exhaustive,
            Execution::Parallel,
        )
        .unwrap();
        // P[≠] at the start is 1 − 1/3.
        let (lo, hi) = wilson(run.count_differ(1), run.replicates, CONFIDENCE);
        assert!(lo <= 2.0 / 3.0 && 2.0 / 3.0 <= hi, "{lo} {hi}");
    }

    #[test]
    fn runs_are_reproducible_across_execution_modes() {
        let go = |exec| {
            run_coupling(&chain(), &Strategy::GreedyMaximal, StartMode::Independent { depth: None }, 3000, 9, PairScope::Exhaustive, exec)
                .unwrap()
                .masks
        };
        assert_eq!(go(Execution::Sequential), go(Execution::Parallel));
    }

    #[test]
    fn half_product() {
        let a = BigRational::new(1.into(), 8.into());
        assert_eq!(half_product_bound(&[a.clone(), a.clone(), a]), BigRational::new(343.into(), 1024.into()));
    }
}
