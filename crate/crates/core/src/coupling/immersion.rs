//! Exact immersion checks.
//!
//! A process X with natural filtration F is immersed in a filtration G when,
//! for every n, F_n is independent of G_{n−1} given F_{n−1}. On a finite
//! probability space of paths this reads: the law of X_n given a G_{n−1}
//! atom equals its law given the F_{n−1} atom containing it.

use std::collections::{BTreeMap, HashMap};

use num_integer::Integer;
use serde::Serialize;

use super::chain::{ChainError, UniformSteps};
use super::montecarlo::StartMode;
use super::strategy::{verify_marginals, PairScope, PairStrategy, Strategy};
use crate::exec::Execution;

/// One outcome: the copy's values `x[t]`, the extra information `g[t]`
/// revealed to G at time t (G_t = σ(x_s, g_s : s ≤ t)), and an integer weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathOutcome {
    pub x: Vec<u64>,
    pub g: Vec<u64>,
    pub weight: u128,
}

#[derive(Debug, Clone, Default)]
pub struct PathLaw {
    pub outcomes: Vec<PathOutcome>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ImmersionVerdict {
    pub immersed: bool,
    pub method: String,
    /// First time step at which the conditional laws differ.
    pub failing_step: Option<usize>,
    pub witness: Option<String>,
}

/// Exact path-enumeration check.
pub fn immersion_check_paths(law: &PathLaw) -> ImmersionVerdict {
    let steps = law.outcomes.first().map_or(0, |o| o.x.len());
    for t in 1..steps {
        // F_{t−1} atom → (weight, x_t → weight); G_{t−1} atom likewise.
        let mut f_atoms: HashMap<&[u64], (u128, BTreeMap<u64, u128>)> = HashMap::new();
        let mut g_atoms: HashMap<(&[u64], &[u64]), (u128, BTreeMap<u64, u128>)> = HashMap::new();
        for o in &law.outcomes {
            let f = f_atoms.entry(&o.x[..t]).or_default();
            f.0 += o.weight;
            *f.1.entry(o.x[t]).or_default() += o.weight;
            let g = g_atoms.entry((&o.x[..t], &o.g[..t])).or_default();
            g.0 += o.weight;
            *g.1.entry(o.x[t]).or_default() += o.weight;
        }
        let mut keys: Vec<_> = g_atoms.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let (gw, gx) = &g_atoms[&key];
            let (fw, fx) = &f_atoms[key.0];
            // P[x_t = v | G atom] = P[x_t = v | F atom] for every v in the F atom.
            let differs = fx.iter().any(|(v, &fv)| gx.get(v).copied().unwrap_or(0) * fw != fv * gw);
            if differs {
                return ImmersionVerdict {
                    immersed: false,
                    method: "path enumeration".into(),
                    failing_step: Some(t),
                    witness: Some(format!(
                        "given past x={:?} and extra information {:?}, the next value has law {:?} out of {} instead of {:?} out of {}",
                        key.0, key.1, gx, gw, fx, fw
                    )),
                };
            }
        }
    }
    ImmersionVerdict { immersed: true, method: "path enumeration".into(), failing_step: None, witness: None }
}

/// Two fair bits ε₋₁, ε₀ with G₋₁ = σ(ε₋₁, ε₀): G knows the copy's next
/// step one time early.
pub fn future_revealing_law() -> PathLaw {
    let mut outcomes = Vec::new();
    for e1 in 0..2u64 {
        for e0 in 0..2u64 {
            outcomes.push(PathOutcome { x: vec![e1, e0], g: vec![2 * e1 + e0, 0], weight: 1 });
        }
    }
    PathLaw { outcomes }
}

/// Enumerates every pair path of a strategy-built pair chain with exact
/// weights, from the copy's point of view (`first` or second copy), the
/// other copy forming the extra information.
pub fn pair_path_law(
    chain: &dyn UniformSteps,
    strat: &dyn PairStrategy,
    start: StartMode,
    first: bool,
    budget: usize,
) -> Result<PathLaw, ChainError> {
    let m = chain.depth();
    let start_depth = match start {
        StartMode::Independent { depth } | StartMode::Identical { depth } => depth.unwrap_or(m).min(m),
    };
    let n0 = chain.state_count(m);
    let too_big = |needed: usize| ChainError::BudgetExceeded { needed: needed as u128, budget: budget as u128 };
    let mut frontier: Vec<(Vec<(u64, u64)>, u128)> = match start {
        StartMode::Independent { .. } => {
            if (n0 as u128) * (n0 as u128) > budget as u128 {
                return Err(too_big(n0.saturating_mul(n0) as usize));
            }
            (0..n0).flat_map(|a| (0..n0).map(move |b| (vec![(a, b)], 1))).collect()
        }
        StartMode::Identical { .. } => (0..n0).map(|a| (vec![(a, a)], 1)).collect(),
    };
    for d in (1..=m).rev() {
        let coupled: &dyn PairStrategy = if d > start_depth {
            match start {
                StartMode::Independent { .. } => &Strategy::IndependentProduct,
                StartMode::Identical { .. } => &Strategy::Diagonal,
            }
        } else {
            strat
        };
        let joints: Vec<_> = frontier.iter().map(|(p, _)| coupled.joint(chain, d, p.last().unwrap().0, p.last().unwrap().1)).collect();
        let scale = joints.iter().fold(1u128, |acc, j| acc.lcm(&j.total));
        let mut next = Vec::new();
        for ((path, w), joint) in frontier.iter().zip(&joints) {
            let f = scale / joint.total;
            for &(pair, v) in &joint.atoms {
                let mut p = path.clone();
                p.push(pair);
                let weight = w
                    .checked_mul(v)
                    .and_then(|x| x.checked_mul(f))
                    .ok_or_else(|| too_big(usize::MAX))?;
                next.push((p, weight));
                if next.len() > budget {
                    return Err(too_big(next.len()));
                }
            }
        }
        frontier = next;
    }
    let outcomes = frontier
        .into_iter()
        .map(|(p, weight)| {
            let (x, g) = p.iter().map(|&(a, b)| if first { (a, b) } else { (b, a) }).unzip();
            PathOutcome { x, g, weight }
        })
        .collect();
    Ok(PathLaw { outcomes })
}

/// Immersion of both copies of a strategy-built pair chain. The pair chain
/// is Markov with the joint kernels, so each copy is immersed exactly when
/// every joint kernel has the copy's kernel as its marginal.
pub fn immersion_check_strategy(
    chain: &dyn UniformSteps,
    strat: &dyn PairStrategy,
    exec: Execution,
) -> ImmersionVerdict {
    match verify_marginals(chain, strat, PairScope::Exhaustive, exec) {
        Ok(_) => ImmersionVerdict {
            immersed: true,
            method: "marginals of every joint kernel".into(),
            failing_step: None,
            witness: None,
        },
        Err(e) => ImmersionVerdict {
            immersed: false,
            method: "marginals of every joint kernel".into(),
            failing_step: None,
            witness: Some(e.to_string()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::chain::{ExplicitUniformChain, FiniteProcessLaw};
    use crate::coupling::dist::{Dist, JointDist};

    fn chain() -> ExplicitUniformChain {
        // depth 2: 3 states → 3 states → 4 states.
        let law = FiniteProcessLaw::new(
            vec![4, 3, 3],
            Dist::uniform(0..3),
            vec![
                vec![],
                vec![Dist::uniform([0, 1]), Dist::uniform([1, 2]), Dist::uniform([2, 3])],
                vec![Dist::uniform([0, 1]), Dist::uniform([0, 2]), Dist::uniform([1, 2])],
            ],
        )
        .unwrap();
        ExplicitUniformChain::new(law).unwrap()
    }

    /// Moves the second copy with the first copy's kernel.
    struct Copycat;

    impl PairStrategy for Copycat {
        fn name(&self) -> String {
            "copycat".into()
        }

        fn joint(&self, chain: &dyn UniformSteps, d: u64, a: u64, _b: u64) -> JointDist {
            JointDist::new(chain.step_support(d, a).into_iter().map(|x| ((x, x), 1)).collect())
        }
    }

    #[test]
    fn counterexample_is_not_immersed() {
        let v = immersion_check_paths(&future_revealing_law());
        assert!(!v.immersed);
        assert_eq!(v.failing_step, Some(1));
    }

    #[test]
    fn independent_bits_are_immersed() {
        let mut law = future_revealing_law();
        for o in &mut law.outcomes {
            o.g = vec![o.x[0], 0];
        }
        assert!(immersion_check_paths(&law).immersed);
    }

    #[test]
    fn reduction_agrees_with_path_enumeration() {
        let c = chain();
        for s in [Strategy::GreedyMaximal, Strategy::Diagonal, Strategy::IndependentProduct] {
            assert!(immersion_check_strategy(&c, &s, Execution::Sequential).immersed);
            for first in [true, false] {
                let law = pair_path_law(&c, &s, StartMode::Independent { depth: None }, first, 1 << 16).unwrap();
                assert!(immersion_check_paths(&law).immersed, "{} copy {first}", s.name());
            }
        }
        assert!(!immersion_check_strategy(&c, &Copycat, Execution::Sequential).immersed);
    }
}
