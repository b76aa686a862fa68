//! Finite Markov chains on levels −M..0.
//!
//! [`UniformSteps`] covers chains whose every transition is uniform on a
//! finite set listed in a fixed total order; states are `u64` codes and
//! levels are addressed by depth d = −n. [`FiniteProcessLaw`] holds
//! arbitrary exact kernels for small windows.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use super::dist::Dist;
use crate::sequences::index_of_depth;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChainError {
    #[error("enumeration needs {needed} cells, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("invalid law: {0}")]
    InvalidLaw(String),
    #[error("inconsistent strategy at n={level}: {detail}")]
    InconsistentStrategy { level: i64, detail: String },
}

/// A chain on depths M..=0 whose step from depth d to d−1 is uniform on a
/// set of `step_size(d)` states.
pub trait UniformSteps: Sync {
    fn depth(&self) -> u64;

    fn state_count(&self, d: u64) -> u64;

    /// Size of the support of the step out of depth d (d ≥ 1).
    fn step_size(&self, d: u64) -> u64;

    /// The i-th point (0-based, ascending codes) of the support from state s.
    fn step_point(&self, d: u64, s: u64, i: u64) -> u64;

    /// Rank of `next` in the support from s, if present.
    fn step_rank(&self, d: u64, s: u64, next: u64) -> Option<u64>;

    /// Size of the intersection of the supports from a and b.
    fn common_count(&self, d: u64, a: u64, b: u64) -> u64 {
        (0..self.step_size(d))
            .filter(|&i| self.step_rank(d, b, self.step_point(d, a, i)).is_some())
            .count() as u64
    }

    /// A bijection from 0..common_count onto the intersection.
    fn common_point(&self, d: u64, a: u64, b: u64, index: u64) -> u64 {
        (0..self.step_size(d))
            .map(|i| self.step_point(d, a, i))
            .filter(|&x| self.step_rank(d, b, x).is_some())
            .nth(index as usize)
            .expect("index below common_count")
    }

    fn step_support(&self, d: u64, s: u64) -> Vec<u64> {
        (0..self.step_size(d)).map(|i| self.step_point(d, s, i)).collect()
    }

    fn kernel(&self, d: u64, s: u64) -> Dist {
        Dist::uniform(self.step_support(d, s))
    }

    fn sample_step(&self, d: u64, s: u64, rng: &mut dyn rand::RngCore) -> u64 {
        let i = rng.random_range(0..self.step_size(d));
        self.step_point(d, s, i)
    }

    /// Law at the deepest level: uniform over the state set.
    fn sample_start(&self, rng: &mut dyn rand::RngCore) -> u64 {
        rng.random_range(0..self.state_count(self.depth()))
    }
}

/// Exact law of a Markov chain on depths M..=0 with explicit kernels.
#[derive(Debug, Clone, Serialize)]
pub struct FiniteProcessLaw {
    /// State counts by depth.
    pub state_counts: Vec<u64>,
    pub initial: Dist,
    /// `kernels[d][s]`: law at depth d−1 given state s at depth d (d ≥ 1).
    pub kernels: Vec<Vec<Dist>>,
}

impl FiniteProcessLaw {
    pub fn new(state_counts: Vec<u64>, initial: Dist, kernels: Vec<Vec<Dist>>) -> Result<Self, ChainError> {
        let law = FiniteProcessLaw { state_counts, initial, kernels };
        law.validate()?;
        Ok(law)
    }

    pub fn depth(&self) -> u64 {
        self.state_counts.len() as u64 - 1
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        let m = self.depth() as usize;
        if self.kernels.len() != m + 1 {
            return Err(ChainError::InvalidLaw(format!("expected {} kernel levels", m + 1)));
        }
        if self.initial.support().any(|s| s >= self.state_counts[m]) {
            return Err(ChainError::InvalidLaw("initial law outside the deepest state set".into()));
        }
        for d in 1..=m {
            if self.kernels[d].len() as u64 != self.state_counts[d] {
                return Err(ChainError::InvalidLaw(format!("kernel at n={} has wrong row count", index_of_depth(d as u64))));
            }
            // Dist is normalised by construction; rows are stochastic once
            // their supports lie in the next state set.
            if self.kernels[d].iter().any(|k| k.support().any(|s| s >= self.state_counts[d - 1])) {
                return Err(ChainError::InvalidLaw(format!(
                    "kernel at n={} leaves the state set",
                    index_of_depth(d as u64)
                )));
            }
        }
        Ok(())
    }

    /// Materialises a uniform-step chain when the kernel tables fit the budget.
    pub fn from_uniform(chain: &dyn UniformSteps, budget: u128) -> Result<Self, ChainError> {
        let m = chain.depth();
        let needed: u128 = (1..=m).map(|d| chain.state_count(d) as u128 * chain.step_size(d) as u128).sum();
        if needed > budget {
            return Err(ChainError::BudgetExceeded { needed, budget });
        }
        let state_counts = (0..=m).map(|d| chain.state_count(d)).collect();
        let initial = Dist::uniform(0..chain.state_count(m));
        let mut kernels = vec![Vec::new()];
        for d in 1..=m {
            kernels.push((0..chain.state_count(d)).map(|s| chain.kernel(d, s)).collect());
        }
        FiniteProcessLaw::new(state_counts, initial, kernels)
    }

    /// Marginal weights at each depth over a common denominator
    /// (`marginals()[d][s] / denominators[d]`).
    pub fn marginals(&self) -> (Vec<Vec<u128>>, Vec<u128>) {
        let m = self.depth() as usize;
        let mut out = vec![Vec::new(); m + 1];
        let mut dens = vec![0u128; m + 1];
        let mut cur = vec![0u128; self.state_counts[m] as usize];
        for &(s, w) in self.initial.atoms() {
            cur[s as usize] = w as u128;
        }
        let mut den = self.initial.total() as u128;
        for d in (0..=m).rev() {
            out[d] = cur.clone();
            dens[d] = den;
            if d == 0 {
                break;
            }
            let scale = self.kernels[d].iter().fold(1u128, |acc, k| lcm(acc, k.total() as u128));
            let mut next = vec![0u128; self.state_counts[d - 1] as usize];
            for (s, &w) in cur.iter().enumerate() {
                if w == 0 {
                    continue;
                }
                let k = &self.kernels[d][s];
                let f = scale / k.total() as u128;
                for &(t, v) in k.atoms() {
                    next[t as usize] += w * v as u128 * f;
                }
            }
            cur = next;
            den *= scale;
        }
        (out, dens)
    }

    pub fn sample_path<R: Rng>(&self, rng: &mut R) -> Vec<u64> {
        let m = self.depth() as usize;
        let mut path = vec![0u64; m + 1];
        path[m] = self.initial.sample(rng);
        for d in (1..=m).rev() {
            path[d - 1] = self.kernels[d][path[d] as usize].sample(rng);
        }
        path
    }
}

fn lcm(a: u128, b: u128) -> u128 {
    use num_integer::Integer;
    a.lcm(&b)
}

/// Uniform-step chain read back from explicit uniform kernels; used to run
/// strategies on small hand-built laws.
pub struct ExplicitUniformChain {
    law: FiniteProcessLaw,
}

impl ExplicitUniformChain {
    pub fn new(law: FiniteProcessLaw) -> Result<Self, ChainError> {
        for d in 1..=law.depth() as usize {
            let sizes: Vec<usize> = law.kernels[d].iter().map(|k| k.atoms().len()).collect();
            if law.kernels[d].iter().any(|k| !k.is_uniform()) || sizes.windows(2).any(|w| w[0] != w[1]) {
                return Err(ChainError::InvalidLaw(format!(
                    "kernels at n={} are not uniform on equal-size sets",
                    index_of_depth(d as u64)
                )));
            }
        }
        Ok(ExplicitUniformChain { law })
    }
}

impl UniformSteps for ExplicitUniformChain {
    fn depth(&self) -> u64 {
        self.law.depth()
    }

    fn state_count(&self, d: u64) -> u64 {
        self.law.state_counts[d as usize]
    }

    fn step_size(&self, d: u64) -> u64 {
        self.law.kernels[d as usize][0].atoms().len() as u64
    }

    fn step_point(&self, d: u64, s: u64, i: u64) -> u64 {
        self.law.kernels[d as usize][s as usize].atoms()[i as usize].0
    }

    fn step_rank(&self, d: u64, s: u64, next: u64) -> Option<u64> {
        let atoms = self.law.kernels[d as usize][s as usize].atoms();
        atoms.binary_search_by_key(&next, |&(x, _)| x).ok().map(|i| i as u64)
    }

    fn sample_start(&self, rng: &mut dyn rand::RngCore) -> u64 {
        let atoms = self.law.initial.atoms();
        assert!(self.law.initial.is_uniform() && atoms.len() as u64 == self.state_count(self.depth()));
        rng.random_range(0..atoms.len() as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_step() -> FiniteProcessLaw {
        // depth 2: 4 states; depth 1: 2 states; depth 0: 2 states.
        FiniteProcessLaw::new(
            vec![2, 2, 4],
            Dist::uniform(0..4),
            vec![
                vec![],
                vec![Dist::uniform([0]), Dist::uniform([1])],
                vec![Dist::uniform([0, 1]), Dist::uniform([0, 1]), Dist::uniform([0, 1]), Dist::uniform([0, 1])],
            ],
        )
        .unwrap()
    }

    #[test]
    fn marginals_propagate() {
        let law = two_step();
        let (m, den) = law.marginals();
        assert_eq!(m[1].iter().map(|&w| w * 2).collect::<Vec<_>>(), vec![den[1], den[1]]);
        assert_eq!(m[0][0] * 2, den[0]);
    }

    #[test]
    fn rejects_out_of_range_kernels() {
        let bad = FiniteProcessLaw::new(
            vec![1, 2],
            Dist::uniform(0..2),
            vec![vec![], vec![Dist::uniform([0]), Dist::uniform([3])]],
        );
        assert!(matches!(bad, Err(ChainError::InvalidLaw(_))));
    }

    #[test]
    fn explicit_uniform_chain_round_trip() {
        let chain = ExplicitUniformChain::new(two_step()).unwrap();
        assert_eq!(chain.step_size(2), 2);
        assert_eq!(chain.step_rank(2, 3, 1), Some(1));
        assert_eq!(chain.common_count(1, 0, 1), 0);
        let back = FiniteProcessLaw::from_uniform(&chain, 1 << 20).unwrap();
        assert_eq!(back.kernels[2], two_step().kernels[2]);
    }
}
