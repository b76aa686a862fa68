//! Chains glued from strong bricks: brick k (deepest first) occupies depths
//! M − 2k, M − 2k − 1, M − 2k − 2 and its F₂ is the next brick's F₀.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::brick::StrongBrick;
use super::family::{Mode, PartitionFamily};
use super::BrickError;
use crate::coupling::chain::UniformSteps;
use crate::exec::{rng_for, Execution};
use crate::rational;
use crate::sequences::{depth_of_index, index_of_depth};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlueMode {
    /// Every brick over GF(q); later bricks index by an embedded subspace.
    ConstantQ,
    /// Brick at level n uses GF(q^(2^|n|)).
    Tower,
}

#[derive(Debug, Clone)]
pub struct GluedChain {
    /// Deepest first.
    bricks: Vec<StrongBrick>,
}

/// Deepest tower depth: beyond two bricks the index sets overflow `u64`
/// for every family worth running.
pub const MAX_TOWER_BRICKS: usize = 2;

impl GluedChain {
    pub fn new(bricks: Vec<StrongBrick>) -> Result<GluedChain, BrickError> {
        if bricks.is_empty() {
            return Err(BrickError::BadParameter("a chain needs at least one brick".into()));
        }
        for (k, w) in bricks.windows(2).enumerate() {
            if w[0].f2_size() != w[1].f0_size() {
                return Err(BrickError::Incompatible(format!(
                    "brick {k} has |F₂| = {} but brick {} has |F₀| = {}",
                    w[0].f2_size(),
                    k + 1,
                    w[1].f0_size()
                )));
            }
        }
        Ok(GluedChain { bricks })
    }

    /// `count` bricks of the named family, glued either over a fixed field
    /// or along the tower of quadratic extensions.
    pub fn build(
        family: &str,
        q: u64,
        count: usize,
        glue: GlueMode,
        mode: Mode,
        budget: u64,
        exec: Execution,
    ) -> Result<GluedChain, BrickError> {
        if count == 0 {
            return Err(BrickError::BadParameter("a chain needs at least one brick".into()));
        }
        let mut families = Vec::with_capacity(count);
        for k in 0..count {
            let fam = match glue {
                GlueMode::ConstantQ => match (family, k) {
                    ("matrix", 0) => PartitionFamily::matrix(q, mode)?,
                    ("matrix", _) => PartitionFamily::matrix_indexed(q, 8, mode)?,
                    ("quartic", 0) => PartitionFamily::quartic(q)?,
                    ("quartic", _) => PartitionFamily::quartic_indexed(q, 2)?,
                    (other, _) => return Err(BrickError::BadParameter(format!("unknown family {other:?}"))),
                },
                GlueMode::Tower => {
                    if count > MAX_TOWER_BRICKS {
                        return Err(BrickError::Budget(format!(
                            "tower gluing is limited to {MAX_TOWER_BRICKS} bricks"
                        )));
                    }
                    let level = (count - 1 - k) as u32;
                    let qn = q
                        .checked_pow(1 << level)
                        .ok_or_else(|| BrickError::Budget(format!("q^(2^{level}) overflows")))?;
                    match family {
                        "matrix" => PartitionFamily::matrix(qn, mode)?,
                        "quartic" => PartitionFamily::quartic(qn)?,
                        other => return Err(BrickError::BadParameter(format!("unknown family {other:?}"))),
                    }
                }
            };
            families.push(fam);
        }
        let bricks = families
            .into_iter()
            .map(|f| StrongBrick::assemble(f, budget, exec))
            .collect::<Result<Vec<_>, _>>()?;
        GluedChain::new(bricks)
    }

    pub fn bricks(&self) -> &[StrongBrick] {
        &self.bricks
    }

    fn m(&self) -> u64 {
        2 * self.bricks.len() as u64
    }

    /// Brick whose step leaves depth d, and whether that step is the
    /// F₀ → F₁ one.
    fn step_brick(&self, d: u64) -> (&StrongBrick, bool) {
        let off = self.m() - d;
        (&self.bricks[(off / 2) as usize], off % 2 == 0)
    }

    /// Fills odd depths with g from the even ones (`evens[k]` at depth M − 2k).
    pub fn fill(&self, evens: &[u64]) -> Vec<u64> {
        let m = self.m() as usize;
        let mut path = vec![0u64; m + 1];
        for (k, &z) in evens.iter().enumerate() {
            path[m - 2 * k] = z;
        }
        for (k, b) in self.bricks.iter().enumerate() {
            let d = m - 2 * k;
            path[d - 1] = b.g(path[d], path[d - 2]);
        }
        path
    }

    /// Path by depth: independent uniform even levels, odd levels through g.
    pub fn sample_g_fill<R: Rng>(&self, rng: &mut R) -> Vec<u64> {
        let m = self.m();
        let evens: Vec<u64> = (0..=self.bricks.len() as u64)
            .map(|k| rng.random_range(0..self.state_count(m - 2 * k)))
            .collect();
        self.fill(&evens)
    }

    /// Path by depth drawn through the uniform kernels.
    pub fn sample_forward<R: Rng>(&self, rng: &mut R) -> Vec<u64> {
        let m = self.m();
        let mut path = vec![0u64; m as usize + 1];
        path[m as usize] = rng.random_range(0..self.state_count(m));
        for d in (1..=m).rev() {
            let i = rng.random_range(0..self.step_size(d));
            path[d as usize - 1] = self.step_point(d, path[d as usize], i);
        }
        path
    }

    /// (n, r_n) with r_n the size of the step into level n.
    pub fn adicity(&self) -> Vec<(i64, u64)> {
        (1..=self.m()).rev().map(|d| (index_of_depth(d - 1), self.step_size(d))).collect()
    }

    /// α of each brick, deepest first.
    pub fn alphas(&self) -> Vec<BigRational> {
        self.bricks.iter().map(|b| b.alpha()).collect()
    }

    /// `floors[d]`: lower bound on P[≠ at depth d − 1 | ≠ at depth d] under
    /// any non-anticipative coupling. F₀ → F₁ steps keep copies apart since
    /// f recovers Z₀; F₁ → F₂ steps separate with probability ≥ 1 − α.
    pub fn step_floors(&self) -> Vec<Option<BigRational>> {
        let one = BigRational::from_integer(1.into());
        std::iter::once(None)
            .chain((1..=self.m()).map(|d| match self.step_brick(d) {
                (_, true) => Some(one.clone()),
                (b, false) => Some(&one - b.alpha()),
            }))
            .collect()
    }

    /// Π (1 − α) over the bricks.
    pub fn separation_product(&self) -> BigRational {
        self.alphas()
            .iter()
            .fold(BigRational::from_integer(BigInt::from(1)), |acc, a| acc * (BigRational::from_integer(1.into()) - a))
    }
}

impl UniformSteps for GluedChain {
    fn depth(&self) -> u64 {
        self.m()
    }

    fn state_count(&self, d: u64) -> u64 {
        let m = self.m();
        if d == m {
            return self.bricks[0].f0_size();
        }
        let off = m - d;
        if off % 2 == 0 {
            self.bricks[(off / 2 - 1) as usize].f2_size()
        } else {
            self.bricks[(off / 2) as usize].f1_size()
        }
    }

    fn step_size(&self, d: u64) -> u64 {
        match self.step_brick(d) {
            (b, true) => b.r1(),
            (b, false) => b.r2(),
        }
    }

    fn step_point(&self, d: u64, s: u64, i: u64) -> u64 {
        match self.step_brick(d) {
            (b, true) => s * b.r1() + i,
            (b, false) => b.s_point(s, i),
        }
    }

    fn step_rank(&self, d: u64, s: u64, next: u64) -> Option<u64> {
        match self.step_brick(d) {
            (b, true) => (next / b.r1() == s).then(|| next % b.r1()),
            (b, false) => b.s_rank(s, next),
        }
    }

    fn common_count(&self, d: u64, a: u64, b: u64) -> u64 {
        match self.step_brick(d) {
            (br, true) => {
                if a == b {
                    br.r1()
                } else {
                    0
                }
            }
            (br, false) => br.common_count(a, b),
        }
    }

    fn common_point(&self, d: u64, a: u64, b: u64, index: u64) -> u64 {
        match self.step_brick(d) {
            (br, true) => a * br.r1() + index,
            (br, false) => br.common_point(a, b, index),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowReport {
    pub outcomes: u64,
    /// Every level is uniform on its state set.
    pub uniform: bool,
    /// Given the whole past, each step follows the uniform kernel.
    pub markov: bool,
    pub witness: Option<String>,
}

/// Exact check, over every choice of the even levels, that the g-filled
/// process is the Markov chain with the uniform kernels.
pub fn exact_window_check(chain: &GluedChain, budget: u64) -> Result<WindowReport, BrickError> {
    let m = chain.depth();
    let counts: Vec<u64> = (0..=chain.bricks.len() as u64).map(|k| chain.state_count(m - 2 * k)).collect();
    let total = counts.iter().try_fold(1u64, |acc, &c| acc.checked_mul(c)).filter(|&t| t <= budget);
    let Some(total) = total else {
        return Err(BrickError::Budget(format!("window has more than {budget} outcomes")));
    };
    // Paths keyed deepest first so every prefix is contiguous after sorting.
    let mut paths: Vec<Vec<u64>> = (0..total)
        .map(|mut idx| {
            let evens: Vec<u64> = counts
                .iter()
                .map(|&c| {
                    let v = idx % c;
                    idx /= c;
                    v
                })
                .collect();
            let mut p = chain.fill(&evens);
            p.reverse();
            p
        })
        .collect();
    paths.sort_unstable();

    let mut witness = None;
    let mut uniform = true;
    for d in 0..=m {
        let mut hist: HashMap<u64, u64> = HashMap::new();
        for p in &paths {
            *hist.entry(p[(m - d) as usize]).or_default() += 1;
        }
        let n = chain.state_count(d);
        if hist.len() as u64 != n || hist.values().any(|&c| c * n != total) {
            uniform = false;
            witness.get_or_insert(format!("level n={} is not uniform", index_of_depth(d)));
        }
    }

    let mut markov = true;
    for d in 1..=m {
        let pos = (m - d) as usize;
        let r = chain.step_size(d);
        let mut start = 0;
        while start < paths.len() && markov {
            let mut end = start;
            while end < paths.len() && paths[end][..=pos] == paths[start][..=pos] {
                end += 1;
            }
            let s = paths[start][pos];
            let mut next: HashMap<u64, u64> = HashMap::new();
            for p in &paths[start..end] {
                *next.entry(p[pos + 1]).or_default() += 1;
            }
            let group = (end - start) as u64;
            let ok = next.len() as u64 == r
                && next.iter().all(|(&t, &c)| chain.step_rank(d, s, t).is_some() && c * r == group);
            if !ok {
                markov = false;
                witness.get_or_insert(format!(
                    "step out of n={} from past {:?} is not the uniform kernel",
                    index_of_depth(d),
                    &paths[start][..=pos]
                ));
            }
            start = end;
        }
    }
    Ok(WindowReport { outcomes: total, uniform, markov, witness })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WitnessKind {
    /// Y_n = Z_n.
    Z,
    /// Y_n = U_n, the rank of Z_n in the support of the step into n.
    U,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessLevel {
    pub n: i64,
    pub kind: WitnessKind,
    pub support: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactFactorization {
    pub outcomes: u64,
    pub cells: u128,
    /// (Y_n)_{n∈D} is uniform on the product of the supports.
    pub factorizes: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub levels: Vec<WitnessLevel>,
    pub exact: Option<ExactFactorization>,
    pub paths: u64,
    pub reconstruction_mismatches: u64,
    #[serde(with = "rational::serde_str")]
    pub cell_probability: BigRational,
}

impl WitnessReport {
    pub fn passes(&self) -> bool {
        self.reconstruction_mismatches == 0 && self.exact.as_ref().is_none_or(|e| e.factorizes)
    }
}

/// Witness for (Z_n)_{n∈D} being of product type: Y_n = Z_n when n is the
/// deepest level or n − 1 ∉ D, else Y_n = U_n. D must contain every even
/// level. The Y_n are checked to be independent uniform by exhaustive
/// enumeration (when within `budget`) and to rebuild (Z_n)_{n∈D} on `paths`
/// seeded samples.
pub fn product_type_witness(
    chain: &GluedChain,
    levels: &[i64],
    budget: u64,
    paths: u64,
    seed: u64,
) -> Result<WitnessReport, BrickError> {
    let m = chain.depth();
    let depths: BTreeSet<u64> = levels
        .iter()
        .map(|&n| {
            if n > 0 || depth_of_index(n) > m {
                Err(BrickError::BadParameter(format!("level {n} is outside −{m}..0")))
            } else {
                Ok(depth_of_index(n))
            }
        })
        .collect::<Result<_, _>>()?;
    if let Some(d) = (0..=m).step_by(2).find(|d| !depths.contains(d)) {
        return Err(BrickError::BadParameter(format!("D must contain the even level {}", index_of_depth(d))));
    }
    // Deepest first.
    let order: Vec<u64> = depths.iter().rev().copied().collect();
    let kinds: Vec<WitnessLevel> = order
        .iter()
        .map(|&d| {
            let u = d < m && depths.contains(&(d + 1));
            WitnessLevel {
                n: index_of_depth(d),
                kind: if u { WitnessKind::U } else { WitnessKind::Z },
                support: if u { chain.step_size(d + 1) } else { chain.state_count(d) },
            }
        })
        .collect();
    let y_of = |path: &[u64]| -> Vec<u64> {
        order
            .iter()
            .zip(&kinds)
            .map(|(&d, k)| match k.kind {
                WitnessKind::Z => path[d as usize],
                WitnessKind::U => chain.step_rank(d + 1, path[d as usize + 1], path[d as usize]).expect("path follows the kernels"),
            })
            .collect()
    };
    let rebuild = |y: &[u64]| -> HashMap<u64, u64> {
        let mut z = HashMap::new();
        for ((&d, k), &v) in order.iter().zip(&kinds).zip(y) {
            let value = match k.kind {
                WitnessKind::Z => v,
                WitnessKind::U => chain.step_point(d + 1, z[&(d + 1)], v),
            };
            z.insert(d, value);
        }
        z
    };

    let cells: u128 = kinds.iter().map(|k| k.support as u128).product();
    let even_counts: Vec<u64> = (0..=chain.bricks.len() as u64).map(|k| chain.state_count(m - 2 * k)).collect();
    let outcomes = even_counts.iter().try_fold(1u64, |a, &c| a.checked_mul(c));
    let exact = match outcomes {
        Some(total) if total <= budget => {
            let mut table: HashMap<Vec<u64>, u64> = HashMap::new();
            for mut idx in 0..total {
                let evens: Vec<u64> = even_counts
                    .iter()
                    .map(|&c| {
                        let v = idx % c;
                        idx /= c;
                        v
                    })
                    .collect();
                *table.entry(y_of(&chain.fill(&evens))).or_default() += 1;
            }
            let factorizes = table.len() as u128 == cells && table.values().all(|&c| c as u128 * cells == total as u128);
            Some(ExactFactorization { outcomes: total, cells, factorizes })
        }
        _ => None,
    };

    let mut mismatches = 0;
    for i in 0..paths {
        let mut rng = rng_for(seed, "product_type_witness", i);
        let path = chain.sample_g_fill(&mut rng);
        let z = rebuild(&y_of(&path));
        if depths.iter().any(|&d| z[&d] != path[d as usize]) {
            mismatches += 1;
        }
    }
    Ok(WitnessReport {
        levels: kinds,
        exact,
        paths,
        reconstruction_mismatches: mismatches,
        cell_probability: BigRational::new(1.into(), BigInt::from(cells)),
    })
}
