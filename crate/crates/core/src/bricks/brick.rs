//! Strong bricks assembled from partition families, and their exact
//! clause-by-clause verification.
//!
//! F₁ = F₀ × {1..r₁} is coded as z₁ = z₀·r₁ + (j − 1); f(z₁) = z₀,
//! g(z₀, z₂) = (z₀, index of the block of Π_{z₀} holding z₂), S(z₁) = S_{z₀,j}.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use serde::Serialize;

use super::family::{Mode, PartitionFamily};
use super::BrickError;
use crate::coupling::dist::{overlap, total_variation, Dist};
use crate::exec::{map_reduce, rng_for, Execution};
use crate::field::{Field, Gf};
use crate::rational;

/// Default cap on exhaustive work (pairs, points or ranks).
pub const DEFAULT_BUDGET: u64 = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Checked only on a sample because of the budget.
    Partial,
}

#[derive(Debug, Clone, Serialize)]
pub struct Clause {
    pub clause: String,
    pub status: Status,
    pub method: String,
    /// Offending pair or block when the clause fails.
    pub witness: Option<String>,
}

impl Clause {
    fn new(clause: &str, ok: bool, method: &str, witness: Option<String>) -> Clause {
        Clause {
            clause: clause.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            method: method.into(),
            witness: if ok { None } else { witness },
        }
    }

    fn sampled(mut self, sampled: bool) -> Clause {
        if sampled && self.status == Status::Pass {
            self.status = Status::Partial;
        }
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Transversality {
    pub max_intersection: u64,
    pub worst_pair: Option<((u64, u64), (u64, u64))>,
    pub method: String,
    pub pairs_checked: u128,
    /// For matrix families: how many nonzero index differences have each
    /// rank 1..=4.
    pub rank_histogram: Option<[u64; 4]>,
    pub complete: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyReport {
    pub family: String,
    pub r1: u64,
    pub r2: u64,
    #[serde(with = "rational::serde_str")]
    pub alpha: BigRational,
    pub index_count: u64,
    pub base_size: u64,
    pub clauses: Vec<Clause>,
    pub transversality: Transversality,
}

impl FamilyReport {
    pub fn failures(&self) -> Vec<&Clause> {
        self.clauses.iter().filter(|c| c.status == Status::Fail).collect()
    }
}

fn alpha_of(f: &PartitionFamily) -> BigRational {
    BigRational::new(BigInt::from(f.alpha().0), BigInt::from(f.alpha().1))
}

/// Indices to inspect: all of them when affordable, else a seeded sample.
/// Empty when even a few whole partitions exceed the budget; callers then
/// fall back to [`point_sample`].
fn index_sample(f: &PartitionFamily, per_index: u64, budget: u64, seed: u64) -> (Vec<u64>, bool) {
    let n = f.index_count();
    if n.saturating_mul(per_index) <= budget {
        return ((0..n).collect(), false);
    }
    if per_index.saturating_mul(64) > budget {
        return (Vec::new(), true);
    }
    let k = (budget / per_index.max(1)).clamp(1, 4096);
    let mut rng = rng_for(seed, "brick_index_sample", 0);
    let mut v: Vec<u64> = (0..k).map(|_| rng.random_range(0..n)).collect();
    v.extend([0, n - 1]);
    v.sort_unstable();
    v.dedup();
    (v, true)
}

/// Seeded round trips point → (block, rank) → point and back.
fn point_sample(f: &PartitionFamily, samples: u64, seed: u64) -> Result<(), String> {
    let mut rng = rng_for(seed, "brick_point_sample", 0);
    for _ in 0..samples {
        let z0 = rng.random_range(0..f.index_count());
        let z2 = rng.random_range(0..f.base_size());
        let j = f.block_of(z0, z2).ok_or(format!("{z2} lies in no block of Π_{z0}"))?;
        let i = f.block_rank(z0, j, z2).ok_or(format!("{z2} has no rank in block ({z0},{j})"))?;
        if f.block_point(z0, j, i) != z2 {
            return Err(format!("block ({z0},{j}) lists another point at rank {i}"));
        }
        let (j, i) = (rng.random_range(1..=f.r1()), rng.random_range(0..f.r2()));
        let z2 = f.block_point(z0, j, i);
        if f.block_of(z0, z2) != Some(j) || f.block_rank(z0, j, z2) != Some(i) {
            return Err(format!("point {i} of block ({z0},{j}) is misindexed"));
        }
    }
    Ok(())
}

/// Number of round trips used when whole partitions are out of reach.
const POINT_SAMPLES: u64 = 20_000;

/// Checks one partition Π_{z₀}: r₁ blocks of r₂ distinct points covering
/// F₂, consistent with `block_of` and `block_rank`.
fn partition_ok(f: &PartitionFamily, z0: u64) -> Result<(), String> {
    let mut hits = vec![0u8; f.base_size() as usize];
    for j in 1..=f.r1() {
        let block = f.block(z0, j);
        if block.len() as u64 != f.r2() {
            return Err(format!("block ({z0},{j}) has {} points", block.len()));
        }
        for (i, &z2) in block.iter().enumerate() {
            if z2 >= f.base_size() {
                return Err(format!("block ({z0},{j}) leaves F₂"));
            }
            if i > 0 && block[i - 1] >= z2 {
                return Err(format!("block ({z0},{j}) repeats or misorders points"));
            }
            hits[z2 as usize] += 1;
            if f.block_of(z0, z2) != Some(j) || f.block_rank(z0, j, z2) != Some(i as u64) {
                return Err(format!("point {z2} of block ({z0},{j}) is misindexed"));
            }
        }
    }
    match hits.iter().position(|&h| h != 1) {
        Some(z2) => Err(format!("point {z2} lies in {} blocks of Π_{z0}", hits[z2])),
        None => Ok(()),
    }
}

/// Exhaustive scan of all block pairs through bitsets.
fn scan_pairs(f: &PartitionFamily, exec: Execution) -> (u64, Option<((u64, u64), (u64, u64))>) {
    let words = f.base_size().div_ceil(64) as usize;
    let n = f.index_count() * f.r1();
    let mut masks = vec![0u64; n as usize * words];
    for id in 0..n {
        let (z0, j) = (id / f.r1(), id % f.r1() + 1);
        for z2 in f.block(z0, j) {
            masks[id as usize * words + (z2 / 64) as usize] |= 1 << (z2 % 64);
        }
    }
    let masks = &masks;
    let best = map_reduce(
        exec,
        n,
        (0u64, u64::MAX, u64::MAX),
        |a| {
            let ma = &masks[a as usize * words..(a as usize + 1) * words];
            let mut best = (0u64, u64::MAX, u64::MAX);
            for b in a + 1..n {
                let mb = &masks[b as usize * words..(b as usize + 1) * words];
                let c: u64 = ma.iter().zip(mb).map(|(x, y)| (x & y).count_ones() as u64).sum();
                if c > best.0 {
                    best = (c, a, b);
                }
            }
            best
        },
        |x, y| if (y.0, std::cmp::Reverse((y.1, y.2))) > (x.0, std::cmp::Reverse((x.1, x.2))) { y } else { x },
    );
    let id = |k: u64| (k / f.r1(), k % f.r1() + 1);
    (best.0, (best.1 != u64::MAX).then(|| (id(best.1), id(best.2))))
}

/// Rank of a 4×4 matrix over a table-backed field, on the stack.
fn rank4(field: &Field, m: &mut [Gf; 16]) -> usize {
    let mut rank = 0;
    for col in 0..4 {
        let Some(p) = (rank..4).find(|&r| !m[r * 4 + col].is_zero()) else { continue };
        for c in 0..4 {
            m.swap(rank * 4 + c, p * 4 + c);
        }
        let inv = field.inv(m[rank * 4 + col]).expect("nonzero pivot");
        for r in rank + 1..4 {
            let factor = field.mul(m[r * 4 + col], inv);
            if factor.is_zero() {
                continue;
            }
            for c in col..4 {
                m[r * 4 + c] = field.sub(m[r * 4 + c], field.mul(factor, m[rank * 4 + c]));
            }
        }
        rank += 1;
    }
    rank
}

/// Rank-formula transversality for the matrix family: blocks (A′,b′) and
/// (A″,b″) with A′ ≠ A″ meet in q^(4 − rank(A′ − A″)) points when the system
/// is consistent (for some offsets it always is), and equal matrices give
/// disjoint or equal blocks. Differences of admissible indices range over all
/// nonzero admissible indices, so enumerating those is exhaustive.
fn matrix_ranks(f: &PartitionFamily, budget: u64, exec: Execution) -> Option<[u64; 4]> {
    let n = f.index_count();
    if n - 1 > budget {
        return None;
    }
    let field = f.field().expect("matrix family");
    let dim = f.index_dim() as usize;
    let chunk = 1u64 << 12;
    let hist = map_reduce(
        exec,
        n.div_ceil(chunk),
        [0u64; 4],
        |c| {
            let mut h = [0u64; 4];
            for code in (c * chunk).max(1)..((c + 1) * chunk).min(n) {
                let mut m = [Gf::ZERO; 16];
                let coords = field.decode_vec(code, dim);
                m[..dim].copy_from_slice(&coords);
                let r = rank4(field, &mut m);
                h[r - 1] += 1;
            }
            h
        },
        |mut a, b| {
            for k in 0..4 {
                a[k] += b[k];
            }
            a
        },
    );
    Some(hist)
}

pub fn verify_family(f: &PartitionFamily, budget: u64, seed: u64, exec: Execution) -> FamilyReport {
    let (indices, sampled) = index_sample(f, f.base_size(), budget, seed);
    let partition_failure = if indices.is_empty() {
        point_sample(f, POINT_SAMPLES, seed).err()
    } else {
        indices.iter().find_map(|&z0| partition_ok(f, z0).err())
    };
    let algebraic = f.field().is_some();
    let method = match (sampled, algebraic) {
        (false, _) => "exhaustive",
        (true, true) => "algebraic (offsets are a function of the point) + sampled indices",
        (true, false) => "sampled indices",
    };
    let mut clauses = vec![
        Clause::new("blocks_partition_F2", partition_failure.is_none(), method, partition_failure.clone())
            .sampled(sampled && !algebraic),
        Clause::new("block_sizes_r2", partition_failure.is_none(), method, partition_failure.clone())
            .sampled(sampled && !algebraic),
        Clause::new("block_count_r1", f.base_size() == f.r1() * f.r2(), "count", Some(format!("|F₂| = {}", f.base_size()))),
    ];

    let pairs = (f.index_count() as u128 * f.r1() as u128).pow(2) / 2;
    let transversality = if pairs <= budget as u128 {
        let (max, worst) = scan_pairs(f, exec);
        Transversality {
            max_intersection: max,
            worst_pair: worst,
            method: "exhaustive pair scan".into(),
            pairs_checked: pairs,
            rank_histogram: None,
            complete: true,
        }
    } else if f.name() == "matrix" {
        let q = f.field().unwrap().order() as u64;
        let hist = matrix_ranks(f, budget, exec);
        let min_rank = hist.map_or(1, |h| h.iter().position(|&c| c > 0).map_or(4, |r| r + 1));
        let max = q.pow(4 - min_rank as u32);
        // A worst pair: offsets equal, matrices differing by the first
        // admissible index of minimal rank.
        let witness = first_index_with_rank(f, min_rank).map(|d| ((0, 1), (d, 1)));
        Transversality {
            max_intersection: max,
            worst_pair: witness,
            method: if hist.is_some() {
                "rank formula over every nonzero index difference".into()
            } else {
                "rank formula: nonzero differences have rank ≥ 1".into()
            },
            pairs_checked: hist.map_or(0, |h| h.iter().sum::<u64>() as u128),
            rank_histogram: hist,
            complete: true,
        }
    } else if f.name() == "quartic" {
        // Distinct graphs differ by a nonzero polynomial of degree ≤ 4.
        let q = f.field().unwrap().order() as u64;
        Transversality {
            max_intersection: 4.min(q),
            worst_pair: None,
            method: "degree bound: a nonzero polynomial of degree ≤ 4 has ≤ 4 roots".into(),
            pairs_checked: 0,
            rank_histogram: None,
            complete: true,
        }
    } else {
        let mut rng = rng_for(seed, "brick_pairs", 0);
        let n = f.index_count() * f.r1();
        let mut best = (0u64, None);
        for _ in 0..budget.min(1 << 20) {
            let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
            if a == b {
                continue;
            }
            let (ba, bb) = ((a / f.r1(), a % f.r1() + 1), (b / f.r1(), b % f.r1() + 1));
            let c = f.intersection_count(ba, bb);
            if c > best.0 {
                best = (c, Some((ba, bb)));
            }
        }
        Transversality {
            max_intersection: best.0,
            worst_pair: best.1,
            method: "sampled pairs".into(),
            pairs_checked: budget.min(1 << 20) as u128,
            rank_histogram: None,
            complete: false,
        }
    };
    let ok = f.within_alpha(transversality.max_intersection);
    clauses.push(
        Clause::new(
            "transversality",
            ok,
            &transversality.method,
            transversality.worst_pair.map(|p| format!("{p:?} meet in {} points", transversality.max_intersection)),
        )
        .sampled(!transversality.complete),
    );
    FamilyReport {
        family: f.name().into(),
        r1: f.r1(),
        r2: f.r2(),
        alpha: alpha_of(f),
        index_count: f.index_count(),
        base_size: f.base_size(),
        clauses,
        transversality,
    }
}

fn first_index_with_rank(f: &PartitionFamily, rank: usize) -> Option<u64> {
    let field = f.field()?;
    (1..f.index_count().min(1 << 20)).find(|&code| {
        let mut m = [Gf::ZERO; 16];
        let coords = field.decode_vec(code, f.index_dim() as usize);
        m[..coords.len()].copy_from_slice(&coords);
        rank4(field, &mut m) == rank
    })
}

#[derive(Debug, Clone)]
pub struct StrongBrick {
    family: PartitionFamily,
    family_report: FamilyReport,
}

impl StrongBrick {
    /// Checks the family's invariants, then builds f, g and S from it.
    pub fn assemble(family: PartitionFamily, budget: u64, exec: Execution) -> Result<StrongBrick, BrickError> {
        let family_report = verify_family(&family, budget, 0, exec);
        if let Some(c) = family_report.failures().first() {
            return Err(BrickError::Invariant {
                clause: c.clause.clone(),
                witness: c.witness.clone().unwrap_or_default(),
            });
        }
        Ok(StrongBrick { family, family_report })
    }

    pub fn family(&self) -> &PartitionFamily {
        &self.family
    }

    pub fn family_report(&self) -> &FamilyReport {
        &self.family_report
    }

    pub fn r1(&self) -> u64 {
        self.family.r1()
    }

    pub fn r2(&self) -> u64 {
        self.family.r2()
    }

    pub fn alpha(&self) -> BigRational {
        alpha_of(&self.family)
    }

    pub fn f0_size(&self) -> u64 {
        self.family.index_count()
    }

    pub fn f1_size(&self) -> u64 {
        self.family.index_count() * self.family.r1()
    }

    pub fn f2_size(&self) -> u64 {
        self.family.base_size()
    }

    pub fn f(&self, z1: u64) -> u64 {
        z1 / self.r1()
    }

    pub fn g(&self, z0: u64, z2: u64) -> u64 {
        z0 * self.r1() + self.family.block_of(z0, z2).expect("partition covers F₂") - 1
    }

    fn split(&self, z1: u64) -> (u64, u64) {
        (z1 / self.r1(), z1 % self.r1() + 1)
    }

    /// S(z₁) in ascending order.
    pub fn s(&self, z1: u64) -> Vec<u64> {
        let (z0, j) = self.split(z1);
        self.family.block(z0, j)
    }

    pub fn s_point(&self, z1: u64, i: u64) -> u64 {
        let (z0, j) = self.split(z1);
        self.family.block_point(z0, j, i)
    }

    pub fn s_rank(&self, z1: u64, z2: u64) -> Option<u64> {
        let (z0, j) = self.split(z1);
        self.family.block_rank(z0, j, z2)
    }

    pub fn common_count(&self, a: u64, b: u64) -> u64 {
        self.family.intersection_count(self.split(a), self.split(b))
    }

    pub fn common_point(&self, a: u64, b: u64, index: u64) -> u64 {
        self.family.intersection_point(self.split(a), self.split(b), index)
    }

    /// Law of Z₂ given Z₁ = z₁.
    pub fn kernel_2(&self, z1: u64) -> Dist {
        Dist::uniform(self.s(z1))
    }

    /// Overlap between two Z₂-kernels.
    pub fn overlap(&self, a: u64, b: u64) -> BigRational {
        overlap(&self.kernel_2(a), &self.kernel_2(b))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BrickReport {
    pub family: FamilyReport,
    pub f0: u64,
    pub f1: u64,
    pub f2: u64,
    pub clauses: Vec<Clause>,
    #[serde(with = "rational::serde_str")]
    pub max_overlap: BigRational,
    #[serde(with = "rational::serde_str")]
    pub alpha: BigRational,
    pub worst_pair: Option<(u64, u64)>,
    /// 1 − max overlap: lower bound on P[Z′₂ ≠ Z″₂] for distinct Z₁ values.
    #[serde(with = "rational::serde_str")]
    pub worst_separation: BigRational,
}

impl BrickReport {
    pub fn passes(&self) -> bool {
        self.clauses.iter().chain(&self.family.clauses).all(|c| c.status == Status::Pass)
    }

    pub fn has_failure(&self) -> bool {
        self.clauses.iter().chain(&self.family.clauses).any(|c| c.status == Status::Fail)
    }
}

/// Verifies every clause of the strong-brick definition and of the size
/// constraints on the joint law Z₀, Z₂ independent uniform, Z₁ = g(Z₀, Z₂).
pub fn verify_strong_brick(b: &StrongBrick, budget: u64, seed: u64, exec: Execution) -> BrickReport {
    let f = &b.family;
    let (r1, r2) = (b.r1(), b.r2());
    let (indices, sampled) = index_sample(f, f.base_size(), budget, seed);
    // Per z₀: every point of S(z₀, j) is sent by g to z₁ = (z₀, j), f(z₁) = z₀,
    // each block has r₂ points and #{j : z₂ ∈ S(z₀, j)} = 1 for every z₂.
    // Together these give g⁻¹(z₁) = {f(z₁)} × S(z₁) with r₂ elements.
    let per_index = |z0: u64| -> Result<(), String> {
        let mut cover = vec![0u32; f.base_size() as usize];
        for j in 1..=r1 {
            let z1 = z0 * r1 + j - 1;
            if b.f(z1) != z0 {
                return Err(format!("f({z1}) ≠ {z0}"));
            }
            let block = f.block(z0, j);
            if block.len() as u64 != r2 {
                return Err(format!("|S({z1})| = {}", block.len()));
            }
            for z2 in block {
                cover[z2 as usize] += 1;
                if b.g(z0, z2) != z1 {
                    return Err(format!("g({z0},{z2}) ≠ {z1} although {z2} ∈ S({z1})"));
                }
            }
        }
        match cover.iter().position(|&c| c != 1) {
            Some(z2) => Err(format!("{z2} lies in {} blocks of Π_{z0}", cover[z2])),
            None => Ok(()),
        }
    };
    let failure = if indices.is_empty() {
        let mut rng = rng_for(seed, "brick_g_sample", 0);
        (0..POINT_SAMPLES).find_map(|_| {
            let (z0, z2) = (rng.random_range(0..f.index_count()), rng.random_range(0..f.base_size()));
            let z1 = b.g(z0, z2);
            (b.f(z1) != z0 || b.s_rank(z1, z2).is_none()).then(|| format!("g({z0},{z2}) = {z1} is inconsistent"))
        })
    } else {
        crate::exec::map_slice(exec, &indices, |&z0| per_index(z0).err()).into_iter().flatten().next()
    };
    let ok = failure.is_none();
    let method = if sampled { "sampled indices" } else { "exhaustive over F₀ × F₂" };
    let algebraic = f.field().is_some();
    let partial = sampled && !algebraic;
    let f0 = b.f0_size() as u128;
    let f1 = b.f1_size() as u128;
    let f2 = b.f2_size() as u128;
    let (an, ad) = f.alpha();
    let max_int = b.family_report.transversality.max_intersection;
    let max_overlap = BigRational::new(BigInt::from(max_int), BigInt::from(r2));
    let alpha = b.alpha();
    // Overlap equals 1 − TV on the worst pair, computed both ways.
    let worst_pair = b.family_report.transversality.worst_pair.map(|(x, y)| (x.0 * r1 + x.1 - 1, y.0 * r1 + y.1 - 1));
    let overlap_consistent = worst_pair.is_none_or(|(x, y)| {
        let (kx, ky) = (b.kernel_2(x), b.kernel_2(y));
        overlap(&kx, &ky) == max_overlap && overlap(&kx, &ky) + total_variation(&kx, &ky) == BigRational::one()
    });
    let clauses = vec![
        Clause::new("z0_z2_independent", ok, method, failure.clone()).sampled(partial),
        Clause::new("z1_function_of_z0_z2", ok, method, failure.clone()).sampled(partial),
        Clause::new("z0_function_of_z1", ok, method, failure.clone()).sampled(partial),
        Clause::new("z1_given_z0_uniform_r1", ok, method, failure.clone()).sampled(partial),
        Clause::new("z2_given_z1_uniform_r2", ok, method, failure.clone()).sampled(partial),
        Clause::new(
            "bad_coupling_overlap",
            max_overlap <= alpha && overlap_consistent,
            &b.family_report.transversality.method,
            worst_pair.map(|p| format!("{p:?}")),
        )
        .sampled(!b.family_report.transversality.complete),
        Clause::new("f_r1_to_one_and_g_r2_to_one", ok, method, failure.clone()).sampled(partial),
        Clause::new("z2_given_z1_uniform_on_S", ok, method, failure.clone()).sampled(partial),
        Clause::new("S_partitions_F2", ok, method, failure).sampled(partial),
        Clause::new(
            "sizes",
            f1 == r1 as u128 * f0 && f0 * f2 == r2 as u128 * f1 && f2 == r1 as u128 * r2 as u128,
            "count",
            Some(format!("|F₀|={f0} |F₁|={f1} |F₂|={f2}")),
        ),
        Clause::new(
            "small_intersections",
            f.within_alpha(max_int),
            &b.family_report.transversality.method,
            Some(format!("max |S′ ∩ S″| = {max_int}")),
        )
        .sampled(!b.family_report.transversality.complete),
        Clause::new(
            "r2_at_least_inverse_alpha",
            f0 < 2 || r2 as u128 * an as u128 >= ad as u128,
            "count",
            Some(format!("r₂ = {r2}, α = {an}/{ad}")),
        ),
    ];
    BrickReport {
        family: b.family_report.clone(),
        f0: b.f0_size(),
        f1: b.f1_size(),
        f2: b.f2_size(),
        clauses,
        worst_separation: BigRational::one() - &max_overlap,
        max_overlap,
        alpha,
        worst_pair,
    }
}

/// Materialised or generator-backed family by name.
pub fn family_by_name(name: &str, q: u64, mode: Mode) -> Result<PartitionFamily, BrickError> {
    match name {
        "matrix" => PartitionFamily::matrix(q, mode),
        "quartic" => PartitionFamily::quartic(q),
        other => Err(BrickError::BadParameter(format!("unknown family {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn quartic_five_passes_everything() {
        let b = StrongBrick::assemble(PartitionFamily::quartic(5).unwrap(), DEFAULT_BUDGET, Execution::Parallel).unwrap();
        assert_eq!((b.f0_size(), b.f1_size(), b.f2_size()), (625, 3125, 25));
        let rep = verify_strong_brick(&b, DEFAULT_BUDGET, 0, Execution::Parallel);
        assert!(rep.passes(), "{:#?}", rep.clauses);
        assert_eq!(rep.max_overlap, r(4, 5));
        assert_eq!(rep.worst_separation, r(1, 5));
        // Same partition, distinct blocks.
        assert!(b.overlap(0, 1).is_zero());
    }

    #[test]
    fn matrix_two_rank_certified() {
        let f = PartitionFamily::matrix(2, Mode::Materialized).unwrap();
        let rep = verify_family(&f, DEFAULT_BUDGET, 0, Execution::Parallel);
        assert!(rep.failures().is_empty(), "{rep:#?}");
        let hist = rep.transversality.rank_histogram.unwrap();
        assert_eq!(hist.iter().sum::<u64>(), 65535);
        // Nonzero 4×4 matrices over GF(2) of each rank.
        assert_eq!(hist, [225, 7350, 37800, 20160]);
        assert_eq!(rep.transversality.max_intersection, 8);
    }

    #[test]
    fn rank_four_difference_meets_once() {
        let f = PartitionFamily::matrix(2, Mode::Materialized).unwrap();
        let field = f.field().unwrap().clone();
        let identity_code = (0..4).fold(0u64, |acc, i| acc | 1 << (15 - 5 * i));
        assert_eq!(f.matrix_of(identity_code).rank(&field), 4);
        let b = StrongBrick::assemble(f, 1 << 16, Execution::Parallel).unwrap();
        let (x, y) = (0, identity_code * 16);
        assert_eq!(b.common_count(x, y), 1);
        assert_eq!(b.overlap(x, y), r(1, 16));
    }

    #[test]
    fn broken_family_is_rejected_with_witness() {
        // Two partitions of {0..3} into pairs sharing a block.
        let blocks = vec![vec![vec![0, 1], vec![2, 3]], vec![vec![0, 1], vec![2, 3]]];
        let f = PartitionFamily::explicit(blocks, (1, 2)).unwrap();
        let err = StrongBrick::assemble(f, DEFAULT_BUDGET, Execution::Sequential).unwrap_err();
        assert!(matches!(err, BrickError::Invariant { ref clause, .. } if clause == "transversality"), "{err}");
        let blocks = vec![vec![vec![0, 1], vec![1, 3]]];
        let f = PartitionFamily::explicit(blocks, (1, 2)).unwrap();
        let err = StrongBrick::assemble(f, DEFAULT_BUDGET, Execution::Sequential).unwrap_err();
        assert!(matches!(err, BrickError::Invariant { ref clause, .. } if clause == "blocks_partition_F2"));
    }

    #[test]
    fn explicit_transversal_family() {
        // Rows and columns of a 2×2 grid.
        let blocks = vec![vec![vec![0, 1], vec![2, 3]], vec![vec![0, 2], vec![1, 3]]];
        let f = PartitionFamily::explicit(blocks, (1, 2)).unwrap();
        let b = StrongBrick::assemble(f, DEFAULT_BUDGET, Execution::Sequential).unwrap();
        let rep = verify_strong_brick(&b, DEFAULT_BUDGET, 0, Execution::Sequential);
        assert!(rep.passes(), "{rep:#?}");
        assert_eq!(rep.max_overlap, r(1, 2));
    }
}
