//! Exact finite distributions with integer weights.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde::Serialize;

/// Weights over state codes; probability of `s` is `weight(s) / total`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Dist {
    atoms: Vec<(u64, u64)>,
    total: u64,
}

impl Dist {
    /// Merges repeated states and drops zero weights.
    pub fn new(mut atoms: Vec<(u64, u64)>) -> Dist {
        atoms.sort_unstable();
        let mut merged: Vec<(u64, u64)> = Vec::with_capacity(atoms.len());
        for (s, w) in atoms {
            match merged.last_mut() {
                Some((last, acc)) if *last == s => *acc += w,
                _ => merged.push((s, w)),
            }
        }
        merged.retain(|&(_, w)| w > 0);
        let total = merged.iter().map(|&(_, w)| w).sum();
        assert!(total > 0, "distribution without mass");
        Dist { atoms: merged, total }
    }

    pub fn uniform(states: impl IntoIterator<Item = u64>) -> Dist {
        Dist::new(states.into_iter().map(|s| (s, 1)).collect())
    }

    pub fn point(s: u64) -> Dist {
        Dist { atoms: vec![(s, 1)], total: 1 }
    }

    pub fn atoms(&self) -> &[(u64, u64)] {
        &self.atoms
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.atoms.iter().map(|&(s, _)| s)
    }

    pub fn weight(&self, s: u64) -> u64 {
        self.atoms.binary_search_by_key(&s, |&(x, _)| x).map_or(0, |i| self.atoms[i].1)
    }

    pub fn prob(&self, s: u64) -> BigRational {
        BigRational::new(self.weight(s).into(), self.total.into())
    }

    pub fn is_uniform(&self) -> bool {
        self.atoms.iter().all(|&(_, w)| w == self.atoms[0].1)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let mut x = rng.random_range(0..self.total);
        for &(s, w) in &self.atoms {
            if x < w {
                return s;
            }
            x -= w;
        }
        unreachable!("weights sum to total")
    }
}

/// Σ_z min(a(z), b(z)), computed over a common denominator.
pub fn overlap(a: &Dist, b: &Dist) -> BigRational {
    let (ta, tb) = (a.total as u128, b.total as u128);
    let mut sum = 0u128;
    let (mut i, mut j) = (0, 0);
    while i < a.atoms.len() && j < b.atoms.len() {
        let ((sa, wa), (sb, wb)) = (a.atoms[i], b.atoms[j]);
        match sa.cmp(&sb) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                sum += (wa as u128 * tb).min(wb as u128 * ta);
                i += 1;
                j += 1;
            }
        }
    }
    BigRational::new(BigInt::from(sum), BigInt::from(ta * tb))
}

/// ½ Σ_z |a(z) − b(z)|, by a separate pass over the union of supports.
pub fn total_variation(a: &Dist, b: &Dist) -> BigRational {
    let (ta, tb) = (a.total as i128, b.total as i128);
    let mut states: Vec<u64> = a.support().chain(b.support()).collect();
    states.sort_unstable();
    states.dedup();
    let diff: i128 = states
        .iter()
        .map(|&s| (a.weight(s) as i128 * tb - b.weight(s) as i128 * ta).abs())
        .sum();
    BigRational::new(BigInt::from(diff), BigInt::from(2 * ta * tb))
}

/// Joint law of a pair of states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JointDist {
    pub atoms: Vec<((u64, u64), u128)>,
    pub total: u128,
}

impl JointDist {
    pub fn new(mut atoms: Vec<((u64, u64), u128)>) -> JointDist {
        atoms.sort_unstable();
        let mut merged: Vec<((u64, u64), u128)> = Vec::with_capacity(atoms.len());
        for (s, w) in atoms {
            match merged.last_mut() {
                Some((last, acc)) if *last == s => *acc += w,
                _ => merged.push((s, w)),
            }
        }
        merged.retain(|&(_, w)| w > 0);
        let g = merged.iter().fold(0u128, |acc, &(_, w)| num_integer::gcd(acc, w)).max(1);
        merged.iter_mut().for_each(|(_, w)| *w /= g);
        let total = merged.iter().map(|&(_, w)| w).sum();
        JointDist { atoms: merged, total }
    }

    /// Marginal weights of one coordinate, scaled to `self.total`.
    pub fn marginal(&self, first: bool) -> Vec<(u64, u128)> {
        let mut m: Vec<(u64, u128)> = self
            .atoms
            .iter()
            .map(|&((a, b), w)| (if first { a } else { b }, w))
            .collect();
        m.sort_unstable();
        let mut out: Vec<(u64, u128)> = Vec::new();
        for (s, w) in m {
            match out.last_mut() {
                Some((last, acc)) if *last == s => *acc += w,
                _ => out.push((s, w)),
            }
        }
        out
    }

    /// Whether the chosen marginal equals `d` exactly.
    pub fn has_marginal(&self, first: bool, d: &Dist) -> bool {
        let m = self.marginal(first);
        m.len() == d.atoms.len()
            && m.iter().zip(&d.atoms).all(|(&(s, w), &(t, v))| {
                s == t && w * d.total as u128 == v as u128 * self.total
            })
    }

    pub fn diagonal_mass(&self) -> BigRational {
        let diag: u128 = self.atoms.iter().filter(|((a, b), _)| a == b).map(|&(_, w)| w).sum();
        BigRational::new(BigInt::from(diag), BigInt::from(self.total))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (u64, u64) {
        let mut x = rng.random_range(0..self.total);
        for &(s, w) in &self.atoms {
            if x < w {
                return s;
            }
            x -= w;
        }
        unreachable!("weights sum to total")
    }
}

/// Maximal coupling: mass min(a, b) on the diagonal, the residuals coupled
/// independently.
pub fn maximal_coupling(a: &Dist, b: &Dist) -> JointDist {
    let (ta, tb) = (a.total as u128, b.total as u128);
    let t = ta * tb;
    let mut states: Vec<u64> = a.support().chain(b.support()).collect();
    states.sort_unstable();
    states.dedup();
    let scaled: Vec<(u64, u128, u128)> = states
        .iter()
        .map(|&s| (s, a.weight(s) as u128 * tb, b.weight(s) as u128 * ta))
        .collect();
    let meet: u128 = scaled.iter().map(|&(_, x, y)| x.min(y)).sum();
    if meet == t {
        return JointDist::new(scaled.iter().map(|&(s, x, _)| ((s, s), x)).collect());
    }
    let rest = t - meet;
    let mut atoms: Vec<((u64, u64), u128)> = scaled
        .iter()
        .filter(|&&(_, x, y)| x.min(y) > 0)
        .map(|&(s, x, y)| ((s, s), x.min(y) * rest))
        .collect();
    for &(s, x, y) in &scaled {
        let ra = x - x.min(y);
        if ra == 0 {
            continue;
        }
        for &(u, x2, y2) in &scaled {
            let rb = y2 - x2.min(y2);
            if rb > 0 {
                atoms.push(((s, u), ra * rb));
            }
        }
    }
    JointDist::new(atoms)
}

pub fn independent_coupling(a: &Dist, b: &Dist) -> JointDist {
    let mut atoms = Vec::with_capacity(a.atoms.len() * b.atoms.len());
    for &(s, x) in &a.atoms {
        for &(u, y) in &b.atoms {
            atoms.push(((s, u), x as u128 * y as u128));
        }
    }
    JointDist::new(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn overlap_basics() {
        let a = Dist::uniform(0..5);
        assert_eq!(overlap(&a, &a), BigRational::one());
        assert_eq!(overlap(&a, &Dist::uniform(5..10)), BigRational::zero());
        assert_eq!(overlap(&a, &Dist::uniform(1..6)), r(4, 5));
        assert_eq!(total_variation(&a, &Dist::uniform(1..6)), r(1, 5));
    }

    #[test]
    fn maximal_coupling_merges_overlap() {
        let a = Dist::uniform(0..5);
        let b = Dist::uniform(1..6);
        let j = maximal_coupling(&a, &b);
        assert_eq!(j.diagonal_mass(), r(4, 5));
        assert!(j.has_marginal(true, &a) && j.has_marginal(false, &b));
        let same = maximal_coupling(&a, &a);
        assert_eq!(same.diagonal_mass(), BigRational::one());
        let disjoint = maximal_coupling(&a, &Dist::uniform(10..12));
        assert_eq!(disjoint, independent_coupling(&a, &Dist::uniform(10..12)));
    }

    fn dist_strategy() -> impl Strategy<Value = Dist> {
        prop::collection::vec((0u64..12, 0u64..6), 1..10).prop_filter_map("mass", |v| {
            (v.iter().any(|&(_, w)| w > 0)).then(|| Dist::new(v))
        })
    }

    proptest! {
        #[test]
        fn overlap_plus_tv_is_one(a in dist_strategy(), b in dist_strategy()) {
            prop_assert_eq!(overlap(&a, &b) + total_variation(&a, &b), BigRational::one());
        }

        #[test]
        fn maximal_coupling_is_consistent(a in dist_strategy(), b in dist_strategy()) {
            let j = maximal_coupling(&a, &b);
            prop_assert!(j.has_marginal(true, &a));
            prop_assert!(j.has_marginal(false, &b));
            prop_assert_eq!(j.diagonal_mass(), overlap(&a, &b));
        }
    }
}
