//! Execution policy for data-parallel loops and the seed-splitting scheme.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] runs on the
//! rayon pool; without it every loop runs sequentially. Reductions only use
//! commutative, associative combiners over integers, so both paths return
//! identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Maps every index in `0..n` and folds the results with `combine`.
pub fn map_reduce<T, M, C>(exec: Execution, n: u64, identity: T, map: M, combine: C) -> T
where
    T: Send + Sync + Clone,
    M: Fn(u64) -> T + Send + Sync,
    C: Fn(T, T) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n)
            .into_par_iter()
            .map(&map)
            .reduce(|| identity.clone(), &combine);
    }
    let _ = exec;
    (0..n).map(map).fold(identity, combine)
}

/// Ordered parallel map over `0..n`.
pub fn map_collect<T, M>(exec: Execution, n: u64, map: M) -> Vec<T>
where
    T: Send,
    M: Fn(u64) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(map).collect();
    }
    let _ = exec;
    (0..n).map(map).collect()
}

/// Ordered parallel map over a slice.
pub fn map_slice<S, T, M>(exec: Execution, items: &[S], map: M) -> Vec<T>
where
    S: Sync,
    T: Send,
    M: Fn(&S) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(map).collect();
    }
    let _ = exec;
    items.iter().map(map).collect()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(tag: &str) -> u64 {
    tag.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Seed for replicate `index` of the stream `tag` under `root`:
/// splitmix(splitmix(root ⊕ fnv1a(tag)) + index).
pub fn derive_seed(root: u64, tag: &str, index: u64) -> u64 {
    splitmix64(splitmix64(root ^ fnv1a(tag)).wrapping_add(index))
}

pub fn rng_for(root: u64, tag: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, tag, index))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        assert_eq!(derive_seed(7, "coupling", 3), derive_seed(7, "coupling", 3));
        assert_ne!(derive_seed(7, "coupling", 3), derive_seed(7, "coupling", 4));
        assert_ne!(derive_seed(7, "coupling", 3), derive_seed(7, "split_words", 3));
        assert_ne!(derive_seed(7, "coupling", 3), derive_seed(8, "coupling", 3));
    }

    #[test]
    fn both_execution_paths_agree() {
        let f = |i: u64| i * i % 97;
        let seq = map_reduce(Execution::Sequential, 10_000, 0u64, f, |a, b| a + b);
        let par = map_reduce(Execution::Parallel, 10_000, 0u64, f, |a, b| a + b);
        assert_eq!(seq, par);
        assert_eq!(
            map_collect(Execution::Sequential, 100, f),
            map_collect(Execution::Parallel, 100, f)
        );
    }
}
