//! Split-words processes over a uniform finite alphabet.
//!
//! X at the deepest level is a uniform word of length ℓ_{−N}; going up,
//! X_n is the U_n-th of the r_n contiguous blocks of X_{n−1}, with U_n
//! uniform on {1..r_n} and independent of the past.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exec::{map_reduce, Execution};
use crate::sequences::{index_of_depth, ExtractionSet, LengthSequence};

/// Outcome budget for exact enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 24;

/// Longest word a sampled path may hold.
pub const MAX_WORD_LENGTH: u64 = 1 << 26;

const DIGITS: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SplitWordsError {
    #[error("alphabet size must be in 2..=36, got {0}")]
    BadAlphabet(u32),
    #[error("invalid lengths: {0}")]
    BadLengths(String),
    #[error("exact enumeration needs {needed} outcomes, budget is {budget}")]
    BudgetExceeded { needed: String, budget: u64 },
    #[error("invalid extraction: {0}")]
    BadExtraction(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitWordsSpec {
    alphabet: u32,
    /// ℓ by depth; `lengths[0] = 1`.
    lengths: Vec<u64>,
}

impl SplitWordsSpec {
    /// `lengths` are given by depth: ℓ₀, ℓ₋₁, …, ℓ₋N.
    pub fn new(alphabet: u32, lengths: Vec<u64>) -> Result<SplitWordsSpec, SplitWordsError> {
        if !(2..=36).contains(&alphabet) {
            return Err(SplitWordsError::BadAlphabet(alphabet));
        }
        if lengths.first() != Some(&1) {
            return Err(SplitWordsError::BadLengths("ℓ at n=0 must be 1".into()));
        }
        if lengths.windows(2).any(|w| w[1] % w[0] != 0) {
            return Err(SplitWordsError::BadLengths("each length must divide the next deeper one".into()));
        }
        Ok(SplitWordsSpec { alphabet, lengths })
    }

    /// Lengths listed deepest first, as in ℓ = (4, 2, 1).
    pub fn from_deepest_first(alphabet: u32, lengths: &[u64]) -> Result<SplitWordsSpec, SplitWordsError> {
        SplitWordsSpec::new(alphabet, lengths.iter().rev().copied().collect())
    }

    pub fn from_sequence(seq: &LengthSequence, alphabet: u32) -> Result<SplitWordsSpec, SplitWordsError> {
        let lengths = seq
            .lengths()
            .iter()
            .map(|l| l.exact().and_then(|x| x.to_u64()))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| SplitWordsError::BadLengths("every length in the window must be an exact u64".into()))?;
        SplitWordsSpec::new(alphabet, lengths)
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn depth(&self) -> u64 {
        self.lengths.len() as u64 - 1
    }

    pub fn length(&self, d: u64) -> u64 {
        self.lengths[d as usize]
    }

    /// r at depth d (d < N).
    pub fn ratio(&self, d: u64) -> u64 {
        self.lengths[d as usize + 1] / self.lengths[d as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathLevel {
    pub n: i64,
    pub length: u64,
    pub word: Vec<u8>,
    /// Block index of this word inside the next deeper word; absent at the
    /// deepest level.
    pub u: Option<u64>,
    /// Number of blocks of the next deeper word.
    pub r: Option<u64>,
}

/// Levels ordered from the top (n = 0 side) to the deepest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitWordsPath {
    pub alphabet: u32,
    pub levels: Vec<PathLevel>,
}

fn block(word: &[u8], u: u64, len: u64) -> &[u8] {
    let start = ((u - 1) * len) as usize;
    &word[start..start + len as usize]
}

impl SplitWordsPath {
    /// Checks that each word is the U-th block of the next deeper word.
    pub fn verify(&self) -> bool {
        self.levels.windows(2).all(|w| {
            let (up, down) = (&w[0], &w[1]);
            let (Some(u), Some(r)) = (up.u, up.r) else { return false };
            up.word.len() as u64 == up.length
                && down.length == r * up.length
                && (1..=r).contains(&u)
                && block(&down.word, u, up.length) == up.word.as_slice()
        }) && self.levels.last().is_some_and(|l| l.u.is_none())
    }

    /// JSON lines {n, word, U}, deepest level first.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for level in self.levels.iter().rev() {
            let word: String = level.word.iter().map(|&c| DIGITS[c as usize] as char).collect();
            let line = serde_json::json!({ "n": level.n, "word": word, "U": level.u });
            writeln!(out, "{line}").expect("string write");
        }
        out
    }
}

fn uniform_word(rng: &mut ChaCha8Rng, alphabet: u32, len: u64) -> Vec<u8> {
    (0..len).map(|_| rng.random_range(0..alphabet) as u8).collect()
}

/// Builds the path from the deepest word and the innovations by depth
/// (`innovations[d]` for d < N).
pub fn simulate_forward(spec: &SplitWordsSpec, deepest: Vec<u8>, innovations: &[u64]) -> SplitWordsPath {
    let n = spec.depth();
    assert_eq!(deepest.len() as u64, spec.length(n));
    assert_eq!(innovations.len() as u64, n);
    let mut levels = vec![PathLevel { n: index_of_depth(n), length: spec.length(n), word: deepest, u: None, r: None }];
    for d in (0..n).rev() {
        let u = innovations[d as usize];
        let below = &levels.last().unwrap().word;
        let word = block(below, u, spec.length(d)).to_vec();
        levels.push(PathLevel { n: index_of_depth(d), length: spec.length(d), word, u: Some(u), r: Some(spec.ratio(d)) });
    }
    levels.reverse();
    SplitWordsPath { alphabet: spec.alphabet, levels }
}

/// One path from `seed`: uniform deepest word, then uniform innovations
/// from the deepest level upwards.
pub fn sample_path(spec: &SplitWordsSpec, seed: u64) -> Result<SplitWordsPath, SplitWordsError> {
    let n = spec.depth();
    if spec.length(n) > MAX_WORD_LENGTH {
        return Err(SplitWordsError::BadLengths(format!(
            "deepest word of length {} exceeds {MAX_WORD_LENGTH}",
            spec.length(n)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let deepest = uniform_word(&mut rng, spec.alphabet, spec.length(n));
    let mut innovations = vec![0; n as usize];
    for d in (0..n).rev() {
        innovations[d as usize] = rng.random_range(1..=spec.ratio(d));
    }
    Ok(simulate_forward(spec, deepest, &innovations))
}

/// Counts of the top letter X₀ over `count` paths with seeds
/// `first_seed..first_seed+count`.
pub fn empirical_top_letter(
    spec: &SplitWordsSpec,
    first_seed: u64,
    count: u64,
    exec: Execution,
) -> Result<Vec<u64>, SplitWordsError> {
    sample_path(spec, first_seed)?;
    let a = spec.alphabet as usize;
    Ok(map_reduce(
        exec,
        count,
        vec![0u64; a],
        |i| {
            let p = sample_path(spec, first_seed + i).expect("checked above");
            let mut v = vec![0u64; a];
            v[p.levels[0].word[0] as usize] += 1;
            v
        },
        |mut x, y| {
            x.iter_mut().zip(y).for_each(|(a, b)| *a += b);
            x
        },
    ))
}

/// Exact law of (X_n, U_n) at one level.
#[derive(Debug, Clone, Serialize)]
pub struct LevelLaw {
    pub n: i64,
    /// |A|^ℓ_n · r_n (r_n = 1 at the deepest level, where U is absent).
    pub support: u64,
    pub r: u64,
    /// Outcome counts per (word code, u) pair, word codes big-endian in
    /// base |A|; indexed `code * r + (u − 1)`.
    pub counts: Vec<u64>,
    pub uniform: bool,
    /// Probability of each point when uniform, as `p/q`.
    pub probability: String,
    /// U_n independent of (X_{n−1}, U_{n−1}) by exact factorisation.
    pub innovation_independent: Option<bool>,
}

impl LevelLaw {
    /// Marginal counts of the word alone, by word code.
    pub fn word_counts(&self) -> Vec<u64> {
        self.counts.chunks(self.r as usize).map(|c| c.iter().sum()).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExactMarginals {
    pub outcomes: u64,
    pub levels: Vec<LevelLaw>,
    pub all_uniform: bool,
    pub all_independent: bool,
}

fn word_code(word: &[u8], alphabet: u64) -> u64 {
    word.iter().fold(0, |acc, &c| acc * alphabet + c as u64)
}

/// Enumerates every (deepest word, innovation tuple) outcome.
pub fn exact_marginals(spec: &SplitWordsSpec, budget: u64) -> Result<ExactMarginals, SplitWordsError> {
    let n = spec.depth();
    let a = spec.alphabet as u64;
    let deep_len = spec.length(n);
    let words = (deep_len <= 64)
        .then(|| a.checked_pow(deep_len as u32))
        .flatten();
    let outcomes = words.and_then(|w| w.checked_mul(deep_len));
    let outcomes = match outcomes {
        Some(o) if o <= budget => o,
        _ => {
            return Err(SplitWordsError::BudgetExceeded {
                needed: format!("{a}^{deep_len}·{deep_len}"),
                budget,
            })
        }
    };
    let words = words.unwrap();
    let levels = n as usize + 1;
    let r_of = |d: u64| if d < n { spec.ratio(d) } else { 1 };
    let mut counts: Vec<Vec<u64>> = (0..=n)
        .map(|d| vec![0u64; (a.pow(spec.length(d) as u32) * r_of(d)) as usize])
        .collect();
    // Joint counts of (U_d, X_{d+1}, U_{d+1}) for d + 1 < N.
    let mut pair_counts: Vec<HashMap<(u64, u64, u64), u64>> = vec![HashMap::new(); levels];
    let mut digits = vec![0u8; deep_len as usize];
    let mut innovations = vec![1u64; n as usize];
    for w in 0..words {
        let mut x = w;
        for slot in digits.iter_mut().rev() {
            *slot = (x % a) as u8;
            x /= a;
        }
        for c in 0..deep_len {
            // Mixed radix over innovations, deepest most significant.
            let mut rest = c;
            for d in 0..n {
                let r = spec.ratio(d);
                innovations[d as usize] = rest % r + 1;
                rest /= r;
            }
            let mut offset = 0u64;
            let mut codes = vec![0u64; levels];
            for d in (0..=n).rev() {
                if d < n {
                    offset += (innovations[d as usize] - 1) * spec.length(d);
                }
                let len = spec.length(d) as usize;
                let word = &digits[offset as usize..offset as usize + len];
                codes[d as usize] = word_code(word, a);
                let u = if d < n { innovations[d as usize] } else { 1 };
                counts[d as usize][(codes[d as usize] * r_of(d) + (u - 1)) as usize] += 1;
            }
            for d in 0..n.saturating_sub(1) {
                let key = (innovations[d as usize], codes[d as usize + 1], innovations[d as usize + 1]);
                *pair_counts[d as usize].entry(key).or_default() += 1;
            }
        }
    }
    let mut out = Vec::new();
    for d in 0..=n {
        let c = &counts[d as usize];
        let support = c.len() as u64;
        let uniform = c.iter().all(|&k| k * support == outcomes);
        let independent = (d + 1 < n).then(|| {
            let pc = &pair_counts[d as usize];
            let mut u_marg: HashMap<u64, u64> = HashMap::new();
            let mut past_marg: HashMap<(u64, u64), u64> = HashMap::new();
            for (&(u, x, v), &k) in pc {
                *u_marg.entry(u).or_default() += k;
                *past_marg.entry((x, v)).or_default() += k;
            }
            let full = u_marg.len() as u64 * past_marg.len() as u64 == pc.len() as u64;
            full && pc.iter().all(|(&(u, x, v), &k)| {
                k as u128 * outcomes as u128 == u_marg[&u] as u128 * past_marg[&(x, v)] as u128
            })
        });
        out.push(LevelLaw {
            n: index_of_depth(d),
            support,
            r: r_of(d),
            counts: c.clone(),
            uniform,
            probability: format!("1/{support}"),
            innovation_independent: independent,
        });
    }
    let all_uniform = out.iter().all(|l| l.uniform);
    let all_independent = out.iter().all(|l| l.innovation_independent != Some(false));
    Ok(ExactMarginals { outcomes, levels: out, all_uniform, all_independent })
}

/// Restricts a path to the levels in `b` (depths within the window). The new
/// innovation at n is the block index of X_n inside X_{m(n)}:
/// Û = 1 + Σ_k (U_k − 1)·ℓ_k/ℓ_n over skipped levels, deepest digit most
/// significant.
pub fn extract_path(path: &SplitWordsPath, b: &ExtractionSet) -> Result<SplitWordsPath, SplitWordsError> {
    b.validate().map_err(|e| SplitWordsError::BadExtraction(e.to_string()))?;
    let horizon = path.levels.len() as u64 - 1;
    let top = -path.levels[0].n as u64;
    let depths: Vec<u64> = (top..=top + horizon).filter(|&d| b.contains(d)).collect();
    if depths.is_empty() {
        return Err(SplitWordsError::BadExtraction("no level of the window is in B".into()));
    }
    let at = |d: u64| &path.levels[(d - top) as usize];
    let mut levels = Vec::new();
    for (i, &d) in depths.iter().enumerate() {
        let lvl = at(d);
        let (u, r) = match depths.get(i + 1) {
            Some(&m) => {
                let mut u_hat = 0u64;
                for k in (d..m).rev() {
                    let l = at(k);
                    u_hat = u_hat * l.r.unwrap() + (l.u.unwrap() - 1);
                }
                (Some(u_hat + 1), Some(at(m).length / lvl.length))
            }
            None => (None, None),
        };
        levels.push(PathLevel { n: lvl.n, length: lvl.length, word: lvl.word.clone(), u, r });
    }
    Ok(SplitWordsPath { alphabet: path.alphabet, levels })
}

/// The pair (X_n, U_n) as a uniform-step chain: the state at depth d is
/// word·R + (U − 1), with R the number of blocks of the next deeper word
/// (R = 1 at the deepest level) and words coded big-endian in base |A|.
#[derive(Debug, Clone)]
pub struct SplitWordsChain {
    spec: SplitWordsSpec,
}

impl SplitWordsChain {
    pub fn new(spec: SplitWordsSpec) -> Result<SplitWordsChain, SplitWordsError> {
        let a = spec.alphabet() as u64;
        for d in 0..=spec.depth() {
            let r = if d == spec.depth() { 1 } else { spec.ratio(d) };
            u32::try_from(spec.length(d))
                .ok()
                .and_then(|l| a.checked_pow(l))
                .and_then(|w| w.checked_mul(r))
                .ok_or_else(|| SplitWordsError::BadLengths(format!("states at n={} overflow u64", index_of_depth(d))))?;
        }
        Ok(SplitWordsChain { spec })
    }

    pub fn spec(&self) -> &SplitWordsSpec {
        &self.spec
    }

    fn blocks_above(&self, d: u64) -> u64 {
        if d == self.spec.depth() {
            1
        } else {
            self.spec.ratio(d)
        }
    }

    /// Code of the word X at depth d.
    pub fn word_of(&self, d: u64, state: u64) -> u64 {
        state / self.blocks_above(d)
    }

    fn block_code(&self, d: u64, word: u64, i: u64) -> u64 {
        let a = self.spec.alphabet() as u64;
        let (big, small) = (self.spec.length(d), self.spec.length(d - 1));
        let shift = a.pow((big - (i + 1) * small) as u32);
        (word / shift) % a.pow(small as u32)
    }
}

impl crate::coupling::UniformSteps for SplitWordsChain {
    fn depth(&self) -> u64 {
        self.spec.depth()
    }

    fn state_count(&self, d: u64) -> u64 {
        (self.spec.alphabet() as u64).pow(self.spec.length(d) as u32) * self.blocks_above(d)
    }

    fn step_size(&self, d: u64) -> u64 {
        self.spec.ratio(d - 1)
    }

    fn step_point(&self, d: u64, s: u64, i: u64) -> u64 {
        let r = self.step_size(d);
        self.block_code(d, self.word_of(d, s), i) * r + i
    }

    fn step_rank(&self, d: u64, s: u64, next: u64) -> Option<u64> {
        let r = self.step_size(d);
        let i = next % r;
        (self.block_code(d, self.word_of(d, s), i) == next / r).then_some(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(lengths: &[u64]) -> SplitWordsSpec {
        SplitWordsSpec::from_deepest_first(2, lengths).unwrap()
    }

    #[test]
    fn direct_block_extraction() {
        let s = spec(&[4, 2, 1]);
        let p = simulate_forward(&s, vec![0, 1, 1, 0], &[1, 2]);
        assert_eq!(p.levels[1].word, vec![1, 0]);
        assert_eq!(p.levels[0].word, vec![1]);
        assert!(p.verify());
        let lines = p.to_jsonl();
        assert_eq!(lines.lines().next().unwrap(), r#"{"U":null,"n":-2,"word":"0110"}"#);
    }

    #[test]
    fn single_block_level_copies_the_word() {
        let s = spec(&[2, 2, 1]);
        let p = sample_path(&s, 3).unwrap();
        assert_eq!(p.levels[1].word, p.levels[2].word);
        assert_eq!(p.levels[1].u, Some(1));
    }

    #[test]
    fn top_letter_is_uniform_empirically() {
        let s = spec(&[4, 2, 1]);
        let n = 100_000u64;
        let counts = empirical_top_letter(&s, 0, n, Execution::Parallel).unwrap();
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((counts[0] as f64 - n as f64 / 2.0).abs() < 3.0 * sigma, "{counts:?}");
        assert_eq!(counts, empirical_top_letter(&s, 0, n, Execution::Sequential).unwrap());
    }

    #[test]
    fn exact_laws_small_cases() {
        let m = exact_marginals(&spec(&[2, 1]), DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(m.outcomes, 8);
        // X₀ ∈ {0,1} with U₀ ∈ {1,2}: four cells of 2 outcomes each.
        assert_eq!(m.levels[0].counts, vec![2, 2, 2, 2]);
        assert_eq!(m.levels[0].word_counts(), vec![4, 4]);
        let m = exact_marginals(&spec(&[4, 2, 1]), DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(m.outcomes, 64);
        assert!(m.all_uniform && m.all_independent);
        assert_eq!(m.levels[1].counts.len(), 8);
        assert!(m.levels[1].counts.iter().all(|&c| c == 8));
        let m = exact_marginals(&spec(&[1]), DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(m.levels[0].counts, vec![1, 1]);
        assert_eq!(m.levels[0].probability, "1/2");
    }

    #[test]
    fn budget_is_explicit() {
        let err = exact_marginals(&spec(&[32, 16, 1]), DEFAULT_ENUMERATION_BUDGET).unwrap_err();
        assert!(matches!(err, SplitWordsError::BudgetExceeded { .. }));
    }

    #[test]
    fn extraction_composes_innovations() {
        let s = spec(&[4, 2, 1]);
        let b = ExtractionSet::residue_class(2, 0);
        for (u1, u0) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            let p = simulate_forward(&s, vec![0, 1, 1, 0], &[u0, u1]);
            let e = extract_path(&p, &b).unwrap();
            assert_eq!(e.levels.len(), 2);
            let u_hat = 2 * (u1 - 1) + u0;
            assert_eq!(e.levels[0].u, Some(u_hat));
            assert_eq!(e.levels[0].word[0], [0u8, 1, 1, 0][(u_hat - 1) as usize]);
            assert!(e.verify());
        }
        let p = sample_path(&s, 9).unwrap();
        assert_eq!(extract_path(&p, &ExtractionSet::all()).unwrap(), p);
    }

    proptest! {
        #[test]
        fn extract_then_forward_equals_path(seed in 0u64..1000, mask in 1u64..64) {
            let s = SplitWordsSpec::from_deepest_first(3, &[24, 12, 6, 3, 3, 1]).unwrap();
            let residues = (0..6).filter(|r| mask >> r & 1 == 1).collect();
            let b = ExtractionSet::new(Default::default(), 0, 6, residues).unwrap();
            let p = sample_path(&s, seed).unwrap();
            prop_assert!(p.verify());
            let e = extract_path(&p, &b).unwrap();
            prop_assert!(e.verify());
            let lengths: Vec<u64> = e.levels.iter().map(|l| l.length).collect();
            let top = lengths[0];
            let rel: Vec<u64> = lengths.iter().map(|l| l / top).collect();
            let es = SplitWordsSpec::new(3, rel).unwrap();
            // Re-simulate with letters regrouped into blocks of `top` letters:
            // compare block indices only, since the extracted top length may
            // exceed one.
            let deepest = e.levels.last().unwrap();
            let innov: Vec<u64> = e.levels.iter().filter_map(|l| l.u).collect();
            let chunks = deepest.length / top;
            let ids: Vec<u8> = (0..chunks as u8).collect();
            prop_assume!(chunks <= 36);
            let f = simulate_forward(&es, ids, &innov);
            for (lf, le) in f.levels.iter().zip(&e.levels) {
                let start = lf.word[0] as usize * top as usize;
                prop_assert_eq!(&deepest.word[start..start + le.length as usize], le.word.as_slice());
            }
        }
    }

    #[test]
    fn chain_view_matches_block_structure() {
        use crate::coupling::{FiniteProcessLaw, UniformSteps};
        let spec = SplitWordsSpec::from_deepest_first(2, &[4, 2, 1]).unwrap();
        let c = SplitWordsChain::new(spec).unwrap();
        assert_eq!((c.state_count(2), c.state_count(1), c.state_count(0)), (16, 8, 4));
        // Word 0b1011 splits into blocks 10 and 11.
        assert_eq!(c.step_support(2, 0b1011), vec![0b10 * 2, 0b11 * 2 + 1]);
        assert_eq!(c.step_rank(2, 0b1011, 0b11 * 2 + 1), Some(1));
        assert_eq!(c.step_rank(2, 0b1011, 0b11 * 2), None);
        // Every level uniform, as the exact enumeration says.
        let law = FiniteProcessLaw::from_uniform(&c, 1 << 20).unwrap();
        let (marg, den) = law.marginals();
        for d in 0..=2usize {
            let n = marg[d].len() as u128;
            assert!(marg[d].iter().all(|&w| w * n == den[d]));
        }
    }
}
