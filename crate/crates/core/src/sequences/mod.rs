//! Word-length sequences (ℓ_n)_{n≤0} and the series predicates deciding
//! standardness of the associated split-words filtrations.
//!
//! Arrays are indexed by depth d = −n; the ratio at depth d is
//! r = ℓ_{d+1}/ℓ_d and exists for d < N. Lengths are exact integers up to
//! a bit budget and powers of two with a stored exponent beyond it.

mod alpha;
mod extraction;
pub mod log2;
mod slowing;
pub mod spec;
mod verdict;

pub use alpha::AlphaPattern;
pub use extraction::{
    analyze_extraction, ExtractedLevel, ExtractionAnalysis, ExtractionClass, ExtractionSet,
};
pub use slowing::{classify_slowed, slow, SlowedAnalysis, SlowingMap, SlowingResult};
pub use verdict::{
    box_verdict, classify, delta_verdict, depth_divided_checks, star_verdict, alpha_weighted_checks,
    threshold_verdict, BoxReport, Classification, InequalityCheck, SeriesKind, SeriesVerdict,
    StarReport, TermBound, ThresholdReport, Truth, UserCertificate,
};

use log2::{log2_enclosure, Enclosure, DEFAULT_PRECISION};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SequenceError {
    #[error("horizon truncated: depth {requested} requested but only depth {reachable} is representable within the exponent budget")]
    TruncatedHorizon { requested: u64, reachable: u64 },
    #[error("invalid depth: {0}")]
    BadDepth(String),
    #[error("invalid lengths: {0}")]
    InvalidLengths(String),
    #[error("invalid alpha: {0}")]
    InvalidAlpha(String),
    #[error("invalid extraction set: {0}")]
    InvalidExtraction(String),
    #[error("query outside the horizon: {0}")]
    OutsideHorizon(String),
}

/// Representation limits. A length 2^e is materialised while e < `exact_bits`
/// and kept symbolic while e has at most `exponent_bits` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub exact_bits: u64,
    pub exponent_bits: u64,
}

impl Default for Budget {
    fn default() -> Budget {
        Budget { exact_bits: 1 << 16, exponent_bits: 1 << 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Length {
    Exact(BigUint),
    /// 2^exponent, too large to materialise.
    Pow2(BigUint),
}

impl Length {
    fn pow2(e: BigUint, budget: &Budget) -> Option<Length> {
        match e.to_u64() {
            Some(small) if small < budget.exact_bits => Some(Length::Exact(BigUint::one() << small)),
            _ if e.bits() <= budget.exponent_bits => Some(Length::Pow2(e)),
            _ => None,
        }
    }

    pub fn exact(&self) -> Option<&BigUint> {
        match self {
            Length::Exact(x) => Some(x),
            Length::Pow2(_) => None,
        }
    }

    /// log₂ ℓ when ℓ is a power of two.
    pub fn exponent(&self) -> Option<BigUint> {
        match self {
            Length::Exact(x) => log2::exact_log2(x).map(BigUint::from),
            Length::Pow2(e) => Some(e.clone()),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Length::Exact(_))
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Length::Exact(x) => write!(f, "{x}"),
            Length::Pow2(e) => write!(f, "2^{e}"),
        }
    }
}

/// A value log₂(ℓ_b/ℓ_a)/ℓ_a.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermValue {
    Exact(BigRational),
    /// Enclosure from the log₂ squaring chain (non power-of-two ratios).
    Interval(Enclosure),
    /// numerator / 2^log2_denominator with a denominator too large to
    /// materialise.
    Symbolic { numerator: BigUint, log2_denominator: BigUint },
}

impl TermValue {
    pub fn enclosure(&self) -> Option<Enclosure> {
        match self {
            TermValue::Exact(x) => Some(Enclosure::point(x.clone())),
            TermValue::Interval(e) => Some(e.clone()),
            TermValue::Symbolic { .. } => None,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            TermValue::Exact(x) => x > &BigRational::zero(),
            TermValue::Interval(e) => e.lo > BigRational::zero(),
            TermValue::Symbolic { numerator, .. } => !numerator.is_zero(),
        }
    }
}

impl fmt::Display for TermValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermValue::Exact(x) => write!(f, "{}", crate::rational::format(x)),
            TermValue::Interval(e) => write!(
                f,
                "[{},{}]",
                crate::rational::format(&e.lo),
                crate::rational::format(&e.hi)
            ),
            TermValue::Symbolic { numerator, log2_denominator } => {
                write!(f, "{numerator}/2^{log2_denominator}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    Dyadic,
    DepthDivided,
    AlphaWeighted { alpha: AlphaPattern },
    Explicit,
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Dyadic => "dyadic",
            Generator::DepthDivided => "depth_divided",
            Generator::AlphaWeighted { .. } => "alpha_weighted",
            Generator::Explicit => "explicit",
        }
    }
}

#[derive(Debug, Clone)]
pub struct LengthSequence {
    generator: Generator,
    lengths: Vec<Length>,
    user_certificate: Option<UserCertificate>,
}

impl LengthSequence {
    /// Horizon depth N.
    pub fn depth(&self) -> u64 {
        self.lengths.len() as u64 - 1
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn user_certificate(&self) -> Option<&UserCertificate> {
        self.user_certificate.as_ref()
    }

    pub fn length(&self, d: u64) -> &Length {
        &self.lengths[d as usize]
    }

    pub fn lengths(&self) -> &[Length] {
        &self.lengths
    }

    /// r at depth d, as a length-like value (power of two or exact integer).
    pub fn ratio(&self, d: u64) -> Option<Length> {
        if d >= self.depth() {
            return None;
        }
        Some(self.quotient(d, d + 1))
    }

    /// ℓ_{b}/ℓ_{a} for a ≤ b.
    pub fn quotient(&self, a: u64, b: u64) -> Length {
        let (la, lb) = (self.length(a), self.length(b));
        match (la.exponent(), lb.exponent()) {
            (Some(ea), Some(eb)) => {
                let e = eb - ea;
                match e.to_u64() {
                    Some(small) if small < 1 << 16 => Length::Exact(BigUint::one() << small),
                    _ => Length::Pow2(e),
                }
            }
            _ => {
                let (x, y) = (la.exact().expect("non power of two is exact"), lb.exact().expect("exact"));
                Length::Exact(y / x)
            }
        }
    }

    /// log₂(ℓ_b/ℓ_a)/ℓ_a, the generic series term; b = a+1 gives the (Δ)
    /// term, b = a+2 the (⋆) term, b = m(a) the extracted term.
    pub fn log_ratio_term(&self, a: u64, b: u64) -> TermValue {
        let (la, lb) = (self.length(a), self.length(b));
        if let (Some(ea), Some(eb)) = (la.exponent(), lb.exponent()) {
            let num = eb - &ea;
            return match la {
                Length::Exact(x) => TermValue::Exact(BigRational::new(
                    BigInt::from(num),
                    BigInt::from(x.clone()),
                )),
                Length::Pow2(_) => TermValue::Symbolic { numerator: num, log2_denominator: ea },
            };
        }
        let x = la.exact().expect("non power of two is exact");
        let y = lb.exact().expect("non power of two is exact");
        let denom = BigRational::from_integer(BigInt::from(x.clone()));
        let enc = log2_enclosure(&(y / x), DEFAULT_PRECISION).div(&denom);
        if enc.is_point() {
            TermValue::Exact(enc.lo)
        } else {
            TermValue::Interval(enc)
        }
    }

    /// log₂(r_d)/ℓ_d for d < N.
    pub fn delta_term(&self, d: u64) -> Option<TermValue> {
        (d < self.depth()).then(|| self.log_ratio_term(d, d + 1))
    }

    /// log₂(r_d r_{d+1})/ℓ_d for d < N − 1.
    pub fn star_term(&self, d: u64) -> Option<TermValue> {
        (d + 1 < self.depth()).then(|| self.log_ratio_term(d, d + 2))
    }

    /// Checks ℓ₀ = 1, ℓ_d | ℓ_{d+1} and exponent monotonicity.
    pub fn validate(&self) -> Result<(), SequenceError> {
        if self.lengths.first() != Some(&Length::Exact(BigUint::one())) {
            return Err(SequenceError::InvalidLengths("ℓ at n=0 must be 1".into()));
        }
        for d in 0..self.depth() {
            let (a, b) = (self.length(d), self.length(d + 1));
            let ok = match (a.exponent(), b.exponent()) {
                (Some(ea), Some(eb)) => ea <= eb,
                _ => match (a.exact(), b.exact()) {
                    (Some(x), Some(y)) => !x.is_zero() && (y % x).is_zero(),
                    _ => false,
                },
            };
            if !ok {
                return Err(SequenceError::InvalidLengths(format!(
                    "ℓ at n={} does not divide ℓ at n={}",
                    -(d as i64),
                    -(d as i64) - 1
                )));
            }
        }
        Ok(())
    }

    /// Lengths (ℓ_n)_{n ∈ B} reindexed from depth 0, for an ascending list
    /// of depths.
    pub fn restrict(&self, depths: &[u64]) -> Vec<Length> {
        depths.iter().map(|&d| self.length(d).clone()).collect()
    }
}

fn exponents_to_sequence(
    generator: Generator,
    exponents: Vec<BigUint>,
    budget: &Budget,
) -> LengthSequence {
    let lengths = exponents
        .into_iter()
        .map(|e| Length::pow2(e, budget).expect("exponent checked against budget"))
        .collect();
    LengthSequence { generator, lengths, user_certificate: None }
}

/// ℓ_n = 2^{|n|}.
pub fn generate_dyadic(depth: u64, budget: &Budget) -> Result<LengthSequence, SequenceError> {
    let reachable = if budget.exponent_bits >= 64 { u64::MAX } else { (1u64 << budget.exponent_bits) - 1 };
    if depth > reachable {
        return Err(SequenceError::TruncatedHorizon { requested: depth, reachable });
    }
    let exps = (0..=depth).map(BigUint::from).collect();
    Ok(exponents_to_sequence(Generator::Dyadic, exps, budget))
}

/// 2^e materialised, provided e fits the exponent budget.
fn materialise_pow2(e: &BigUint, budget: &Budget) -> Option<BigUint> {
    let small = e.to_u64()?;
    (small <= budget.exponent_bits).then(|| BigUint::one() << small)
}

/// ℓ₀ = 1, ℓ₋₁ = 2, ℓ_{n−1} = ℓ_n · 2^{⌊ℓ_n/|n|⌋}.
pub fn generate_depth_divided(depth: u64, budget: &Budget) -> Result<LengthSequence, SequenceError> {
    if depth < 1 {
        return Err(SequenceError::BadDepth("depth_divided needs depth ≥ 1".into()));
    }
    let mut exps = vec![BigUint::zero(), BigUint::one()];
    while (exps.len() as u64) <= depth {
        let d = exps.len() as u64 - 1;
        let truncated = SequenceError::TruncatedHorizon { requested: depth, reachable: d };
        let e = &exps[d as usize];
        let len = materialise_pow2(e, budget).ok_or(truncated.clone())?;
        let next = e + len / d;
        if next.bits() > budget.exponent_bits {
            return Err(truncated);
        }
        exps.push(next);
    }
    Ok(exponents_to_sequence(Generator::DepthDivided, exps, budget))
}

/// Seeds 1, 2, 8, 64, 2048, then ℓ_{n−2} = 2^{⌊α̃_{n−1} ℓ_n⌋} for n ≤ −3.
pub fn generate_alpha_weighted(
    alpha: &AlphaPattern,
    depth: u64,
    budget: &Budget,
) -> Result<LengthSequence, SequenceError> {
    if depth < 4 {
        return Err(SequenceError::BadDepth("alpha_weighted needs depth ≥ 4".into()));
    }
    alpha.validate()?;
    let mut exps: Vec<BigUint> = [0u32, 1, 3, 6, 11].into_iter().map(BigUint::from).collect();
    while (exps.len() as u64) <= depth {
        // New depth d+2 from depth d, weight at depth d+1.
        let d = exps.len() as u64 - 2;
        let truncated = SequenceError::TruncatedHorizon { requested: depth, reachable: d + 1 };
        let a = alpha.clamped(d + 1).ok_or_else(|| {
            SequenceError::InvalidAlpha(format!("no α value at n={}", -(d as i64) - 1))
        })?;
        let len = materialise_pow2(&exps[d as usize], budget).ok_or(truncated.clone())?;
        let prod = BigInt::from(len) * a.numer() / a.denom();
        let next = prod.to_biguint().expect("non-negative");
        if next.bits() > budget.exponent_bits {
            return Err(truncated);
        }
        exps.push(next);
    }
    let seq = exponents_to_sequence(Generator::AlphaWeighted { alpha: alpha.clone() }, exps, budget);
    seq.validate()?;
    Ok(seq)
}

/// User-supplied lengths, optionally with a declared term bound that is
/// checked before any verdict relies on it.
pub fn explicit_sequence(
    lengths: Vec<Length>,
    certificate: Option<UserCertificate>,
) -> Result<LengthSequence, SequenceError> {
    if lengths.is_empty() {
        return Err(SequenceError::InvalidLengths("no lengths given".into()));
    }
    let seq = LengthSequence { generator: Generator::Explicit, lengths, user_certificate: certificate };
    seq.validate()?;
    Ok(seq)
}

/// Parses `"123"` or `"2^e"`.
pub fn parse_length(s: &str, budget: &Budget) -> Result<Length, SequenceError> {
    let err = || SequenceError::InvalidLengths(format!("cannot parse length {s:?}"));
    let s = s.trim();
    if let Some(e) = s.strip_prefix("2^") {
        let e: BigUint = e.trim().parse().map_err(|_| err())?;
        return Length::pow2(e, budget).ok_or_else(err);
    }
    let x: BigUint = s.parse().map_err(|_| err())?;
    if x.is_zero() {
        return Err(err());
    }
    Ok(Length::Exact(x))
}

/// Index n = −d of depth d.
pub fn index_of_depth(d: u64) -> i64 {
    -(d as i64)
}

/// Depth d = −n of index n ≤ 0.
pub fn depth_of_index(n: i64) -> u64 {
    n.unsigned_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse;
    use proptest::prelude::*;

    fn exact(seq: &LengthSequence) -> Vec<String> {
        seq.lengths().iter().map(|l| l.to_string()).collect()
    }

    #[test]
    fn dyadic_prefix() {
        let s = generate_dyadic(4, &Budget::default()).unwrap();
        assert_eq!(exact(&s), ["1", "2", "4", "8", "16"]);
        for d in 0..4 {
            assert_eq!(s.ratio(d).unwrap(), Length::Exact(2u32.into()));
        }
    }

    #[test]
    fn depth_divided_prefix_by_direct_recursion() {
        let s = generate_depth_divided(3, &Budget::default()).unwrap();
        // ℓ₋₂ = 2·2^⌊2/1⌋ = 8, ℓ₋₃ = 8·2^⌊8/2⌋ = 128
        assert_eq!(exact(&s), ["1", "2", "8", "128"]);
        let s = generate_depth_divided(5, &Budget::default()).unwrap();
        assert_eq!(s.length(4).to_string(), (BigUint::one() << 49u32).to_string());
        let e5 = BigUint::from(49u32) + (BigUint::one() << 47u32);
        assert_eq!(s.length(5), &Length::Pow2(e5));
        assert!(matches!(
            generate_depth_divided(6, &Budget::default()),
            Err(SequenceError::TruncatedHorizon { requested: 6, reachable: 5 })
        ));
    }

    #[test]
    fn alpha_weighted_seeds_and_constant_alpha() {
        let one = AlphaPattern::constant(BigRational::one());
        let s = generate_alpha_weighted(&one, 8, &Budget::default()).unwrap();
        assert_eq!(exact(&s)[..5], ["1", "2", "8", "64", "2048"]);
        assert_eq!(s.length(5).exponent().unwrap(), BigUint::from(64u32));
        assert_eq!(s.length(6).exponent().unwrap(), BigUint::from(2048u32));
        assert_eq!(s.length(7), &Length::Pow2(BigUint::one() << 64u32));
        assert_eq!(s.length(8), &Length::Pow2(BigUint::one() << 2048u32));
        assert!(matches!(
            generate_alpha_weighted(&one, 9, &Budget::default()),
            Err(SequenceError::TruncatedHorizon { .. })
        ));
    }

    #[test]
    fn alpha_weighted_applies_clamping() {
        let zero = AlphaPattern::constant(BigRational::zero());
        let s = generate_alpha_weighted(&zero, 6, &Budget::default()).unwrap();
        // α̃ at n=−4 is 1/4: ℓ₋₅ = 2^⌊64/4⌋; at n=−5 it is 1/9: ℓ₋₆ = 2^⌊2048/9⌋.
        assert_eq!(s.length(5).exponent().unwrap(), BigUint::from(16u32));
        assert_eq!(s.length(6).exponent().unwrap(), BigUint::from(227u32));
    }

    #[test]
    fn explicit_sequences_are_validated() {
        let b = Budget::default();
        let l = |xs: &[&str]| xs.iter().map(|x| parse_length(x, &b).unwrap()).collect::<Vec<_>>();
        assert!(explicit_sequence(l(&["1", "3", "12"]), None).is_ok());
        assert!(explicit_sequence(l(&["1", "3", "10"]), None).is_err());
        assert!(explicit_sequence(l(&["2", "4"]), None).is_err());
        let s = explicit_sequence(l(&["1", "3", "12"]), None).unwrap();
        match s.delta_term(0).unwrap() {
            TermValue::Interval(e) => assert!(e.lo < e.hi),
            other => panic!("expected interval, got {other:?}"),
        }
        assert_eq!(s.delta_term(1).unwrap(), TermValue::Exact(parse("2/3").unwrap()));
        assert!(s.delta_term(2).is_none());
    }

    #[test]
    fn symbolic_terms_keep_exact_numerators() {
        let s = generate_depth_divided(5, &Budget::default()).unwrap();
        assert_eq!(s.delta_term(4).unwrap(), TermValue::Exact(parse("1/4").unwrap()));
        assert!(s.delta_term(5).is_none());
        let t = generate_alpha_weighted(&AlphaPattern::constant(BigRational::one()), 8, &Budget::default())
            .unwrap();
        assert!(matches!(t.delta_term(7).unwrap(), TermValue::Symbolic { .. }));
    }

    proptest! {
        #[test]
        fn exact_and_symbolic_agree(exact_bits in 1u64..3000, depth in 4u64..8) {
            let alpha = AlphaPattern::constant(parse("1/2").unwrap());
            let wide = generate_alpha_weighted(&alpha, depth, &Budget::default());
            let narrow = generate_alpha_weighted(&alpha, depth, &Budget { exact_bits, exponent_bits: 1 << 16 });
            match (wide, narrow) {
                (Ok(a), Ok(b)) => {
                    for d in 0..=depth {
                        prop_assert_eq!(a.length(d).exponent(), b.length(d).exponent());
                        if let (Some(x), Some(y)) = (a.length(d).exact(), b.length(d).exact()) {
                            prop_assert_eq!(x, y);
                        }
                    }
                    prop_assert!(b.validate().is_ok());
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "budgets disagree on reachability"),
            }
        }

        #[test]
        fn divisibility_holds_for_generated_sequences(depth in 1u64..6) {
            let b = Budget::default();
            prop_assert!(generate_depth_divided(depth, &b).unwrap().validate().is_ok());
            prop_assert!(generate_dyadic(depth * 7, &b).unwrap().validate().is_ok());
        }
    }
}
