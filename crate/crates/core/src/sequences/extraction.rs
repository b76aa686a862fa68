use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use super::verdict::{sum_terms, SeriesKind, SeriesVerdict, Truth};
use super::{index_of_depth, AlphaPattern, Generator, Length, LengthSequence, SequenceError};

/// Ultimately periodic set of depths: `head` below `tail_start`, then every
/// depth d ≥ tail_start with d mod period ∈ residues.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionSet {
    #[serde(default)]
    pub head: BTreeSet<u64>,
    #[serde(default)]
    pub tail_start: u64,
    pub period: u64,
    pub residues: BTreeSet<u64>,
}

impl ExtractionSet {
    pub fn new(
        head: BTreeSet<u64>,
        tail_start: u64,
        period: u64,
        residues: BTreeSet<u64>,
    ) -> Result<ExtractionSet, SequenceError> {
        let set = ExtractionSet { head, tail_start, period, residues };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<(), SequenceError> {
        if self.period == 0 || self.residues.is_empty() {
            return Err(SequenceError::InvalidExtraction(
                "the tail pattern is empty, so the set is finite".into(),
            ));
        }
        if self.residues.iter().any(|&r| r >= self.period) {
            return Err(SequenceError::InvalidExtraction("residue not below the period".into()));
        }
        if self.head.iter().any(|&d| d >= self.tail_start) {
            return Err(SequenceError::InvalidExtraction("head element inside the tail".into()));
        }
        Ok(())
    }

    /// Every n ≤ 0.
    pub fn all() -> ExtractionSet {
        ExtractionSet::residue_class(1, 0)
    }

    /// Even n.
    pub fn evens() -> ExtractionSet {
        ExtractionSet::residue_class(2, 0)
    }

    /// Odd n.
    pub fn odds() -> ExtractionSet {
        ExtractionSet::residue_class(2, 1)
    }

    /// Depths ≡ residue (mod period).
    pub fn residue_class(period: u64, residue: u64) -> ExtractionSet {
        ExtractionSet {
            head: BTreeSet::new(),
            tail_start: 0,
            period,
            residues: BTreeSet::from([residue % period]),
        }
    }

    /// Depths d ≥ start only.
    pub fn from_depth(start: u64) -> ExtractionSet {
        ExtractionSet { head: BTreeSet::new(), tail_start: start, period: 1, residues: BTreeSet::from([0]) }
    }

    pub fn contains(&self, d: u64) -> bool {
        if d < self.tail_start {
            self.head.contains(&d)
        } else {
            self.residues.contains(&(d % self.period))
        }
    }

    pub fn members_within(&self, horizon: u64) -> Vec<u64> {
        (0..=horizon).filter(|&d| self.contains(d)).collect()
    }

    /// m(d): the next deeper member, i.e. sup{k < n : k ∈ B}.
    pub fn next_member(&self, d: u64) -> u64 {
        (d + 1..).find(|&k| self.contains(k)).expect("tail is non-empty")
    }

    fn residue_member(&self, c: u64) -> bool {
        self.residues.contains(&(c % self.period))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtractionClass {
    /// n − 1 ∈ B within the horizon.
    B1,
    /// n − 1 ∉ B, or n is the deepest horizon index.
    B2,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtractedLevel {
    pub n: i64,
    /// m(n), the next member below n.
    pub m: i64,
    /// R_n = ℓ_{m(n)}/ℓ_n; absent when m(n) is beyond the horizon.
    pub ratio: Option<String>,
    pub class: ExtractionClass,
    pub in_b3: bool,
    /// R_n equals the product of r_k over m(n) < k ≤ n.
    pub ratio_is_gap_product: Option<bool>,
    /// On B₁: R_n = r_n. On B₂ with m(n) = n − 2: R_n = r_n r_{n−1}.
    pub ratio_identity: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtractionAnalysis {
    pub members: Vec<ExtractedLevel>,
    pub b1: Vec<i64>,
    pub b2: Vec<i64>,
    pub b3: Vec<i64>,
    /// Deepest horizon member whose m(n) lies outside the horizon.
    pub undefined_ratio_at: Vec<i64>,
    /// Whether B^c contains infinitely many pairs of consecutive integers.
    pub complement_has_consecutive_pairs: bool,
    pub checks_pass: bool,
    pub extracted_delta: SeriesVerdict,
    pub standard: Truth,
    pub at_threshold: Truth,
    pub reason: Option<String>,
}

fn product_of_ratios(seq: &LengthSequence, from: u64, to: u64) -> Length {
    // Π r_k over depths from..to, assembled independently of quotient().
    let mut exp_sum = Some(num_bigint::BigUint::from(0u32));
    let mut prod = Some(num_bigint::BigUint::one());
    for k in from..to {
        let r = seq.ratio(k).expect("inside horizon");
        match (&mut exp_sum, r.exponent()) {
            (Some(acc), Some(e)) => *acc += e,
            _ => exp_sum = None,
        }
        match (&mut prod, r.exact()) {
            (Some(acc), Some(x)) => *acc *= x,
            _ => prod = None,
        }
    }
    match (exp_sum, prod) {
        (_, Some(p)) => Length::Exact(p),
        (Some(e), None) => Length::Pow2(e),
        _ => unreachable!("ratios are exact or powers of two"),
    }
}

fn same_length(a: &Length, b: &Length) -> bool {
    match (a.exponent(), b.exponent()) {
        (Some(x), Some(y)) => x == y,
        _ => a.exact() == b.exact() && a.exact().is_some(),
    }
}

/// Closed form for alpha_weighted sequences: (F_n)_{n∈B} is standard iff
/// Σ_{B^c} α̃ = ∞ or B^c has infinitely many consecutive pairs; a
/// non-standard extraction is at the threshold iff α̃ has positive liminf on
/// every infinite residue class of {n ∈ B : n ± 1 ∈ B}.
pub(crate) fn alpha_weighted_extraction(alpha: &AlphaPattern, b: &ExtractionSet) -> Option<(bool, bool, String)> {
    let m = b.period.lcm(&alpha.period());
    let member = |c: u64| b.residue_member(c % m);
    if (0..m).any(|c| !member(c) && !member((c + 1) % m)) {
        return Some((true, false, "B^c contains infinitely many pairs of consecutive integers (B₃ infinite)".into()));
    }
    let mut diverges = false;
    for c in (0..m).filter(|&c| !member(c)) {
        diverges |= alpha.class_sum_diverges(c, m)?;
    }
    if diverges {
        return Some((true, false, "Σ_{n∉B} α̃_n = +∞".into()));
    }
    let mut thin_class = false;
    for c in (0..m).filter(|&c| member(c) && member((c + 1) % m) && member((c + m - 1) % m)) {
        thin_class |= !alpha.class_liminf_positive(c, m)?;
    }
    let reason = if thin_class {
        "non-standard; a sparse subset of {n ∈ B : n±1 ∈ B} with Σ α̃ < ∞ can be removed keeping non-standardness"
    } else {
        "non-standard; every further infinite removal creates consecutive gaps or an infinite α̃-sum"
    };
    Some((false, !thin_class, reason.into()))
}

pub fn analyze_extraction(
    seq: &LengthSequence,
    b: &ExtractionSet,
) -> Result<ExtractionAnalysis, SequenceError> {
    b.validate()?;
    let horizon = seq.depth();
    if b.head.iter().any(|&d| d > horizon) {
        return Err(SequenceError::OutsideHorizon(format!(
            "head element beyond depth {horizon}"
        )));
    }
    let depths = b.members_within(horizon);
    let mut members = Vec::new();
    let (mut b1, mut b2, mut b3, mut undefined) = (vec![], vec![], vec![], vec![]);
    let mut checks_pass = true;
    let mut terms = Vec::new();
    for &d in &depths {
        let m = b.next_member(d);
        let class = if d < horizon && b.contains(d + 1) { ExtractionClass::B1 } else { ExtractionClass::B2 };
        let in_b3 = m >= d + 3;
        match class {
            ExtractionClass::B1 => b1.push(index_of_depth(d)),
            ExtractionClass::B2 => b2.push(index_of_depth(d)),
        }
        if in_b3 {
            b3.push(index_of_depth(d));
        }
        let (ratio, gap_ok, identity_ok) = if m <= horizon {
            let r = seq.quotient(d, m);
            let gap_ok = same_length(&r, &product_of_ratios(seq, d, m));
            let identity_ok = match (class, m - d) {
                (ExtractionClass::B1, _) => Some(same_length(&r, &seq.ratio(d).unwrap())),
                (ExtractionClass::B2, 2) => Some(same_length(&r, &product_of_ratios(seq, d, d + 2))),
                _ => None,
            };
            terms.push((d, seq.log_ratio_term(d, m)));
            (Some(r.to_string()), Some(gap_ok), identity_ok)
        } else {
            undefined.push(index_of_depth(d));
            (None, None, None)
        };
        checks_pass &= gap_ok.unwrap_or(true) && identity_ok.unwrap_or(true);
        members.push(ExtractedLevel {
            n: index_of_depth(d),
            m: index_of_depth(m),
            ratio,
            class,
            in_b3,
            ratio_is_gap_product: gap_ok,
            ratio_identity: identity_ok,
        });
    }
    let (partial_sum, terms_summed, excluded_symbolic) = sum_terms(terms.into_iter());
    let complement_has_consecutive_pairs =
        (0..b.period).any(|c| !b.residue_member(c) && !b.residue_member(c + 1));

    let max_gap = (0..b.period).filter(|&c| b.residue_member(c)).map(|c| {
        (c + 1..).find(|&k| b.residue_member(k)).unwrap() - c
    }).max().unwrap_or(1);

    let (verdict, certificate, standard, at_threshold, reason): (SeriesKind, Option<String>, Truth, Truth, Option<String>) =
        match seq.generator() {
            Generator::Dyadic => (
                SeriesKind::ConvergesByCertificate,
                Some(format!(
                    "log₂R_n/ℓ_n = (n - m(n))/2^|n| ≤ {max_gap}/2^|n| on the tail; geometric majorant"
                )),
                Truth::Fails,
                Truth::Fails,
                Some("every extraction of the dyadic sequence is non-standard, so no strict extraction becomes standard".into()),
            ),
            Generator::DepthDivided => (
                SeriesKind::DivergesByCertificate,
                Some("log₂R_n/ℓ_n ≥ log₂r_n/ℓ_n ≥ 1/(2|n|) on an infinite periodic set; harmonic minorant diverges".into()),
                Truth::Holds,
                Truth::Fails,
                Some("the extraction is standard".into()),
            ),
            Generator::AlphaWeighted { alpha } => match alpha_weighted_extraction(alpha, b) {
                Some((std, thr, why)) => (
                    if std { SeriesKind::DivergesByCertificate } else { SeriesKind::ConvergesByCertificate },
                    Some(format!("closed form for α = {}: {why}", alpha.describe())),
                    Truth::from_bool(std),
                    Truth::from_bool(thr),
                    Some(why),
                ),
                None => (SeriesKind::Undetermined, None, Truth::Undetermined, Truth::Undetermined, Some("explicit α: no tail information".into())),
            },
            Generator::Explicit => match seq.user_certificate() {
                Some(c) if c.lower_diverges() => (
                    SeriesKind::DivergesByCertificate,
                    Some("log₂R_n/ℓ_n ≥ log₂r_n/ℓ_n ≥ declared lower bound, not summable on a periodic set".into()),
                    Truth::Holds,
                    Truth::Fails,
                    Some("the extraction is standard".into()),
                ),
                _ => (SeriesKind::Undetermined, None, Truth::Undetermined, Truth::Undetermined, None),
            },
        };
    let mut flags = Vec::new();
    if !undefined.is_empty() {
        flags.push(format!("R_n undefined at n={:?}: m(n) beyond the horizon", undefined));
    }
    if !excluded_symbolic.is_empty() {
        flags.push("terms with symbolic denominators excluded from the partial sum".into());
    }
    let (verdict, standard, at_threshold, certificate) = if checks_pass {
        (verdict, standard, at_threshold, certificate)
    } else {
        flags.push("ratio bookkeeping check failed".into());
        (SeriesKind::Undetermined, Truth::Undetermined, Truth::Undetermined, None)
    };
    Ok(ExtractionAnalysis {
        members,
        b1,
        b2,
        b3,
        undefined_ratio_at: undefined,
        complement_has_consecutive_pairs,
        checks_pass,
        extracted_delta: SeriesVerdict {
            predicate: "delta_extracted",
            verdict,
            partial_sum,
            terms_summed,
            excluded_symbolic,
            certificate,
            boundary_flags: flags,
        },
        standard,
        at_threshold,
        reason,
    })
}
