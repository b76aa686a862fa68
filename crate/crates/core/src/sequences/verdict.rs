//! The (Δ), (⋆) and (□) predicates. Finite partial sums are reported but a
//! definite verdict is only ever produced from a closed-form term bound
//! that has first been checked against every exactly computed term.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::log2::Enclosure;
use super::{index_of_depth, Generator, Length, LengthSequence, TermValue};
use crate::rational::{format, serde_str};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    ConvergesByCertificate,
    DivergesByCertificate,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    Holds,
    Fails,
    Undetermined,
}

impl Truth {
    pub fn from_bool(b: bool) -> Truth {
        if b {
            Truth::Holds
        } else {
            Truth::Fails
        }
    }
}

/// c·ratio^|n| or c/|n|^s.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TermBound {
    Geometric {
        #[serde(with = "serde_str")]
        c: BigRational,
        #[serde(with = "serde_str")]
        ratio: BigRational,
    },
    Power {
        #[serde(with = "serde_str")]
        c: BigRational,
        s: u32,
    },
}

impl TermBound {
    pub fn value(&self, d: u64) -> BigRational {
        match self {
            TermBound::Geometric { c, ratio } => c * num_traits::pow(ratio.clone(), d as usize),
            TermBound::Power { c, s } => {
                c / BigRational::from_integer(num_traits::pow(BigInt::from(d.max(1)), *s as usize))
            }
        }
    }

    fn summable(&self) -> bool {
        match self {
            TermBound::Geometric { ratio, .. } => ratio < &BigRational::one(),
            TermBound::Power { c, s } => *s >= 2 || c.is_zero(),
        }
    }

    fn vanishing(&self) -> bool {
        match self {
            TermBound::Geometric { ratio, c } => ratio < &BigRational::one() || c.is_zero(),
            TermBound::Power { c, s } => *s >= 1 || c.is_zero(),
        }
    }

    fn describe(&self) -> String {
        match self {
            TermBound::Geometric { c, ratio } => format!("{}·({})^|n|", format(c), format(ratio)),
            TermBound::Power { c, s } => format!("{}/|n|^{s}", format(c)),
        }
    }
}

/// Declared bounds lower(|n|) ≤ log₂(r_n)/ℓ_n ≤ upper(|n|) for |n| ≥ from_depth.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UserCertificate {
    #[serde(default)]
    pub from_depth: u64,
    #[serde(default)]
    pub lower: Option<TermBound>,
    #[serde(default)]
    pub upper: Option<TermBound>,
}

impl UserCertificate {
    /// First depth at which a declared bound fails, if any.
    fn violation(&self, seq: &LengthSequence) -> Option<u64> {
        (self.from_depth.max(1)..seq.depth()).find(|&d| {
            let Some(enc) = seq.delta_term(d).and_then(|t| t.enclosure()) else {
                return false;
            };
            let low_bad = self.lower.as_ref().is_some_and(|b| b.value(d) > enc.lo);
            let high_bad = self.upper.as_ref().is_some_and(|b| enc.hi > b.value(d));
            low_bad || high_bad
        })
    }

    /// Whether Σ lower over a set of depths with positive density diverges.
    pub fn lower_diverges(&self) -> bool {
        match &self.lower {
            Some(TermBound::Power { c, s }) => c.is_positive() && *s <= 1,
            Some(TermBound::Geometric { c, ratio }) => c.is_positive() && ratio >= &BigRational::one(),
            None => false,
        }
    }

    fn lower_non_vanishing(&self) -> bool {
        match &self.lower {
            Some(TermBound::Power { c, s }) => c.is_positive() && *s == 0,
            Some(TermBound::Geometric { c, ratio }) => c.is_positive() && ratio >= &BigRational::one(),
            None => false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesVerdict {
    pub predicate: &'static str,
    pub verdict: SeriesKind,
    /// Sum of the exactly known terms (a point when every ratio is a power
    /// of two).
    pub partial_sum: Enclosure,
    pub terms_summed: u64,
    /// Indices whose term has an unmaterialised denominator.
    pub excluded_symbolic: Vec<i64>,
    pub certificate: Option<String>,
    pub boundary_flags: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StarReport {
    pub predicate: &'static str,
    pub verdict: Truth,
    /// Minimum of log₂(r_n r_{n−1})/ℓ_n over computed indices.
    pub computed_min: Option<Enclosure>,
    pub argmin: Option<i64>,
    pub excluded_symbolic: Vec<i64>,
    /// Deepest index, where r_{n−1} lies outside the horizon.
    pub boundary_excluded: Option<i64>,
    #[serde(serialize_with = "opt_rational")]
    pub tail_lower_bound: Option<BigRational>,
    pub tail_from: Option<i64>,
    /// Lower bound of the full infimum when every pre-tail term is known.
    #[serde(serialize_with = "opt_rational")]
    pub infimum_lower_bound: Option<BigRational>,
    pub certificate: Option<String>,
    pub boundary_flags: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoxReport {
    pub predicate: &'static str,
    pub verdict: Truth,
    pub last_term: Option<String>,
    pub certificate: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub predicate: &'static str,
    pub verdict: Truth,
    pub delta: SeriesKind,
    pub star: Truth,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub generator: String,
    pub depth: u64,
    pub delta: SeriesVerdict,
    pub star: StarReport,
    #[serde(rename = "box")]
    pub box_: BoxReport,
    pub threshold: ThresholdReport,
    /// Standard iff (Δ) fails.
    pub standard: Truth,
    /// (¬Δ) together with (□): standard and not extractable from any
    /// split-words filtration at the threshold.
    pub not_extractable_from_threshold: Truth,
}

use crate::rational::serialize_opt as opt_rational;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn exact_term(t: &TermValue) -> Option<&BigRational> {
    match t {
        TermValue::Exact(x) => Some(x),
        _ => None,
    }
}

/// log₂ℓ_b / ℓ_a as an exact rational when ℓ_a is materialised.
fn log_len_over_len(seq: &LengthSequence, a: u64, b: u64) -> Option<BigRational> {
    let la = seq.length(a).exact()?;
    let eb = seq.length(b).exponent()?;
    Some(BigRational::new(BigInt::from(eb), BigInt::from(la.clone())))
}

pub(crate) fn sum_terms(
    terms: impl Iterator<Item = (u64, TermValue)>,
) -> (Enclosure, u64, Vec<i64>) {
    let mut sum = Enclosure::point(BigRational::zero());
    let mut count = 0;
    let mut symbolic = Vec::new();
    for (d, t) in terms {
        match t.enclosure() {
            Some(e) => {
                sum = sum.add(&e);
                count += 1;
            }
            None => symbolic.push(index_of_depth(d)),
        }
    }
    (sum, count, symbolic)
}

/// Generator-specific check of the (Δ) term bound on every exact term.
/// Returns the first offending depth.
fn delta_certificate_violation(seq: &LengthSequence) -> Option<u64> {
    let n = seq.depth();
    match seq.generator() {
        Generator::Dyadic => (0..n).find(|&d| {
            seq.delta_term(d).as_ref().and_then(exact_term).is_some_and(|t| *t != crate::rational::inv_pow2(d))
        }),
        Generator::DepthDivided => (1..n).find(|&d| {
            seq.delta_term(d).as_ref().and_then(exact_term).is_some_and(|t| {
                *t < ratio(1, 2 * d as i64) || *t > ratio(1, d as i64)
            })
        }),
        Generator::AlphaWeighted { .. } => (4..n).find(|&d| {
            seq.delta_term(d).as_ref().and_then(exact_term).is_some_and(|t| {
                let dd = d as i64 - 1;
                *t > ratio(1, 2 * dd * dd)
            })
        }),
        Generator::Explicit => seq.user_certificate().and_then(|c| c.violation(seq)),
    }
}

pub fn delta_verdict(seq: &LengthSequence) -> SeriesVerdict {
    let n = seq.depth();
    let (partial_sum, terms_summed, excluded_symbolic) =
        sum_terms((0..n).map(|d| (d, seq.delta_term(d).expect("d < N"))));
    let mut flags = Vec::new();
    if n == 0 {
        flags.push("horizon has a single level: no ratio defined".to_string());
    }
    let (mut verdict, mut certificate) = match seq.generator() {
        Generator::Dyadic => (
            SeriesKind::ConvergesByCertificate,
            Some(format!(
                "log₂(r_n)/ℓ_n = 2^-|n| for every n; tail Σ_{{|n|≥{n}}} 2^-|n| = 2^{}",
                1 - n as i64
            )),
        ),
        Generator::DepthDivided => (
            SeriesKind::DivergesByCertificate,
            Some("log₂(r_n)/ℓ_n = ⌊ℓ_n/|n|⌋/ℓ_n ≥ 1/(2|n|) for n ≤ -1 (ℓ_n ≥ 2^|n| ≥ |n|); harmonic minorant diverges".into()),
        ),
        Generator::AlphaWeighted { .. } => (
            SeriesKind::ConvergesByCertificate,
            Some("log₂(r_n)/ℓ_n ≤ log₂ℓ_{n-1}/ℓ_n ≤ 1/(2|n+1|²) for n ≤ -4; inverse-square majorant converges".into()),
        ),
        Generator::Explicit => match seq.user_certificate() {
            Some(c) if c.upper.as_ref().is_some_and(TermBound::summable) => (
                SeriesKind::ConvergesByCertificate,
                Some(format!(
                    "declared upper bound {} from |n| = {}, summable",
                    c.upper.as_ref().unwrap().describe(),
                    c.from_depth
                )),
            ),
            Some(c) if c.lower_diverges() => (
                SeriesKind::DivergesByCertificate,
                Some(format!(
                    "declared lower bound {} from |n| = {}, not summable",
                    c.lower.as_ref().unwrap().describe(),
                    c.from_depth
                )),
            ),
            _ => (SeriesKind::Undetermined, None),
        },
    };
    if n == 0 && matches!(seq.generator(), Generator::Explicit) {
        verdict = SeriesKind::Undetermined;
    }
    if let Some(d) = delta_certificate_violation(seq) {
        flags.push(format!("certificate violated at n={}", index_of_depth(d)));
        verdict = SeriesKind::Undetermined;
        certificate = None;
    }
    if !excluded_symbolic.is_empty() {
        flags.push("terms with symbolic denominators excluded from the partial sum".into());
    }
    SeriesVerdict {
        predicate: "delta",
        verdict,
        partial_sum,
        terms_summed,
        excluded_symbolic,
        certificate,
        boundary_flags: flags,
    }
}

pub fn star_verdict(seq: &LengthSequence) -> StarReport {
    let n = seq.depth();
    let mut flags = Vec::new();
    let boundary_excluded = (n >= 1).then(|| index_of_depth(n - 1));
    if n <= 1 {
        flags.push("horizon too short: no index has both r_n and r_{n-1}".into());
    } else {
        flags.push(format!("n={} excluded: r_{{n-1}} outside the horizon", index_of_depth(n - 1)));
    }
    let mut computed_min: Option<Enclosure> = None;
    let mut argmin = None;
    let mut excluded_symbolic = Vec::new();
    let mut min_by_depth: Vec<Option<BigRational>> = Vec::new();
    for d in 0..n.saturating_sub(1) {
        let t = seq.star_term(d).expect("d < N-1");
        match t.enclosure() {
            Some(e) => {
                min_by_depth.push(Some(e.lo.clone()));
                let better = computed_min.as_ref().is_none_or(|m| e.lo < m.lo);
                computed_min = Some(match computed_min {
                    None => e.clone(),
                    Some(m) => Enclosure { lo: m.lo.clone().min(e.lo.clone()), hi: m.hi.min(e.hi.clone()) },
                });
                if better {
                    argmin = Some(index_of_depth(d));
                }
            }
            None => {
                min_by_depth.push(None);
                excluded_symbolic.push(index_of_depth(d));
            }
        }
    }
    // Minimum of the computed lower endpoints over depths < tail_from, if
    // all of them are computed.
    let pre_tail_min = |from: u64| -> Option<BigRational> {
        if from > n.saturating_sub(1) {
            return None;
        }
        min_by_depth[..from as usize].iter().try_fold(None::<BigRational>, |acc, v| {
            let v = v.clone()?;
            Some(Some(match acc {
                None => v,
                Some(a) => a.min(v),
            }))
        })?
    };
    let all_positive = min_by_depth.iter().flatten().all(|x| x.is_positive());

    let mut report = StarReport {
        predicate: "star",
        verdict: Truth::Undetermined,
        computed_min,
        argmin,
        excluded_symbolic,
        boundary_excluded,
        tail_lower_bound: None,
        tail_from: None,
        infimum_lower_bound: None,
        certificate: None,
        boundary_flags: flags,
    };
    match seq.generator() {
        Generator::Dyadic => {
            let bad = (0..n.saturating_sub(1)).find(|&d| {
                seq.star_term(d).as_ref().and_then(exact_term).is_some_and(|t| *t != crate::rational::inv_pow2(d) * ratio(2, 1))
            });
            if let Some(d) = bad {
                report.boundary_flags.push(format!("certificate violated at n={}", index_of_depth(d)));
            } else {
                report.verdict = Truth::Fails;
                report.certificate = Some("log₂(r_n r_{n-1})/ℓ_n = 2^(1-|n|) → 0".into());
            }
        }
        Generator::DepthDivided => {
            let tail = 4u64;
            let bad = (tail..n.saturating_sub(1)).find(|&d| {
                seq.star_term(d).and_then(|t| t.enclosure()).is_some_and(|e| e.lo < BigRational::one())
            });
            if let Some(d) = bad {
                report.boundary_flags.push(format!("certificate violated at n={}", index_of_depth(d)));
            } else if all_positive {
                report.verdict = Truth::Holds;
                report.tail_lower_bound = Some(BigRational::one());
                report.tail_from = Some(index_of_depth(tail));
                report.infimum_lower_bound = pre_tail_min(tail).map(|m| m.min(BigRational::one()));
                report.certificate = Some(
                    "for n ≤ -4: log₂(r_n r_{n-1})/ℓ_n ≥ r_n·log₂(r_{n-1})/ℓ_{n-1} ≥ r_n/(2|n-1|) ≥ 1, since r_n ≥ 2^⌊2^|n|/|n|⌋ ≥ 2|n-1|; every term is positive (r_n ≥ 2)".into(),
                );
            }
        }
        Generator::AlphaWeighted { alpha } => match alpha.tail_infimum() {
            None => report.boundary_flags.push("explicit α: no tail information".into()),
            Some(a) if a.is_zero() => {
                report.verdict = Truth::Fails;
                report.certificate = Some(
                    "log₂(r_n r_{n-1})/ℓ_n ≤ log₂ℓ_{n-2}/ℓ_n ≤ α̃_{n-1} and liminf α̃ = 0".into(),
                );
            }
            Some(a) => {
                let half = &a / BigRational::from_integer(2.into());
                let bad = (4..n.saturating_sub(1)).find(|&d| {
                    let (Some(t), Some(cur), Some(w)) = (
                        seq.star_term(d).and_then(|t| t.enclosure()),
                        log_len_over_len(seq, d, d),
                        alpha.clamped(d + 1),
                    ) else {
                        return false;
                    };
                    t.lo < w / BigRational::from_integer(2.into()) - cur
                });
                if let Some(d) = bad {
                    report.boundary_flags.push(format!("certificate violated at n={}", index_of_depth(d)));
                } else if all_positive {
                    report.verdict = Truth::Holds;
                    report.certificate = Some(format!(
                        "for n ≤ -4: log₂(r_n r_{{n-1}})/ℓ_n = log₂ℓ_{{n-2}}/ℓ_n - log₂ℓ_n/ℓ_n ≥ α̃_{{n-1}}/2 - log₂ℓ_n/ℓ_n, with inf α̃ ≥ {} and log₂ℓ_n/ℓ_n decreasing to 0; every term is positive",
                        format(&a)
                    ));
                    // First materialised depth from which the bound is positive.
                    let start = (4..=n).find(|&d| {
                        log_len_over_len(seq, d, d).is_some_and(|c| half > c)
                    });
                    if let Some(d0) = start {
                        let bound = &half - log_len_over_len(seq, d0, d0).unwrap();
                        report.infimum_lower_bound = pre_tail_min(d0).map(|m| m.min(bound.clone()));
                        report.tail_lower_bound = Some(bound);
                        report.tail_from = Some(index_of_depth(d0));
                    }
                }
            }
        },
        Generator::Explicit => {
            report.boundary_flags.push("no closed-form bound for (⋆) on explicit sequences".into());
        }
    }
    report
}

pub fn box_verdict(seq: &LengthSequence) -> BoxReport {
    let n = seq.depth();
    let last_term = (0..n).rev().find_map(|d| seq.delta_term(d).map(|t| t.to_string()));
    let (verdict, certificate) = match seq.generator() {
        Generator::Dyadic => (Truth::Holds, Some("log₂(r_n)/ℓ_n = 2^-|n| → 0".to_string())),
        Generator::DepthDivided => (Truth::Holds, Some("log₂(r_n)/ℓ_n ≤ 1/|n| → 0".to_string())),
        Generator::AlphaWeighted { .. } => (Truth::Holds, Some("log₂(r_n)/ℓ_n ≤ 1/(2|n+1|²) → 0".to_string())),
        Generator::Explicit => match seq.user_certificate() {
            Some(c) if c.upper.as_ref().is_some_and(TermBound::vanishing) => (
                Truth::Holds,
                Some(format!("declared upper bound {} → 0", c.upper.as_ref().unwrap().describe())),
            ),
            Some(c) if c.lower_non_vanishing() => (
                Truth::Fails,
                Some(format!("declared lower bound {} does not vanish", c.lower.as_ref().unwrap().describe())),
            ),
            _ => (Truth::Undetermined, None),
        },
    };
    if delta_certificate_violation(seq).is_some() {
        return BoxReport { predicate: "box", verdict: Truth::Undetermined, last_term, certificate: None };
    }
    BoxReport { predicate: "box", verdict, last_term, certificate }
}

pub(crate) fn combine_threshold(delta: SeriesKind, star: Truth) -> ThresholdReport {
    let (verdict, reason) = match (delta, star) {
        (SeriesKind::DivergesByCertificate, _) => (Truth::Fails, "(Δ) fails: the filtration is standard"),
        (_, Truth::Fails) => (Truth::Fails, "(⋆) fails"),
        (SeriesKind::ConvergesByCertificate, Truth::Holds) => (Truth::Holds, "(Δ) and (⋆) hold"),
        _ => (Truth::Undetermined, "a predicate is undetermined"),
    };
    ThresholdReport { predicate: "threshold", verdict, delta, star, reason: reason.into() }
}

pub fn threshold_verdict(seq: &LengthSequence) -> ThresholdReport {
    combine_threshold(delta_verdict(seq).verdict, star_verdict(seq).verdict)
}

pub fn classify(seq: &LengthSequence) -> Classification {
    let delta = delta_verdict(seq);
    let star = star_verdict(seq);
    let box_ = box_verdict(seq);
    let threshold = combine_threshold(delta.verdict, star.verdict);
    let standard = match delta.verdict {
        SeriesKind::DivergesByCertificate => Truth::Holds,
        SeriesKind::ConvergesByCertificate => Truth::Fails,
        SeriesKind::Undetermined => Truth::Undetermined,
    };
    let not_extractable_from_threshold = match (delta.verdict, box_.verdict) {
        (SeriesKind::DivergesByCertificate, Truth::Holds) => Truth::Holds,
        (SeriesKind::ConvergesByCertificate, _) => Truth::Fails,
        _ => Truth::Undetermined,
    };
    Classification {
        generator: seq.generator().name().to_string(),
        depth: seq.depth(),
        delta,
        star,
        box_,
        threshold,
        standard,
        not_extractable_from_threshold,
    }
}

/// One checked inequality at index n.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub n: i64,
    pub name: &'static str,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

fn check(n: i64, name: &'static str, lhs: &BigRational, rhs: &BigRational, le: bool) -> InequalityCheck {
    InequalityCheck {
        n,
        name,
        lhs: format(lhs),
        rhs: format(rhs),
        holds: if le { lhs <= rhs } else { lhs >= rhs },
    }
}

fn exact_int(l: &Length) -> Option<BigRational> {
    l.exact().map(|x| BigRational::from_integer(BigInt::from(x.clone())))
}

/// 1/(2|n|) ≤ log₂(r_n)/ℓ_n ≤ 1/|n| and ℓ_n ≥ 2^|n| at every level n ≤ −1
/// whose length is materialised.
pub fn depth_divided_checks(seq: &LengthSequence) -> Vec<InequalityCheck> {
    let mut out = Vec::new();
    for d in 1..seq.depth() {
        let Some(TermValue::Exact(t)) = seq.delta_term(d) else { continue };
        let n = index_of_depth(d);
        out.push(check(n, "term >= 1/(2|n|)", &t, &ratio(1, 2 * d as i64), false));
        out.push(check(n, "term <= 1/|n|", &t, &ratio(1, d as i64), true));
    }
    for d in 1..=seq.depth() {
        if let Some(l) = exact_int(seq.length(d)) {
            out.push(check(index_of_depth(d), "l_n >= 2^|n|", &l, &crate::rational::pow2(d), false));
        }
    }
    out
}

/// Inequalities for the alpha_weighted recursion at materialised levels:
/// ℓ_n ≥ |n|³ and ℓ_n ≥ 2|n+1|²ℓ_{n+1} for n ≤ −1; for n ≤ −4
/// log₂ℓ_{n−1}/ℓ_n ≤ 1/(2|n+1|²), α̃_{n−1}/2 ≤ log₂ℓ_{n−2}/ℓ_n ≤ α̃_{n−1}
/// and log₂ℓ_{n−3}/ℓ_n ≥ 1 (where ℓ_{n−k} is inside the horizon).
pub fn alpha_weighted_checks(seq: &LengthSequence) -> Vec<InequalityCheck> {
    let Generator::AlphaWeighted { alpha } = seq.generator() else {
        return Vec::new();
    };
    let n_max = seq.depth();
    let mut out = Vec::new();
    for d in 1..=n_max {
        let Some(l) = exact_int(seq.length(d)) else { continue };
        let n = index_of_depth(d);
        let cube = BigRational::from_integer(BigInt::from(d).pow(3));
        out.push(check(n, "l_n >= |n|^3", &l, &cube, false));
        if let Some(prev) = exact_int(seq.length(d - 1)) {
            let k = BigRational::from_integer(BigInt::from(2 * (d - 1) * (d - 1)));
            out.push(check(n, "l_n >= 2|n+1|^2 l_{n+1}", &l, &(k * prev), false));
        }
    }
    for d in 4..=n_max {
        if !seq.length(d).is_exact() {
            continue;
        }
        let n = index_of_depth(d);
        if d + 1 <= n_max {
            let v = log_len_over_len(seq, d, d + 1).expect("powers of two");
            let dd = d as i64 - 1;
            out.push(check(n, "log2 l_{n-1}/l_n <= 1/(2|n+1|^2)", &v, &ratio(1, 2 * dd * dd), true));
        }
        if d + 2 <= n_max {
            let v = log_len_over_len(seq, d, d + 2).expect("powers of two");
            let a = alpha.clamped(d + 1).expect("generated from alpha");
            let half = &a / BigRational::from_integer(2.into());
            out.push(check(n, "alpha_{n-1}/2 <= log2 l_{n-2}/l_n", &v, &half, false));
            out.push(check(n, "log2 l_{n-2}/l_n <= alpha_{n-1}", &v, &a, true));
        }
        if d + 3 <= n_max {
            let v = log_len_over_len(seq, d, d + 3).expect("powers of two");
            out.push(check(n, "log2 l_{n-3}/l_n >= 1", &v, &BigRational::one(), false));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{
        explicit_sequence, generate_dyadic, generate_depth_divided, generate_alpha_weighted, parse_length,
        AlphaPattern, Budget,
    };

    fn b() -> Budget {
        Budget::default()
    }

    #[test]
    fn dyadic_is_non_standard_and_not_at_threshold() {
        let s = generate_dyadic(12, &b()).unwrap();
        let c = classify(&s);
        assert_eq!(c.delta.verdict, SeriesKind::ConvergesByCertificate);
        // Σ_{d<12} 2^-d = 2 - 2^-11, independent geometric-sum oracle.
        assert_eq!(c.delta.partial_sum.lo, ratio(2, 1) - crate::rational::inv_pow2(11));
        assert_eq!(c.star.verdict, Truth::Fails);
        assert_eq!(c.threshold.verdict, Truth::Fails);
        assert_eq!(c.standard, Truth::Fails);
    }

    #[test]
    fn depth_divided_is_standard_with_box() {
        let s = generate_depth_divided(5, &b()).unwrap();
        let c = classify(&s);
        assert_eq!(c.delta.verdict, SeriesKind::DivergesByCertificate);
        assert_eq!(c.box_.verdict, Truth::Holds);
        assert_eq!(c.standard, Truth::Holds);
        assert_eq!(c.not_extractable_from_threshold, Truth::Holds);
        assert_eq!(c.threshold.verdict, Truth::Fails);
        assert!(depth_divided_checks(&s).iter().all(|c| c.holds));
    }

    #[test]
    fn alpha_weighted_constant_one_is_at_threshold() {
        let s = generate_alpha_weighted(&AlphaPattern::constant(BigRational::one()), 8, &b()).unwrap();
        let c = classify(&s);
        assert_eq!(c.delta.verdict, SeriesKind::ConvergesByCertificate);
        assert_eq!(c.star.verdict, Truth::Holds);
        assert!(c.star.tail_lower_bound.clone().unwrap() > ratio(0, 1));
        assert_eq!(c.threshold.verdict, Truth::Holds);
        let checks = alpha_weighted_checks(&s);
        assert!(checks.len() > 10);
        assert!(checks.iter().all(|c| c.holds), "{checks:?}");
    }

    #[test]
    fn single_level_sequence_is_undetermined() {
        let s = explicit_sequence(vec![parse_length("1", &b()).unwrap()], None).unwrap();
        let d = delta_verdict(&s);
        assert_eq!(d.verdict, SeriesKind::Undetermined);
        assert!(d.partial_sum.lo.is_zero() && d.partial_sum.is_point());
        let st = star_verdict(&s);
        assert!(st.computed_min.is_none());
        assert!(!st.boundary_flags.is_empty());
    }

    #[test]
    fn horizon_one_star_report_is_empty_with_boundary_flag() {
        let s = generate_dyadic(1, &b()).unwrap();
        let st = star_verdict(&s);
        assert!(st.computed_min.is_none());
        assert_eq!(st.boundary_excluded, Some(0));
    }

    #[test]
    fn user_certificates_are_checked_before_use() {
        let lens: Vec<_> = ["1", "3", "12", "48"].iter().map(|x| parse_length(x, &b()).unwrap()).collect();
        let good = UserCertificate {
            from_depth: 1,
            lower: None,
            upper: Some(TermBound::Geometric { c: ratio(4, 1), ratio: ratio(1, 2) }),
        };
        let s = explicit_sequence(lens.clone(), Some(good)).unwrap();
        assert_eq!(delta_verdict(&s).verdict, SeriesKind::ConvergesByCertificate);
        let bad = UserCertificate {
            from_depth: 1,
            lower: None,
            upper: Some(TermBound::Geometric { c: ratio(1, 100), ratio: ratio(1, 2) }),
        };
        let s = explicit_sequence(lens.clone(), Some(bad)).unwrap();
        let v = delta_verdict(&s);
        assert_eq!(v.verdict, SeriesKind::Undetermined);
        assert!(v.boundary_flags.iter().any(|f| f.contains("violated")));
        let s = explicit_sequence(lens, None).unwrap();
        let v = delta_verdict(&s);
        assert_eq!(v.verdict, SeriesKind::Undetermined);
        assert!(!v.partial_sum.is_point());
    }

    #[test]
    fn periodic_alpha_with_zeros_fails_star() {
        let alpha = AlphaPattern::Periodic { values: vec![ratio(0, 1), ratio(1, 1)] };
        let s = generate_alpha_weighted(&alpha, 7, &b()).unwrap();
        assert_eq!(star_verdict(&s).verdict, Truth::Fails);
        assert!(alpha_weighted_checks(&s).iter().all(|c| c.holds));
    }
}
