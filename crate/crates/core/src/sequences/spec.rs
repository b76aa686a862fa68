//! Declarative sequence files and their exports.
//!
//! ```json
//! { "generator": { "kind": "alpha_weighted", "alpha": { "kind": "constant", "value": "1/1" } },
//!   "depth": 8,
//!   "extraction": { "period": 2, "residues": [1] } }
//! ```

use serde::{Deserialize, Serialize};

use super::verdict::{classify, depth_divided_checks, alpha_weighted_checks, Classification, InequalityCheck};
use super::{
    analyze_extraction, classify_slowed, explicit_sequence, generate_dyadic, generate_depth_divided,
    generate_alpha_weighted, index_of_depth, parse_length, AlphaPattern, Budget, ExtractionAnalysis,
    ExtractionSet, LengthSequence, SequenceError, SlowedAnalysis, SlowingMap, UserCertificate,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Dyadic,
    DepthDivided,
    AlphaWeighted { alpha: AlphaPattern },
    /// Lengths as decimal integers or `"2^e"`; depth is `lengths.len() − 1`.
    Explicit {
        lengths: Vec<String>,
        #[serde(default)]
        certificate: Option<UserCertificate>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlowingSpec {
    pub map: SlowingMap,
    /// Extraction set on the slowed time axis.
    pub query: ExtractionSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    pub generator: GeneratorSpec,
    #[serde(default)]
    pub depth: Option<u64>,
    #[serde(default)]
    pub budget: Option<Budget>,
    #[serde(default)]
    pub extraction: Option<ExtractionSet>,
    #[serde(default)]
    pub slowing: Option<SlowingSpec>,
}

impl SequenceSpec {
    pub fn build(&self) -> Result<LengthSequence, SequenceError> {
        let budget = self.budget.unwrap_or_default();
        let need_depth = || {
            self.depth.ok_or_else(|| SequenceError::BadDepth("`depth` is required for this generator".into()))
        };
        match &self.generator {
            GeneratorSpec::Dyadic => generate_dyadic(need_depth()?, &budget),
            GeneratorSpec::DepthDivided => generate_depth_divided(need_depth()?, &budget),
            GeneratorSpec::AlphaWeighted { alpha } => generate_alpha_weighted(alpha, need_depth()?, &budget),
            GeneratorSpec::Explicit { lengths, certificate } => {
                let parsed = lengths.iter().map(|s| parse_length(s, &budget)).collect::<Result<Vec<_>, _>>()?;
                if let Some(d) = self.depth {
                    if d + 1 != parsed.len() as u64 {
                        return Err(SequenceError::BadDepth(format!(
                            "depth {d} does not match {} lengths",
                            parsed.len()
                        )));
                    }
                }
                explicit_sequence(parsed, certificate.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SequenceReport {
    pub schema_version: u32,
    pub classification: Classification,
    /// Generator-specific inequalities checked on every materialised level.
    pub level_checks: Vec<InequalityCheck>,
    pub level_checks_pass: bool,
    pub extraction: Option<ExtractionAnalysis>,
    pub slowed: Option<SlowedAnalysis>,
}

pub fn report(spec: &SequenceSpec) -> Result<(LengthSequence, SequenceReport), SequenceError> {
    let seq = spec.build()?;
    let classification = classify(&seq);
    let mut level_checks = depth_divided_checks_if(&seq);
    level_checks.extend(alpha_weighted_checks(&seq));
    let level_checks_pass = level_checks.iter().all(|c| c.holds);
    let extraction = spec.extraction.as_ref().map(|b| analyze_extraction(&seq, b)).transpose()?;
    let slowed = spec
        .slowing
        .as_ref()
        .map(|s| classify_slowed(&seq, &s.map, &s.query))
        .transpose()?;
    let report = SequenceReport {
        schema_version: crate::SCHEMA_VERSION,
        classification,
        level_checks,
        level_checks_pass,
        extraction,
        slowed,
    };
    Ok((seq, report))
}

fn depth_divided_checks_if(seq: &LengthSequence) -> Vec<InequalityCheck> {
    match seq.generator() {
        super::Generator::DepthDivided => depth_divided_checks(seq),
        _ => Vec::new(),
    }
}

/// Columns n, length, ratio, term; the term is log₂(r_n)/ℓ_n as `p/q`, an
/// enclosure `[lo,hi]`, or `k/2^e` when the denominator is symbolic.
pub fn term_table_csv(seq: &LengthSequence) -> String {
    let mut out = String::from("n,length,ratio,term\n");
    for d in 0..=seq.depth() {
        let ratio = seq.ratio(d).map(|r| r.to_string()).unwrap_or_default();
        let term = seq.delta_term(d).map(|t| t.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{}\n", index_of_depth(d), seq.length(d), ratio, term));
    }
    out
}
