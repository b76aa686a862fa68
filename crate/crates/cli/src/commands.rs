use std::path::{Path, PathBuf};

use filtrations::bricks::{verify_spec, BrickSpec};
use filtrations::coupling::{
    immersion::future_revealing_law, immersion_check_paths, immersion_check_strategy, pair_path_law, run_coupling,
    BoundStatus, CouplingReport, ImmersionVerdict, PairScope, StartMode, StrategySpec,
};
use filtrations::exec::derive_seed;
use filtrations::sequences::spec::{report as sequence_report, term_table_csv, SequenceSpec};
use filtrations::sequences::{depth_of_index, index_of_depth, Truth};
use filtrations::split_words::{exact_marginals, sample_path, ExactMarginals};
use filtrations::SCHEMA_VERSION;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::inputs::{load, stem, ChainInput, SplitWordsInput};
use crate::output::{to_json, Envelope, OutputDir, Status};
use crate::{Common, Start};

pub struct Done {
    pub files: Vec<PathBuf>,
    pub status: Status,
}

fn envelope<T: Serialize>(
    command: &'static str,
    input: serde_json::Value,
    seed: Option<u64>,
    status: Status,
    result: T,
) -> Envelope<T> {
    Envelope { schema_version: SCHEMA_VERSION, command, input, seed, status, result }
}

fn load_sequence(common: &Common, input: &Path) -> Result<(SequenceSpec, serde_json::Value), CliError> {
    let (mut spec, raw): (SequenceSpec, _) = load(input)?;
    if let Some(bits) = common.exp_bits {
        let mut budget = spec.budget.unwrap_or_default();
        budget.exponent_bits = bits;
        budget.exact_bits = budget.exact_bits.min(bits);
        spec.budget = Some(budget);
    }
    Ok((spec, raw))
}

pub fn classify(common: &Common, out: &OutputDir, input: &Path) -> Result<Done, CliError> {
    let (spec, raw) = load_sequence(common, input)?;
    let (seq, report) = sequence_report(&spec)?;
    let status = if !report.level_checks_pass {
        Status::Violation
    } else if report.classification.standard == Truth::Undetermined
        || report.classification.threshold.verdict == Truth::Undetermined
    {
        Status::Undetermined
    } else {
        Status::Pass
    };
    let json = to_json(&envelope("classify", raw, None, status, &report));
    let files = out.write_versioned(&format!("classify-{}", stem(input)), &[("json", json), ("csv", term_table_csv(&seq))])?;
    Ok(Done { files, status })
}

#[derive(Serialize)]
struct LengthRow {
    n: i64,
    length: String,
    ratio: Option<String>,
}

#[derive(Serialize)]
struct Generated {
    generator: &'static str,
    depth: u64,
    levels: Vec<LengthRow>,
}

pub fn generate(common: &Common, out: &OutputDir, input: &Path) -> Result<Done, CliError> {
    let (spec, raw) = load_sequence(common, input)?;
    let seq = spec.build()?;
    let levels = (0..=seq.depth())
        .map(|d| LengthRow {
            n: index_of_depth(d),
            length: seq.length(d).to_string(),
            ratio: seq.ratio(d).map(|r| r.to_string()),
        })
        .collect();
    let result = Generated { generator: seq.generator().name(), depth: seq.depth(), levels };
    let json = to_json(&envelope("generate", raw, None, Status::Pass, result));
    let files = out.write_versioned(&format!("generate-{}", stem(input)), &[("json", json), ("csv", term_table_csv(&seq))])?;
    Ok(Done { files, status: Status::Pass })
}

#[derive(Serialize)]
struct Simulated {
    replicates: u64,
    paths_consistent: u64,
    /// Counts of the top letter X₀ over the simulated paths.
    top_letter_counts: Vec<u64>,
    exact: Option<ExactMarginals>,
    exact_skipped: Option<String>,
}

/// Paths larger than this many letters are not simulated.
const MAX_SIMULATED_LETTERS: u64 = 1 << 30;

pub fn simulate(common: &Common, out: &OutputDir, input: &Path, seed: u64, replicates: u64) -> Result<Done, CliError> {
    let (sw, raw): (SplitWordsInput, _) = load(input)?;
    let spec = sw.build()?;
    let deep = spec.length(spec.depth());
    if deep.saturating_mul(replicates) > MAX_SIMULATED_LETTERS {
        return Err(CliError::Budget(format!("{replicates} paths of {deep} letters exceed {MAX_SIMULATED_LETTERS} letters")));
    }
    let mut jsonl = String::new();
    let mut consistent = 0;
    let mut top = vec![0u64; spec.alphabet() as usize];
    for i in 0..replicates {
        let path = sample_path(&spec, derive_seed(seed, "split_words", i))?;
        consistent += path.verify() as u64;
        top[path.levels[0].word[0] as usize] += 1;
        for level in path.levels.iter().rev() {
            let word: String = level.word.iter().map(|&c| char::from_digit(c as u32, 36).expect("alphabet ≤ 36")).collect();
            jsonl.push_str(&serde_json::json!({ "path": i, "n": level.n, "word": word, "U": level.u }).to_string());
            jsonl.push('\n');
        }
    }
    let (exact, exact_skipped) = match exact_marginals(&spec, common.budget()) {
        Ok(m) => (Some(m), None),
        Err(e @ filtrations::split_words::SplitWordsError::BudgetExceeded { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let status = if consistent < replicates || exact.as_ref().is_some_and(|m| !m.all_uniform || !m.all_independent) {
        Status::Violation
    } else if exact.is_none() {
        Status::Partial
    } else {
        Status::Pass
    };
    let result = Simulated { replicates, paths_consistent: consistent, top_letter_counts: top, exact, exact_skipped };
    let json = to_json(&envelope("simulate", raw, Some(seed), status, result));
    let files = out.write_versioned(&format!("simulate-{}", stem(input)), &[("json", json), ("jsonl", jsonl)])?;
    Ok(Done { files, status })
}

pub fn brick_verify(common: &Common, out: &OutputDir, input: &Path, seed: u64) -> Result<Done, CliError> {
    let (spec, raw): (BrickSpec, _) = load(input)?;
    let report = verify_spec(&spec, common.budget(), seed, common.exec())?;
    let status = if report.has_failure() {
        Status::Violation
    } else if report.is_partial() {
        Status::Partial
    } else {
        Status::Pass
    };
    let json = to_json(&envelope("brick-verify", raw, Some(seed), status, &report));
    let files = out.write_versioned(&format!("brick-verify-{}", stem(input)), &[("json", json)])?;
    Ok(Done { files, status })
}

#[derive(Serialize, Deserialize)]
struct CoupleInput {
    chain: serde_json::Value,
    strategy: serde_json::Value,
    start: StartMode,
}

#[allow(clippy::too_many_arguments)]
pub fn couple(
    common: &Common,
    out: &OutputDir,
    chain_path: &Path,
    strategy_path: &Path,
    seed: u64,
    replicates: u64,
    start: Start,
    start_level: Option<i64>,
) -> Result<Done, CliError> {
    let (chain_input, chain_raw): (ChainInput, _) = load(chain_path)?;
    let (strategy, strategy_raw): (StrategySpec, _) = load(strategy_path)?;
    let depth = match start_level {
        Some(n) if n > 0 => return Err(CliError::Input(format!("start level {n} must be ≤ 0"))),
        Some(n) => Some(depth_of_index(n)),
        None => None,
    };
    let start = match start {
        Start::Independent => StartMode::Independent { depth },
        Start::Identical => StartMode::Identical { depth },
    };
    let built = chain_input.build(common.budget(), common.exec())?;
    let chain = built.steps();
    if let Some(d) = depth.filter(|&d| d > chain.depth()) {
        return Err(CliError::Input(format!("start level {} is below the deepest level", index_of_depth(d))));
    }
    let run = run_coupling(chain, &strategy.kind, start, replicates, seed, PairScope::default(), common.exec())?;
    // Both bounds concern copies that start apart.
    let (bounds, step_pairs) = match start {
        StartMode::Independent { .. } if run.start_depth == chain.depth() => {
            (built.separation_bounds(), built.step_pairs(run.start_depth))
        }
        StartMode::Independent { .. } => (Default::default(), built.step_pairs(run.start_depth)),
        StartMode::Identical { .. } => (Default::default(), Vec::new()),
    };
    let report = CouplingReport::new(&run, &bounds, &built.step_floors(), &step_pairs);
    let status = if report.has_violation() {
        Status::Violation
    } else if report.levels.iter().any(|l| l.status == BoundStatus::Inconclusive)
        || report.steps.iter().any(|s| s.status == BoundStatus::Inconclusive)
    {
        Status::Undetermined
    } else {
        Status::Pass
    };
    let raw = serde_json::to_value(CoupleInput { chain: chain_raw, strategy: strategy_raw, start }).expect("input echo");
    let csv = report.to_csv();
    let json = to_json(&envelope("couple", raw, Some(seed), status, &report));
    let name = format!("couple-{}-{}", stem(chain_path), stem(strategy_path));
    let files = out.write_versioned(&name, &[("json", json), ("csv", csv)])?;
    Ok(Done { files, status })
}

#[derive(Serialize)]
struct ImmersionResult {
    verdict: ImmersionVerdict,
    /// Path-enumeration verdicts for the first and second copy, when the
    /// pair paths fit the enumeration budget.
    path_enumeration: Option<[ImmersionVerdict; 2]>,
    path_enumeration_skipped: Option<String>,
}

/// Pair-path enumeration cross-check stays below this many paths.
const PATH_ENUMERATION_LIMIT: usize = 1 << 20;

pub fn immersion(
    common: &Common,
    out: &OutputDir,
    chain_path: Option<&Path>,
    strategy_path: Option<&Path>,
    future_revealing: bool,
) -> Result<Done, CliError> {
    let (result, raw, name) = if future_revealing {
        let verdict = immersion_check_paths(&future_revealing_law());
        let raw = serde_json::json!({ "law": "future_revealing" });
        (ImmersionResult { verdict, path_enumeration: None, path_enumeration_skipped: None }, raw, "immersion-future-revealing".to_string())
    } else {
        let (chain_path, strategy_path) = chain_path.zip(strategy_path).ok_or_else(|| {
            CliError::Input("immersion needs --chain and --strategy, or --future-revealing".into())
        })?;
        let (chain_input, chain_raw): (ChainInput, _) = load(chain_path)?;
        let (strategy, strategy_raw): (StrategySpec, _) = load(strategy_path)?;
        let built = chain_input.build(common.budget(), common.exec())?;
        let chain = built.steps();
        let verdict = immersion_check_strategy(chain, &strategy.kind, common.exec());
        let limit = PATH_ENUMERATION_LIMIT.min(common.budget() as usize);
        let start = StartMode::Independent { depth: None };
        let laws = pair_path_law(chain, &strategy.kind, start, true, limit)
            .and_then(|a| Ok((a, pair_path_law(chain, &strategy.kind, start, false, limit)?)));
        let (path_enumeration, path_enumeration_skipped) = match laws {
            Ok((a, b)) => (Some([immersion_check_paths(&a), immersion_check_paths(&b)]), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let raw = serde_json::json!({ "chain": chain_raw, "strategy": strategy_raw });
        let name = format!("immersion-{}-{}", stem(chain_path), stem(strategy_path));
        (ImmersionResult { verdict, path_enumeration, path_enumeration_skipped }, raw, name)
    };
    let agree = result
        .path_enumeration
        .as_ref()
        .is_none_or(|v| v.iter().all(|x| x.immersed == result.verdict.immersed));
    let status = match (result.verdict.immersed, agree) {
        (true, true) => Status::Pass,
        _ => Status::Violation,
    };
    let json = to_json(&envelope("immersion", raw, None, status, result));
    let files = out.write_versioned(&name, &[("json", json)])?;
    Ok(Done { files, status })
}

#[derive(Serialize)]
struct IndexEntry {
    file: String,
    command: Option<String>,
    schema_version: Option<u64>,
    status: Option<String>,
}

/// Lists every JSON report in the output directory (index files excluded)
/// with its command and status.
pub fn report(out: &OutputDir) -> Result<Done, CliError> {
    let root = out.root();
    let mut names: Vec<String> = std::fs::read_dir(root)
        .map_err(|e| CliError::io(root, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".json") && !n.starts_with("index."))
        .collect();
    names.sort();
    let mut entries = Vec::with_capacity(names.len());
    for name in names {
        let path = root.join(&name);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let v: serde_json::Value = serde_json::from_str(&text).unwrap_or(serde_json::Value::Null);
        let field = |k: &str| v.get(k).and_then(|x| x.as_str()).map(String::from);
        entries.push(IndexEntry {
            file: name,
            command: field("command"),
            schema_version: v.get("schema_version").and_then(|x| x.as_u64()),
            status: field("status"),
        });
    }
    let status = if entries.iter().any(|e| e.status.as_deref() == Some("violation")) {
        Status::Violation
    } else {
        Status::Pass
    };
    let mut csv = String::from("file,command,schema_version,status\n");
    for e in &entries {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            e.file,
            e.command.as_deref().unwrap_or(""),
            e.schema_version.map(|s| s.to_string()).unwrap_or_default(),
            e.status.as_deref().unwrap_or("")
        ));
    }
    let json = to_json(&envelope("report", serde_json::Value::Null, None, status, &entries));
    let files = out.write_versioned("index", &[("json", json), ("csv", csv)])?;
    Ok(Done { files, status })
}
