use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_filtrations"));
    c.env_remove("FILTRATIONS_OUT");
    c
}

struct Work {
    dir: TempDir,
}

impl Work {
    fn new() -> Work {
        Work { dir: tempfile::tempdir().unwrap() }
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, contents).unwrap();
        p
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out")
    }

    fn run(&self, args: &[&str]) -> Output {
        bin().arg("--out").arg(self.out()).args(args).current_dir(self.dir.path()).output().unwrap()
    }
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

/// Paths the command printed, one per line before the status line.
fn written(o: &Output) -> Vec<PathBuf> {
    String::from_utf8_lossy(&o.stdout)
        .lines()
        .filter(|l| !l.starts_with("status:"))
        .map(PathBuf::from)
        .collect()
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn first_json(o: &Output) -> Value {
    let p = written(o).into_iter().find(|p| p.extension().is_some_and(|e| e == "json")).unwrap();
    json(&p)
}

#[test]
fn dyadic_sequence_converges_and_is_not_at_threshold() {
    let w = Work::new();
    w.file("dyadic.json", r#"{"generator": {"kind": "dyadic"}, "depth": 10}"#);
    let o = w.run(&["classify", "--input", "dyadic.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = first_json(&o);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "classify");
    let c = &v["result"]["classification"];
    assert_eq!(c["delta"]["verdict"], "converges_by_certificate");
    assert_eq!(c["standard"], "fails");
    assert_eq!(c["threshold"]["verdict"], "fails");
    let csv = written(&o).into_iter().find(|p| p.extension().is_some_and(|e| e == "csv")).unwrap();
    let table = std::fs::read_to_string(csv).unwrap();
    assert!(table.starts_with("n,length,ratio,term\n"));
    assert_eq!(table.lines().count(), 12);
}

#[test]
fn constant_one_alpha_sequence_is_at_threshold() {
    let w = Work::new();
    w.file(
        "a.json",
        r#"{"generator": {"kind": "alpha_weighted", "alpha": {"kind": "constant", "value": "1/1"}}, "depth": 6}"#,
    );
    let o = w.run(&["classify", "--input", "a.json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(first_json(&o)["result"]["classification"]["threshold"]["verdict"], "holds");
}

#[test]
fn alternating_alpha_extractions_split_by_parity() {
    let w = Work::new();
    for (name, residue, standard) in [("evens", 0, "holds"), ("odds", 1, "fails")] {
        w.file(
            &format!("{name}.json"),
            &format!(
                r#"{{"generator": {{"kind": "alpha_weighted", "alpha": {{"kind": "periodic", "values": ["0", "1"]}}}},
                    "depth": 8, "extraction": {{"period": 2, "residues": [{residue}]}}}}"#
            ),
        );
        let o = w.run(&["classify", "--input", &format!("{name}.json")]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(first_json(&o)["result"]["extraction"]["standard"], standard, "{name}");
    }
}

#[test]
fn generate_lists_every_level() {
    let w = Work::new();
    w.file("d.json", r#"{"generator": {"kind": "depth_divided"}, "depth": 4}"#);
    let o = w.run(&["generate", "--input", "d.json"]);
    assert_eq!(code(&o), 0);
    let levels = first_json(&o)["result"]["levels"].as_array().unwrap().clone();
    assert_eq!(levels.len(), 5);
    assert_eq!(levels[0]["length"], "1");
    assert_eq!(levels[1]["length"], "2");
}

#[test]
fn horizon_beyond_exponent_budget_exits_with_budget_code() {
    let w = Work::new();
    w.file("d.json", r#"{"generator": {"kind": "depth_divided"}, "depth": 12}"#);
    let o = w.run(&["--exp-bits", "4", "classify", "--input", "d.json"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn malformed_input_exits_with_input_code() {
    let w = Work::new();
    w.file("bad.json", r#"{"generator": {"kind": "nonsense"}}"#);
    let o = w.run(&["classify", "--input", "bad.json"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("input error"));
    assert_eq!(code(&w.run(&["classify", "--input", "missing.json"])), 2);
}

#[test]
fn stochastic_commands_require_a_seed() {
    let w = Work::new();
    w.file("sw.json", r#"{"alphabet": 2, "lengths": [4, 2, 1]}"#);
    assert_eq!(code(&w.run(&["simulate", "--input", "sw.json"])), 2);
}

#[test]
fn quartic_five_brick_passes_with_overlap_four_fifths() {
    let w = Work::new();
    w.file("q5.json", r#"{"family": "quartic", "q": 5}"#);
    let o = w.run(&["brick-verify", "--input", "q5.json", "--seed", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = first_json(&o);
    assert_eq!(v["status"], "pass");
    assert_eq!(v["result"]["max_overlap"], "4/5");
    assert!(v["result"]["clauses"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
}

#[test]
fn quartic_three_is_rejected() {
    let w = Work::new();
    w.file("q3.json", r#"{"family": "quartic", "q": 3}"#);
    let o = w.run(&["brick-verify", "--input", "q3.json", "--seed", "1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("4/3"));
}

#[test]
fn geometric_two_brick_passes() {
    let w = Work::new();
    w.file("g.json", r#"{"family": "geometric", "p": 2}"#);
    let o = w.run(&["brick-verify", "--input", "g.json", "--seed", "1"]);
    assert_eq!(code(&o), 0);
    let r = &first_json(&o)["result"];
    assert_eq!(r["x0_x2_independent"], true);
    assert_eq!(r["rho0_holds"], true);
}

#[test]
fn split_words_simulation_is_uniform_and_reproducible() {
    let w = Work::new();
    w.file("sw.json", r#"{"alphabet": 2, "lengths": [4, 2, 1]}"#);
    let args = ["simulate", "--input", "sw.json", "--seed", "9", "--replicates", "50"];
    let first = w.run(&args);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let v = first_json(&first);
    assert_eq!(v["result"]["paths_consistent"], 50);
    assert_eq!(v["result"]["exact"]["all_uniform"], true);
    let files = written(&first);
    let lines = std::fs::read_to_string(files.iter().find(|p| p.extension().unwrap() == "jsonl").unwrap()).unwrap();
    assert_eq!(lines.lines().count(), 150);

    // A second run writes new versions with identical bytes and leaves the
    // first ones alone.
    let before: Vec<Vec<u8>> = files.iter().map(|p| std::fs::read(p).unwrap()).collect();
    let second = w.run(&args);
    let again = written(&second);
    assert!(again.iter().all(|p| p.to_string_lossy().contains(".v2.")));
    for ((a, b), old) in files.iter().zip(&again).zip(&before) {
        assert_eq!(&std::fs::read(a).unwrap(), old);
        assert_eq!(std::fs::read(b).unwrap(), *old);
    }
}

#[test]
fn small_enumeration_budget_gives_partial_status() {
    let w = Work::new();
    w.file("sw.json", r#"{"alphabet": 2, "lengths": [4, 2, 1]}"#);
    let o = w.run(&["--enum-bits", "3", "simulate", "--input", "sw.json", "--seed", "1"]);
    assert_eq!(code(&o), 3);
    assert_eq!(first_json(&o)["status"], "partial");
}

#[test]
fn output_directory_comes_from_the_environment() {
    let w = Work::new();
    w.file("g.json", r#"{"family": "geometric", "p": 2}"#);
    let target = w.dir.path().join("from-env");
    let o = bin()
        .env("FILTRATIONS_OUT", &target)
        .args(["brick-verify", "--input", "g.json", "--seed", "0"])
        .current_dir(w.dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(target.join("brick-verify-g.v1.json").exists());
}

#[test]
fn diagonal_identical_start_never_separates() {
    let w = Work::new();
    w.file("chain.json", r#"{"kind": "split_words", "alphabet": 2, "lengths": [4, 2, 1]}"#);
    w.file("diag.json", r#"{"type": "diagonal"}"#);
    let o = w.run(&[
        "couple", "--chain", "chain.json", "--strategy", "diag.json", "--seed", "4", "--replicates", "500", "--start",
        "identical",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = first_json(&o);
    assert!(v["result"]["levels"].as_array().unwrap().iter().all(|l| l["neq_count"] == 0));
    let csv = written(&o).into_iter().find(|p| p.extension().unwrap() == "csv").unwrap();
    let table = std::fs::read_to_string(csv).unwrap();
    assert!(table.lines().skip(1).all(|l| l.split(',').nth(1) == Some("0")));
}

#[test]
fn greedy_coupling_respects_the_separation_bound() {
    let w = Work::new();
    w.file("chain.json", r#"{"kind": "glued", "family": "quartic", "q": 7, "bricks": 1, "mode": "materialized"}"#);
    w.file("greedy.json", r#"{"type": "greedy_maximal"}"#);
    let o = w.run(&["couple", "--chain", "chain.json", "--strategy", "greedy.json", "--seed", "2", "--replicates", "4000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = first_json(&o);
    let row = v["result"]["levels"].as_array().unwrap().iter().find(|l| l["level"] == -1).unwrap().clone();
    assert_eq!(row["bound"], "3/14");
    assert_eq!(row["status"], "pass");
}

#[test]
fn immersion_verdicts() {
    let w = Work::new();
    let o = w.run(&["immersion", "--future-revealing"]);
    assert_eq!(code(&o), 1);
    assert_eq!(first_json(&o)["result"]["verdict"]["failing_step"], 1);

    w.file("chain.json", r#"{"kind": "split_words", "alphabet": 2, "lengths": [4, 2, 1]}"#);
    for s in ["greedy_maximal", "independent_product", "diagonal"] {
        w.file(&format!("{s}.json"), &format!(r#"{{"type": "{s}"}}"#));
        let o = w.run(&["immersion", "--chain", "chain.json", "--strategy", &format!("{s}.json")]);
        assert_eq!(code(&o), 0, "{s}: {}", String::from_utf8_lossy(&o.stderr));
        let r = &first_json(&o)["result"];
        assert_eq!(r["verdict"]["immersed"], true);
        assert!(r["path_enumeration"].as_array().unwrap().iter().all(|x| x["immersed"] == true));
    }
}

#[test]
fn report_indexes_previous_outputs() {
    let w = Work::new();
    w.file("g.json", r#"{"family": "geometric", "p": 2}"#);
    assert_eq!(code(&w.run(&["brick-verify", "--input", "g.json", "--seed", "0"])), 0);
    assert_eq!(code(&w.run(&["immersion", "--future-revealing"])), 1);
    let o = w.run(&["report"]);
    assert_eq!(code(&o), 1);
    let entries = first_json(&o)["result"].as_array().unwrap().clone();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["command"], "brick-verify");
    assert_eq!(entries[0]["status"], "pass");
    assert_eq!(entries[1]["status"], "violation");
}
