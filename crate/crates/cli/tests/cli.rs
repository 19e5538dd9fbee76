//! End-to-end runs of the `trstool` binary.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn corpus(name: &str) -> String {
    format!("{}/../core/corpus/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn schema(name: &str) -> Value {
    let path = format!("{}/../../docs/schemas/{name}.schema.json", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trstool"))
        .args(args)
        .env_remove("TRSTOOL_STEP_LIMIT")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

/// Parses stdout as JSON and validates it against the shipped schema.
fn json(out: &Output, schema_name: &str) -> Value {
    let value: Value = serde_json::from_str(&stdout(out)).unwrap();
    let validator = jsonschema::validator_for(&schema(schema_name)).unwrap();
    let errors: Vec<String> = validator.iter_errors(&value).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:?}");
    value
}

fn scratch(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn check_passes_on_lcs() {
    let out = run(&["check", &corpus("lcs.trs")]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.contains(": pass (")).count(), 5);

    let out = run(&["check", &corpus("lcs.trs"), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out, "check");
    assert_eq!(v["passed"], true);
    assert_eq!(v["orientation"]["rules"].as_array().unwrap().len(), 9);
}

#[test]
fn check_passes_on_qbf() {
    let out = run(&["check", &corpus("qbf.trs"), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out, "check");
    assert_eq!(v["orientation"]["rules"].as_array().unwrap().len(), 15);
}

#[test]
fn check_reports_the_unoriented_rule() {
    let out = run(&["check", &corpus("lcs_broken.trs")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("orientation: FAIL"));

    let out = run(&["check", &corpus("lcs_broken.trs"), "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out, "check");
    assert_eq!(v["passed"], false);
    assert_eq!(v["orientation"]["first_failure"], 7);
}

#[test]
fn text_and_json_verdicts_agree() {
    for file in ["lcs.trs", "lcs_broken.trs", "qbf.trs"] {
        let text = stdout(&run(&["check", &corpus(file)]));
        let v = json(&run(&["check", &corpus(file), "--json"]), "check");
        for verdict in v["verdicts"].as_array().unwrap() {
            let name = verdict["check"].as_str().unwrap();
            let status = if verdict["status"] == "pass" { "pass" } else { "FAIL" };
            assert!(text.contains(&format!("{name}: {status} (")), "{file}: {name}");
        }
    }
}

#[test]
fn missing_or_malformed_input_exits_2() {
    let out = run(&["check", "nonexistent.trs"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot read"));

    let bad = scratch("bad.trs");
    fs::write(&bad, "constructors: 0/0\ndefined: f/1\nrules:\n  f(x) -> g(x)\n").unwrap();
    let out = run(&["check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("4:"), "{}", stderr(&out));

    let out = run(&["eval", &corpus("lcs.trs"), "lcs(a)"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["check", &corpus("lcs.trs"), "--subst-bound", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn eval_both_strategies_agree() {
    let out = run(&["eval", &corpus("lcs.trs"), "lcs(a(a(eps)),b(b(eps)))", "--strategy", "both"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("0"));
    assert!(text.contains("strategies agree"));

    let out = run(&["eval", &corpus("lcs.trs"), "lcs(a(a(eps)),b(b(eps)))", "--strategy", "both", "--json"]);
    let v = json(&out, "eval");
    assert_eq!(v["normal_form"], "0");
    assert_eq!(v["equal"], true);
    assert_eq!(v["naive"]["steps"], 16);
}

#[test]
fn eval_qbf_example() {
    let out = run(&["eval", &corpus("qbf.trs"), "qbf(exists_c(0,var(0)))"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().next(), Some("top"));
}

#[test]
fn eval_rejects_open_terms() {
    let out = run(&["eval", &corpus("lcs.trs"), "max(x,0)"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not closed"));
}

#[test]
fn eval_is_fail_closed() {
    let out = run(&["eval", &corpus("lcs_broken.trs"), "lcs(a(eps),b(eps))"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--force"));

    let out = run(&["eval", &corpus("lcs_broken.trs"), "lcs(a(eps),b(eps))", "--force", "--strategy", "naive"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().next(), Some("0"));
}

#[test]
fn step_limit_from_flag_and_environment() {
    let term = "lcs(a(a(a(eps))),b(b(b(eps))))";
    let out = run(&["eval", &corpus("lcs.trs"), term, "--strategy", "naive", "--step-limit", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("step limit 5 exceeded"));

    let out = Command::new(env!("CARGO_BIN_EXE_trstool"))
        .args(["eval", &corpus("lcs.trs"), term, "--strategy", "both"])
        .env("TRSTOOL_STEP_LIMIT", "7")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("step limit 7 exceeded"));
    // The memoized engine still answers.
    assert_eq!(stdout(&out).lines().next(), Some("0"));
}

#[test]
fn bench_with_no_rows() {
    let out = run(&["bench", &corpus("lcs.trs"), "--max-n", "0", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out, "bench");
    assert_eq!(v["rows"].as_array().unwrap().len(), 0);
}

#[test]
fn bench_square_table() {
    let out = run(&["bench", &corpus("lcs.trs"), "--family", "square", "--max-n", "10", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out, "bench");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 10);
    let steps: Vec<u64> = rows.iter().map(|r| r["naive_steps"].as_u64().unwrap()).collect();
    assert!(steps.windows(2).all(|w| w[0] < w[1]), "{steps:?}");
    let c = v["fitted_c"].as_f64().unwrap();
    for r in rows {
        let n = r["n"].as_f64().unwrap();
        assert!(r["distinct_calls"].as_f64().unwrap() <= c * (n + 1.0) * (n + 1.0));
        assert_eq!(r["oracle_ok"], true);
        assert_eq!(r["verified"], true);
    }
}

#[test]
fn bench_random_strings_match_the_table() {
    let out = run(&["bench", &corpus("lcs.trs"), "--family", "random", "--max-n", "6", "--seed", "3", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out, "bench");
    assert!(v["rows"].as_array().unwrap().iter().all(|r| r["oracle_ok"] == true));
}

#[test]
fn bench_exists_chain_against_truth_tables() {
    let out = run(&["bench", &corpus("qbf.trs"), "--family", "exists-chain", "--max-n", "6", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out, "bench");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r["oracle_ok"] == true && r["normal_form"] == "top"));
}

#[test]
fn bench_marks_rows_over_the_limit() {
    let out = run(&["bench", &corpus("lcs.trs"), "--max-n", "6", "--step-limit", "1000", "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out, "bench");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows[5]["naive_limit_exceeded"] == true && rows[5]["naive_steps"].is_null());
    assert_eq!(rows[5]["oracle_ok"], true);
}

#[test]
fn bench_family_needs_its_symbols() {
    let out = run(&["bench", &corpus("qbf.trs"), "--family", "square", "--max-n", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn graph_round_trip_through_verify() {
    let path = scratch("square3.json");
    let out = run(&[
        "eval",
        &corpus("lcs.trs"),
        "lcs(a(a(a(eps))),b(b(b(eps))))",
        "--verify",
        "--graph-out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("graph verified"));

    let doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema("graph")).unwrap();
    assert!(validator.is_valid(&doc));

    let out = run(&["verify", &corpus("lcs.trs"), path.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out, "verify")["verified"], true);

    // A forged value for one entry breaks the fold.
    let mut forged = doc.clone();
    let entries = forged["entries"].as_array_mut().unwrap();
    let last = entries.len() - 1;
    entries[last]["normal_form"] = Value::from("s(0)");
    forged["normal_form"] = Value::from("s(0)");
    let forged_path = scratch("square3_forged.json");
    fs::write(&forged_path, forged.to_string()).unwrap();
    let out = run(&["verify", &corpus("lcs.trs"), forged_path.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out, "verify");
    assert_eq!(v["verified"], false);
    assert!(v["violation"]["clause"].is_string());

    // A claimed budget other than the root's interpretation is refused.
    let mut widened = doc;
    widened["ell"] = Value::from(100);
    let widened_path = scratch("square3_widened.json");
    fs::write(&widened_path, widened.to_string()).unwrap();
    let out = run(&["verify", &corpus("lcs.trs"), widened_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("budget"));
}
