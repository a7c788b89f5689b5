use std::path::Path;
use std::process::{Command, Output};

fn bizrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bizrec")).args(args).output().expect("binary runs")
}

fn ok(output: Output) -> Output {
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));
    output
}

fn gen(dir: &Path, name: &str) -> String {
    let path = dir.join(name).display().to_string();
    ok(bizrec(&["gen", "--cases", "82", "--seed", "42", "-o", &path]));
    path
}

#[test]
fn gen_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = std::fs::read(gen(dir.path(), "a.json")).unwrap();
    let b = std::fs::read(gen(dir.path(), "b.json")).unwrap();
    assert_eq!(a, b);
    let other = ok(bizrec(&["gen", "--cases", "82", "--seed", "43"])).stdout;
    assert_ne!(a, other);
}

#[test]
fn gen_reads_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("gen.toml");
    std::fs::write(&config, "cases = 12\nprocesses = [\"hr\"]\n").unwrap();
    let out = ok(bizrec(&["gen", "--config", &config.display().to_string()])).stdout;
    let doc: serde_json::Value = serde_json::from_slice(&out).unwrap();
    let cases = doc["cases"].as_array().unwrap();
    assert_eq!(cases.len(), 12);
    assert!(cases.iter().all(|c| c["business_process"] == "hr"));
}

#[test]
fn eval_matches_golden_report() {
    let dir = tempfile::tempdir().unwrap();
    let cb = gen(dir.path(), "cb.json");
    let run = || ok(bizrec(&["eval", "--case-base", &cb, "--seed", "42", "--engines", "cbr:2,graph,hybrid:0.3"])).stdout;
    let first = run();
    assert_eq!(first, run());
    let golden = std::fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/eval_seed42.txt")).unwrap();
    assert_eq!(String::from_utf8(first).unwrap(), String::from_utf8(golden).unwrap());
}

#[test]
fn eval_formats_levels_and_relevance_mode() {
    let dir = tempfile::tempdir().unwrap();
    let cb = dir.path().join("small.json").display().to_string();
    ok(bizrec(&["gen", "--cases", "12", "--seed", "3", "-o", &cb]));
    let csv = ok(bizrec(&[
        "eval", "--case-base", &cb, "--engines", "cbr:1,cf:itemknn:5", "--levels", "0,4", "--format", "csv",
        "--relevance-mode", "exclude-query", "--threads", "1",
    ]))
    .stdout;
    let csv = String::from_utf8(csv).unwrap();
    assert!(csv.contains("# relevance_mode: exclude-query"), "{csv}");
    let lines: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines[0], "verbosity,cbr:1,cf:itemknn:5");
    assert!(lines[1].starts_with("0,") && lines[1].ends_with(",-"), "{}", lines[1]);
    assert!(lines[2].starts_with("4,"));

    let json = ok(bizrec(&["eval", "--case-base", &cb, "--levels", "0,4", "--format", "json"])).stdout;
    let report: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(report["metadata"]["relevance_mode"], "include");
}

#[test]
fn recommend_answers_a_verbosity_zero_query() {
    let dir = tempfile::tempdir().unwrap();
    let cb = gen(dir.path(), "cb.json");
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cb).unwrap()).unwrap();
    let case = &doc["cases"][0];
    let query = dir.path().join("q.json");
    let body = serde_json::json!({
        "industry": case["industry"],
        "business_process": case["business_process"],
        "goal": case["goal"],
        "target_groups": case["target_groups"],
    });
    std::fs::write(&query, body.to_string()).unwrap();
    let q = query.display().to_string();
    let out = ok(bizrec(&["recommend", "--case-base", &cb, "--query", &q, "--limit", "5", "--format", "json"])).stdout;
    let ranking: Vec<serde_json::Value> = serde_json::from_slice(&out).unwrap();
    assert_eq!(ranking.len(), 5);

    let pretty = String::from_utf8(ok(bizrec(&["recommend", "--case-base", &cb, "--query", &q])).stdout).unwrap();
    assert!(pretty.starts_with("rank"));
    assert_eq!(pretty.lines().count(), 11);

    let cf = bizrec(&["recommend", "--case-base", &cb, "--query", &q, "--engine", "cf:userknn:10"]);
    assert!(!cf.status.success());
    assert!(String::from_utf8_lossy(&cf.stderr).starts_with("error:"));
}

#[test]
fn bad_invocations_fail_with_diagnostics() {
    let usage = bizrec(&["eval"]);
    assert!(!usage.status.success());
    assert!(String::from_utf8_lossy(&usage.stderr).contains("--case-base"));

    assert!(!bizrec(&["frobnicate"]).status.success());

    let dir = tempfile::tempdir().unwrap();
    let cb = dir.path().join("cb.json").display().to_string();
    ok(bizrec(&["gen", "--cases", "5", "-o", &cb]));
    for args in [
        vec!["eval", "--case-base", &cb, "--engines", "pagerank"],
        vec!["eval", "--case-base", &cb, "--levels", "5,0"],
        vec!["eval", "--case-base", "/nonexistent.json"],
    ] {
        let out = bizrec(&args);
        assert!(!out.status.success(), "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"), "{args:?}");
    }
}
