use std::path::Path;
use std::process::{Command, Output};

use dilation_harness::report::strip_wall_time;

fn dilation(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dilation")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn empty_suite_list_prints_only_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.toml", "suites = []\n");
    let out = dilation(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 1);
    let v: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!((v["summary"].as_str(), v["pass"].as_bool()), (Some("run"), Some(true)));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let zero =
        write(dir.path(), "zero.toml", "seed = 1\nsuites = [\"isometry\"]\n[params.isometry]\ntolerance = 0.0\n");
    assert_eq!(dilation(&["run", "--config", &zero]).status.code(), Some(2));
    let unknown = write(dir.path(), "unknown.toml", "seed = 1\nsuites = [\"isometry-3.2\"]\n");
    assert_eq!(dilation(&["run", "--config", &unknown]).status.code(), Some(2));
    let no_seed = write(dir.path(), "noseed.json", r#"{"suites": ["unit-laws"]}"#);
    assert_eq!(dilation(&["run", "--config", &no_seed]).status.code(), Some(2));
    assert_eq!(dilation(&["run", "--config", &no_seed, "--seed", "4"]).status.code(), Some(0));
    let typo = write(dir.path(), "typo.toml", "sead = 1\n");
    assert_eq!(dilation(&["run", "--config", &typo]).status.code(), Some(2));
    assert_eq!(dilation(&["run", "--config", "/nonexistent/x.toml"]).status.code(), Some(2));
}

#[test]
fn failing_suite_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "tight.toml",
        "seed = 3\nsuites = [\"unit-laws\"]\n[params.unit-laws]\ncases = 50\ntolerance = 1e-300\n",
    );
    let out = dilation(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    let summary: serde_json::Value =
        serde_json::from_str(text.lines().find(|l| l.contains("\"summary\":true")).unwrap()).unwrap();
    assert_eq!(summary["cases"].as_u64(), Some(150));
    assert!(summary["failed"].as_u64().unwrap() > 0);
}

#[test]
fn same_seed_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "det.toml",
        r#"
seed = 11
suites = ["isometry", "associativity-3.2", "frame-convergence", "continuity-4.1"]
[params.isometry]
cases = 30
[params."associativity-3.2"]
cases = 20
[params.frame-convergence]
cases = 4
[params."continuity-4.1"]
cases = 3
"#,
    );
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    let run = |report: &Path, jobs: &str| {
        dilation(&["run", "--config", &cfg, "--report", report.to_str().unwrap(), "--jobs", jobs]).status.code()
    };
    assert_eq!(run(&a, "1"), Some(0));
    assert_eq!(run(&b, "4"), Some(0));
    let (a, b) = (std::fs::read_to_string(a).unwrap(), std::fs::read_to_string(b).unwrap());
    let strip = |s: &str| s.lines().map(|l| strip_wall_time(l).to_string()).collect::<Vec<_>>();
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(a.lines().count(), 60 + 20 + 4 * 8 + 3 * 4 + 4 + 1);
    // a different seed changes the draws
    let c = dir.path().join("c.jsonl");
    dilation(&["run", "--config", &cfg, "--seed", "12", "--report", c.to_str().unwrap()]);
    assert_ne!(strip(&a), strip(&std::fs::read_to_string(c).unwrap()));
}

#[test]
fn suite_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "o.toml", "seed = 2\nsuites = [\"isometry\"]\n[params.unit-laws]\ncases = 5\n");
    let out = dilation(&["run", "--config", &cfg, "--suite", "unit-laws"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().all(|l| !l.contains("\"suite\":\"isometry\"")));
    assert_eq!(text.lines().filter(|l| l.contains("\"suite\":\"unit-laws\"")).count(), 16);
}

#[test]
fn describe_traces() {
    let dir = tempfile::tempdir().unwrap();
    let vac = write(dir.path(), "v.json", r#"{"kind": "kvector", "k": "vacuum"}"#);
    let out = dilation(&["describe", "--input", &vac]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "1 section, interval (0,1], depth 0, vacuum");
    let half = write(dir.path(), "h.json", r#"{"kind": "left_dilation", "t": "1/2", "k": "vacuum", "x": "vacuum"}"#);
    let text = String::from_utf8(dilation(&["describe", "--input", &half]).stdout).unwrap();
    assert!(text.contains("split at 1−r = 1/2 (0.5)"));
    let bad = write(dir.path(), "b.json", r#"{"kind": "kvector", "k": "nope"}"#);
    assert_eq!(dilation(&["describe", "--input", &bad]).status.code(), Some(2));
}
