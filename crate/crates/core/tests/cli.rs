use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_pairwise-topk");

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn cli(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

const SMALL: &str = r#"{"instance": {"model": "equal_gap", "p_win": 0.7, "n": 10},
    "algorithm": "eqs", "params": {"k": 2, "epsilon": 0.1, "delta": 0.1},
    "trials": 3, "master_seed": 77}"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn run_writes_trial_and_aggregate_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.json", SMALL);
    let csv = stdout(&cli(&["run", "--config", cfg.to_str().unwrap()]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("x,trial,seed,comparisons"));
    assert!(lines[1..4].iter().enumerate().all(|(i, l)| l.starts_with(&format!(",{i},"))));
    assert!(lines[4].starts_with(",AGG,"));

    let out = dir.path().join("out.csv");
    stdout(&cli(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]));
    assert_eq!(std::fs::read_to_string(out).unwrap(), csv);
}

#[test]
fn run_reads_config_from_stdin() {
    let mut child =
        Command::new(BIN).args(["run", "--config", "-"]).stdin(Stdio::piped()).stdout(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(SMALL.as_bytes()).unwrap();
    let piped = stdout(&child.wait_with_output().unwrap());

    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.json", SMALL);
    assert_eq!(piped, stdout(&cli(&["run", "--config", cfg.to_str().unwrap()])));
}

#[test]
fn run_resolves_pwg_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(data("synthetic-nonsst.pwg"), dir.path().join("votes.pwg")).unwrap();
    let cfg = write(
        dir.path(),
        "pwg.json",
        r#"{"instance": {"model": "empirical", "pwg": "votes.pwg", "n": 12},
            "algorithm": "seeks", "params": {"k": 4, "delta": 0.1}, "trials": 2, "master_seed": 3}"#,
    );
    let csv = stdout(&cli(&["run", "--config", cfg.to_str().unwrap()]));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.json", SMALL);
    let path = cfg.to_str().unwrap();
    let runs: Vec<String> = ["1", "3", "8"]
        .iter()
        .map(|t| stdout(&Command::new(BIN).env("RANK_THREADS", t).args(["run", "--config", path]).output().unwrap()))
        .collect();
    assert!(runs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn bounds_grid_grows_monotonically() {
    let csv = stdout(&cli(&["bounds", "--gap", "0.1", "--delta", "0.1", "--k", "2", "--n-grid", "10:1000:log"]));
    let rows: Vec<Vec<f64>> = csv.lines().skip(1).map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert!(rows.len() >= 3);
    assert_eq!(rows[0][0], 10.0);
    assert_eq!(rows.last().unwrap()[0], 1000.0);
    for w in rows.windows(2) {
        assert!(w[0].iter().zip(&w[1]).all(|(a, b)| b > a), "{:?} -> {:?}", w[0], w[1]);
    }
}

#[test]
fn validate_reports_the_fixture_violations() {
    let path = data("synthetic-nonsst.pwg");
    let out = stdout(&cli(&["validate", "--pwg", path.to_str().unwrap(), "--gamma", "5"]));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["n"], 12);
    assert_eq!(v["sst"], false);
    assert_eq!(v["sti"], false);
    assert_eq!(v["gamma5"], true);
    assert_eq!(v["sst_witness"]["kind"], "cycle");
}

#[test]
fn validate_accepts_a_matrix_file() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.json", r#"{"n": 3, "p": [[0.5, 0.6, 0.7], [0.4, 0.5, 0.6], [0.3, 0.4, 0.5]]}"#);
    let v: Value = serde_json::from_str(&stdout(&cli(&["validate", "--matrix", m.to_str().unwrap()]))).unwrap();
    assert_eq!(v["sst"], true);
    assert_eq!(v["sti"], true);
    assert_eq!(v["gamma_pass"], true);
    assert_eq!(v["min_gamma"], 1.0);
}

#[test]
fn parse_pwg_prints_normalized_json() {
    let path = data("synthetic-nonsst.pwg");
    let v: Value = serde_json::from_str(&stdout(&cli(&["parse-pwg", path.to_str().unwrap()]))).unwrap();
    assert_eq!(v["n"], 12);
    assert_eq!(v["labels"][1], "Brennan");
    assert_eq!(v["p"][0][4], 0.75);
    assert_eq!(v["p"][4][0], 0.25);
}

#[test]
fn exit_codes() {
    assert_eq!(cli(&[]).status.code(), Some(2));
    assert_eq!(cli(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(cli(&["bounds", "--gap", "0.1"]).status.code(), Some(2));
    assert_eq!(cli(&["validate", "--pwg", "a", "--matrix", "b"]).status.code(), Some(2));

    let missing = cli(&["run", "--config", "/nonexistent/config.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error: "));

    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", &SMALL.replace(r#""k": 2"#, r#""k": 9"#));
    let out = cli(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("params.k"));

    let garbage = write(dir.path(), "x.pwg", "not a file\n");
    assert_eq!(cli(&["parse-pwg", garbage.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(cli(&["bounds", "--gap", "0", "--delta", "0.1", "--k", "1", "--n-grid", "10"]).status.code(), Some(1));
}
