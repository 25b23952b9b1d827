//! End-to-end runs of the `portopt` binary against the bundled data files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_portopt"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn solve_illustrative_instance() {
    let inst = data("illustrative.csv");
    let cov = data("illustrative_cov.csv");
    let out = run(&[
        "solve",
        "-i",
        inst.to_str().unwrap(),
        "-c",
        cov.to_str().unwrap(),
        "--budget",
        "9000000",
        "--risk",
        "3e-5",
        "--oracle-check",
    ]);
    let text = stdout(&out);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(text.contains("return     11807500"), "{text}");
    assert!(text.contains("proven     true"), "{text}");
    // too many lattice points to enumerate: the oracle declines, not errors
    assert!(text.contains("oracle     skipped"), "{text}");
}

#[test]
fn oracle_check_agrees_on_small_instance() {
    let dir = std::env::temp_dir().join(format!("portopt-oracle-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let inst = dir.join("small.csv");
    let cov = dir.join("small_cov.csv");
    std::fs::write(&inst, "ticker,price,return\naa,7,9\nbb,5,6\n").unwrap();
    std::fs::write(&cov, "0.04,0.01\n0.01,0.09\n").unwrap();
    let out = run(&[
        "solve",
        "-i",
        inst.to_str().unwrap(),
        "-c",
        cov.to_str().unwrap(),
        "--budget",
        "200",
        "--risk",
        "0.02",
        "--oracle-check",
    ]);
    let text = stdout(&out);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(text.contains("oracle     agree"), "{text}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn json_and_trace_outputs() {
    let dir = std::env::temp_dir().join(format!("portopt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let json = dir.join("report.json");
    let trace = dir.join("trace.txt");
    let out = run(&[
        "solve",
        "-i",
        data("illustrative.csv").to_str().unwrap(),
        "-c",
        data("illustrative_cov.csv").to_str().unwrap(),
        "--budget",
        "9000000",
        "--risk",
        "3e-5",
        "--max-cuts",
        "0",
        "--json",
        json.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["optimum"], serde_json::json!([779, 207]));
    assert_eq!(report["return_value"], serde_json::json!(11_807_500));
    assert_eq!(report["proven"], serde_json::json!(true));

    let trace_text = std::fs::read_to_string(&trace).unwrap();
    let actions = ["new", "pruned-bound", "pruned-gap", "feasible-improve", "duplicate"];
    let mut lines = 0;
    for line in trace_text.lines() {
        lines += 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(fields.len(), 4, "bad trace line: {line}");
        assert_eq!(fields[0], "node");
        assert!(
            fields[1].split(',').all(|c| c.parse::<i64>().is_ok()),
            "bad point: {line}"
        );
        let delta = fields[2].strip_prefix("delta1=").expect(line);
        assert!(delta.parse::<i64>().is_ok(), "bad delta1: {line}");
        let action = fields[3].strip_prefix("action=").expect(line);
        assert!(actions.contains(&action), "bad action: {line}");
    }
    assert!(lines >= 4, "expected a non-trivial trace, got {lines} lines");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn border_risk_subcommand() {
    let out = run(&[
        "border-risk",
        "-i",
        data("mixed.csv").to_str().unwrap(),
        "-c",
        data("mixed_cov.csv").to_str().unwrap(),
    ]);
    let text = stdout(&out);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(text.contains("r_b^2"), "{text}");
    assert!(text.contains("assets"), "{text}");
}

#[test]
fn missing_file_is_input_error() {
    let out = run(&[
        "solve",
        "-i",
        "/nonexistent.csv",
        "-c",
        data("illustrative_cov.csv").to_str().unwrap(),
        "--budget",
        "100",
        "--risk",
        "1.0",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_covariance_is_input_error() {
    let dir = std::env::temp_dir().join(format!("portopt-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad_cov.csv");
    std::fs::write(&bad, "1.0,2.0\n3.0\n").unwrap();
    let out = run(&[
        "solve",
        "-i",
        data("illustrative.csv").to_str().unwrap(),
        "-c",
        bad.to_str().unwrap(),
        "--budget",
        "9000000",
        "--risk",
        "3e-5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn scaled_mixed_instance_with_concentrate() {
    let out = run(&[
        "solve",
        "-i",
        data("mixed.csv").to_str().unwrap(),
        "-c",
        data("mixed_cov.csv").to_str().unwrap(),
        "--budget",
        "7500000",
        "--risk",
        "1.52",
        "--max-cuts",
        "0",
        "--max-nodes",
        "50000",
        "--approx-heuristic",
        "concentrate",
    ]);
    let text = stdout(&out);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(text.contains("return     4609700"), "{text}");
}
