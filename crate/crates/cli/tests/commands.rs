use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn exe() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_locdisc"));
    c.env_remove("LOCDISC_OUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    exe().args(args).output().unwrap()
}

/// Column-name row and data rows of a CSV table on stdout.
fn table(out: &Output) -> (Vec<String>, Vec<Vec<String>>) {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let cols = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (cols, rows)
}

fn num(rows: &[Vec<String>], cols: &[String], r: usize, name: &str) -> f64 {
    let c = cols.iter().position(|c| c == name).unwrap();
    rows[r][c].parse().unwrap()
}

#[test]
fn tradeoff_rows() {
    let out = run(&["tradeoff", "--n", "2"]);
    let (cols, rows) = table(&out);
    let last = rows.len() - 1;
    assert_eq!(num(&rows, &cols, last, "delta"), 1.0);
    assert!((num(&rows, &cols, last, "ps_n") - 0.5).abs() < 1e-12);
    assert!((num(&rows, &cols, last, "chsh_bound") - 0.853553).abs() < 1e-6);

    let (cols, rows) = table(&run(&["tradeoff", "--n", "4", "--delta-grid", "0"]));
    assert!((num(&rows, &cols, 0, "chsh_bound") - 0.5).abs() < 1e-12);

    // N=3 crosses the classical value 0.75 near δ ≈ 0.5607
    let (cols, rows) = table(&run(&["tradeoff", "--n", "3", "--delta-grid", "0.55:0.02:0.57"]));
    assert!(num(&rows, &cols, 0, "chsh_bound") < 0.75);
    assert!(num(&rows, &cols, 1, "chsh_bound") > 0.75);
}

#[test]
fn tradeoff_with_seesaw_stays_below_bound() {
    let (cols, rows) = table(&run(&["tradeoff", "--n", "3", "--delta-grid", "0:0.5:1", "--seesaw", "--restarts", "5"]));
    for r in 0..rows.len() {
        assert!(num(&rows, &cols, r, "seesaw_gap") <= 1e-8);
    }
}

#[test]
fn region_rows() {
    let (cols, rows) = table(&run(&["region", "--delta", "0.8", "--po-grid", "0:0.8:0.8"]));
    assert_eq!(rows.len(), 2);
    for (r, want) in [(0, 0.8), (1, 0.2)] {
        assert!((num(&rows, &cols, r, "local_bound") - want).abs() < 1e-6);
        assert!((num(&rows, &cols, r, "global_bound") - want).abs() < 1e-6);
        assert_eq!(rows[r][cols.iter().position(|c| c == "solver_status").unwrap()], "optimal");
    }
}

#[test]
fn bound_tables() {
    let (cols, rows) = table(&run(&["fidelity", "--n", "3", "--delta-grid", "0"]));
    assert!((num(&rows, &cols, 0, "ps_n") - 1.0).abs() < 1e-12);
    assert!((num(&rows, &cols, 0, "fidelity_bound") - 1.0 / 3.0).abs() < 1e-12);

    let (cols, rows) = table(&run(&["energy", "--n", "2", "--delta-grid", "0.5"]));
    assert!((num(&rows, &cols, 0, "alpha") - 0.25).abs() < 1e-12);
    assert!((num(&rows, &cols, 0, "ps_from_energy") - num(&rows, &cols, 0, "ps_n")).abs() < 1e-12);

    let (cols, rows) = table(&run(&["visibility", "--delta-grid", "1"]));
    assert!((num(&rows, &cols, 0, "nu_c") - 0.707107).abs() < 1e-6);
    assert!((num(&rows, &cols, 0, "p_inc_threshold") - 0.707107).abs() < 1e-6);
}

#[test]
fn seesaw_best_value() {
    let out = run(&["seesaw", "--delta", "0.5", "--format", "json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let best: f64 = v["header"]["notes"]["best_value"].as_str().unwrap().parse().unwrap();
    assert!((best - 0.779508).abs() < 1e-4);
    assert_eq!(v["header"]["seed"], 0);
    assert_eq!(v["columns"][2], "value");
}

#[test]
fn config_errors_exit_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let p = path.to_str().unwrap();
    for args in [
        vec!["region", "--po-grid", "0.5:0.1:0.2", "--out", p],
        vec!["seesaw", "--restarts", "0", "--out", p],
        vec!["tradeoff", "--n", "5", "--out", p],
        vec!["fidelity", "--delta-grid", "0:0.1:2", "--out", p],
        vec!["tradeoff", "--bogus"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!path.exists(), "{args:?} wrote a file");
    }
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = exe()
        .env("LOCDISC_OUT_DIR", dir.path())
        .args(["visibility", "--delta-grid", "0:0.5:1", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(dir.path().join("visibility.json")).unwrap();
    let v: Value = serde_json::from_str(&written).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert!(!Path::new(&dir.path().join("visibility.csv")).exists());
}

#[test]
fn header_records_parameters() {
    let out = run(&["tradeoff", "--n", "3", "--delta-grid", "0:0.5:1", "--seed", "9"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# locdisc "));
    assert!(text.contains("# command: tradeoff\n"));
    assert!(text.contains("# param n: 3\n"));
    assert!(text.contains("# param delta_grid: 0:0.5:1\n"));
    assert!(text.contains("# seed: 9\n"));
}
