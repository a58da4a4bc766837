//! End-to-end tests of the `meandim-lab` binary.

use std::path::Path;
use std::process::{Command, Output};

use meandim_core::cli::ReportDocument;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meandim-lab"))
        .args(args)
        .env_remove("MEANDIM_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_report(dir: &Path) -> ReportDocument {
    let text = std::fs::read_to_string(dir.join("report.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn verify_list_does_not_run() {
    let o = lab(&["verify", "--list"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 10);
    assert!(out.contains("determinism"));
}

#[test]
fn usage_and_config_errors_exit_two() {
    assert_eq!(lab(&[]).status.code(), Some(2));
    assert_eq!(lab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        lab(&["extremal", "--seed", "minus-one"]).status.code(),
        Some(2)
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"seed": 1, "typo_key": true}"#).unwrap();
    let o = lab(&["extremal", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("typo_key"));

    std::fs::write(&bad, r#"{"schema_version": 9}"#).unwrap();
    assert_eq!(
        lab(&["extremal", "--config", bad.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );

    let o = Command::new(env!("CARGO_BIN_EXE_meandim-lab"))
        .args(["widim", "cube"])
        .env("MEANDIM_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_cap_is_accepted() {
    let o = Command::new(env!("CARGO_BIN_EXE_meandim-lab"))
        .args(["widim", "shift"])
        .env("MEANDIM_LAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn help_documents_csv_columns() {
    let o = lab(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    for needle in [
        "df_field: x, y, df",
        "characteristic: r, T, ratio",
        "--config",
        "--seed",
        "MEANDIM_LAB_THREADS",
    ] {
        assert!(out.contains(needle), "missing {needle}");
    }
}

#[test]
fn absurd_tolerance_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("absurd.json");
    std::fs::write(
        &cfg,
        r#"{"quadrature": {"abs_tol": 1e-30, "rel_tol": 1e-30}}"#,
    )
    .unwrap();
    let o = lab(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("criterion 1 ("), "{}", stderr(&o));
}

#[test]
fn extremal_writes_round_trip_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&[
        "extremal",
        "--csv",
        "--json",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = read_report(dir.path());
    assert!(report.passed);
    assert!(!report.stamps.timestamp.is_empty());
    let field = report.tables.iter().find(|t| t.name == "df_field").unwrap();

    let mut reader = csv::Reader::from_path(dir.path().join("extremal_df_field.csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["x", "y", "df"]);
    for (row, record) in field.rows.iter().zip(reader.records()) {
        let record = record.unwrap();
        for (cell, text) in row.iter().zip(record.iter()) {
            let parsed: f64 = text.parse().unwrap();
            assert_eq!(
                serde_json::to_value(cell).unwrap().as_f64().unwrap(),
                parsed
            );
        }
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&[
        "widim",
        "formula",
        "--json",
        "--seed",
        "42",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(read_report(dir.path()).seed, 42);
}

#[test]
fn verify_is_deterministic_across_processes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = lab(&["verify", "--json", "--out", dir.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}\n{}", stdout(&o), stderr(&o));
        assert!(stdout(&o).contains("all 10 criteria passed"));
    }
    let (ra, rb) = (read_report(a.path()), read_report(b.path()));
    assert!(ra.passed);
    assert_eq!(ra.comparable_json(), rb.comparable_json());
}
