use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_fxscale");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn grw_analysis_is_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        let out = run_in(tmp.path(), &["analyze", "--grw", "--seed", "42", "--n-ticks", "20000", "--out", name]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = read_dir_sorted(&tmp.path().join("a"));
    let b = read_dir_sorted(&tmp.path().join("b"));
    let names: Vec<_> = a.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["coastline_GRW.csv", "crosscheck_GRW.csv", "fits.csv", "manifest.json", "samples_GRW.csv"]);
    assert_eq!(a, b);

    let manifest: serde_json::Value = serde_json::from_slice(&a[3].1).unwrap();
    assert_eq!(manifest["seed"], 42);
    assert_eq!(manifest["partial"], false);
    assert_eq!(manifest["grids"]["thresholds"]["len"], 250);
    assert_eq!(manifest["grids"]["thresholds"]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn different_seeds_give_different_samples() {
    let tmp = tempfile::tempdir().unwrap();
    for (seed, name) in [("1", "a"), ("2", "b")] {
        let out = run_in(
            tmp.path(),
            &["analyze", "--grw", "--seed", seed, "--n-ticks", "5000", "--laws", "A1", "--out", name],
        );
        assert!(out.status.success());
    }
    let a = fs::read(tmp.path().join("a/samples_GRW.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/samples_GRW.csv")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn grw_table_has_a_single_row_and_no_average() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["analyze", "--grw", "--n-ticks", "20000", "--laws", "dc_count", "--out", "run"]);
    assert!(out.status.success());
    let out = run_in(tmp.path(), &["table", "--input", "run/fits.csv", "--table", "A1", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 2, "{text}");
    assert!(lines[1].starts_with("GRW,"));
}

#[test]
fn table_of_an_unfitted_law_is_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["analyze", "--grw", "--n-ticks", "5000", "--laws", "coastline", "--out", "run"]);
    assert!(out.status.success());
    let out = run_in(tmp.path(), &["table", "--input", "run/fits.csv", "--table", "A3", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 1);
}

#[test]
fn coastline_reports_the_four_default_thresholds() {
    let out = run(&["coastline", "--grw", "--n-ticks", "20000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let rows: Vec<_> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    let thresholds: Vec<&str> = rows.iter().map(|r| r.split(',').nth(1).unwrap()).collect();
    assert_eq!(thresholds, ["0.0001", "0.001", "0.01", "0.05"]);
}

#[test]
fn samples_refit_to_the_same_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["analyze", "--grw", "--n-ticks", "20000", "--laws", "A1,A2,A12", "--out", "run"]);
    assert!(out.status.success());
    let out =
        run_in(tmp.path(), &["fit", "--input", "run/samples_GRW.csv", "--instrument", "GRW", "--out", "refit.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        fs::read_to_string(tmp.path().join("refit.csv")).unwrap(),
        fs::read_to_string(tmp.path().join("run/fits.csv")).unwrap()
    );
}

#[test]
fn crosscheck_emits_the_documented_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["analyze", "--grw", "--n-ticks", "20000", "--out", "run"]);
    assert!(out.status.success());
    let out = run_in(tmp.path(), &["crosscheck", "--input", "run/fits.csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "check,lhs,rhs,rel_error,tolerance,pass");
    assert!(text.lines().any(|l| l.starts_with("count_time_exponent_dc,")));
}

#[test]
fn generated_ticks_ingest_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["grw-gen", "--seed", "7", "--n-ticks", "1000", "--quote-spread", "0.0002", "--out", "g.csv"],
    );
    assert!(out.status.success());
    let out = run_in(tmp.path(), &["ingest", "--input", "g.csv", "--report", "r.json", "--out", "clean.csv"]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["instrument"], "g");
    assert_eq!(report["rows_read"], 1000);
    assert_eq!(report["rows_dropped"], 0);
    assert_eq!(
        fs::read_to_string(tmp.path().join("clean.csv")).unwrap(),
        fs::read_to_string(tmp.path().join("g.csv")).unwrap()
    );
}

#[test]
fn ingest_errors_exit_nonzero_with_the_row() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.csv"), "timestamp,bid,ask\n1,1.0,1.1\n0,1.0,1.1\n").unwrap();
    let out = run_in(tmp.path(), &["ingest", "--input", "bad.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));

    let out = run_in(tmp.path(), &["ingest", "--input", "bad.csv", "--clamp-time"]);
    assert!(out.status.success());

    fs::write(tmp.path().join("text.csv"), "timestamp,bid,ask\n0,abc,1.1\n").unwrap();
    assert_eq!(run_in(tmp.path(), &["ingest", "--input", "text.csv"]).status.code(), Some(1));
    assert_eq!(run_in(tmp.path(), &["ingest", "--input", "missing.csv"]).status.code(), Some(1));
}

#[test]
fn a_failed_instrument_marks_the_run_partial() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.csv"), "timestamp,bid,ask\n1,1.0,1.1\n0,1.0,1.1\n").unwrap();
    let out = run_in(
        tmp.path(),
        &["analyze", "--input", "bad.csv", "--grw", "--n-ticks", "5000", "--laws", "A1", "--out", "run"],
    );
    assert_eq!(out.status.code(), Some(3));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("run/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["partial"], true);
    assert!(tmp.path().join("run/samples_GRW.csv").exists());
}

#[test]
fn event_dump_lists_records_per_threshold() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &[
            "analyze",
            "--grw",
            "--n-ticks",
            "20000",
            "--laws",
            "coastline",
            "--dump-events",
            "0.001,0.002",
            "--out",
            "run",
        ],
    );
    assert!(out.status.success());
    let text = fs::read_to_string(tmp.path().join("run/events_GRW.csv")).unwrap();
    assert!(text.starts_with("threshold,direction,tm_move,dc_move,os_move"));
    let thresholds: std::collections::BTreeSet<&str> =
        text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(thresholds.into_iter().collect::<Vec<_>>(), ["0.001", "0.002"]);
}

#[test]
fn bad_arguments_are_rejected() {
    assert_eq!(run(&["analyze", "--out", "x"]).status.code(), Some(1));
    assert_eq!(run(&["analyze", "--grw", "--spread", "const:-1", "--out", "x"]).status.code(), Some(2));
    assert_eq!(run(&["table", "--input", "x.csv", "--table", "A99"]).status.code(), Some(1));
}
