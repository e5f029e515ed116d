//! End-to-end tests of the command-line interface: exit codes, file
//! schemas, and byte-level determinism of the emitted tables.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_workmoments"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

/// Small, fast parameter set shared by the tests.
const QUICK: &[&str] = &["--cycles", "2", "--steps", "1500"];

#[test]
fn moments_with_zero_drive_writes_zero_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "moments",
        "--out",
        dir.path().to_str().unwrap(),
        "--lambda0",
        "0",
        "--cycles",
        "2",
        "--steps",
        "400",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let table = read(&dir.path().join("moments.csv"));
    let mut lines = table.lines();
    assert_eq!(
        lines.next().unwrap(),
        "method,W1,W2,W3_0,corr_C3_sys,corr_cross,corr_SB,W3,stderr1,stderr2,stderr3"
    );
    let row = lines.next().unwrap();
    assert!(row.starts_with("full_numeric,"));
    for cell in row.split(',').skip(1).take(7) {
        let v: f64 = cell.parse().unwrap();
        assert_eq!(v, 0.0, "expected zero moment, got {cell}");
    }
    assert!(table.contains("rwa_regression"));
    assert!(dir.path().join("timeseries.csv").exists());
}

#[test]
fn config_file_is_read_and_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# comment\nlambda0 = 0.03\ncycles = 2\nsteps = 400\n").unwrap();
    let out = run(&[
        "moments",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--lambda0",
        "0",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    // flag override wins: zero drive means zero first moment
    let table = read(&dir.path().join("moments.csv"));
    let row = table.lines().nth(1).unwrap();
    let w1: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(w1, 0.0);
}

#[test]
fn out_of_range_key_exits_one_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "gamma_down = -0.1\n").unwrap();
    let out = run(&["moments", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("gamma_down"), "{}", stderr(&out));
}

#[test]
fn unknown_key_exits_one_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "coupling_strength = 0.1\n").unwrap();
    let out = run(&["moments", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("coupling_strength"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn qjump_writes_histogram_and_optional_records() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "qjump",
        "--out",
        dir.path().to_str().unwrap(),
        "--n-traj",
        "200",
        "--master-seed",
        "7",
        "--dump-records",
    ];
    args.extend_from_slice(QUICK);
    let out = run(&args);
    assert!(out.status.success(), "{}", stderr(&out));

    let hist = read(&dir.path().join("qjump_histogram.csv"));
    assert!(hist.starts_with("work_over_hw0,probability,count\n"));
    let total: f64 = hist
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);

    let records = read(&dir.path().join("qjump_records.csv"));
    assert_eq!(records.lines().count(), 201); // header + one per trajectory
    let row = records.lines().nth(1).unwrap();
    assert_eq!(row.split(',').count(), 5);
}

#[test]
fn compare_passes_at_loose_tolerance_and_reports_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "compare",
        "--out",
        dir.path().to_str().unwrap(),
        "--n-traj",
        "20000",
        "--tolerance",
        "0.05",
    ];
    args.extend_from_slice(QUICK);
    let out = run(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let verdict = read(&dir.path().join("compare.txt"));
    assert!(verdict.starts_with("PASS"), "{verdict}");
    assert!(verdict.trim().lines().count() == 1);
    assert!(dir.path().join("compare.csv").exists());
}

#[test]
fn fdt_scan_is_byte_deterministic() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let scan = |out_dir: &Path| {
        let args = [
            "fdt-scan",
            "--out",
            out_dir.to_str().unwrap(),
            "--steps",
            "500",
            "--cycles",
            "2",
            "--fdt-lambda-count",
            "3",
            "--fdt-gamma-count",
            "2",
            "--fdt-gamma-max",
            "0.02",
        ];
        let out = run(&args);
        assert!(out.status.success(), "{}", stderr(&out));
    };
    scan(dir_a.path());
    scan(dir_b.path());
    let a = read(&dir_a.path().join("fdt.csv"));
    let b = read(&dir_b.path().join("fdt.csv"));
    assert_eq!(a, b, "tables differ between identical runs");
    assert!(a.starts_with("lambda0,gamma_down,ratio,taylor\n"));
    assert_eq!(a.lines().count(), 1 + 6);
}

#[test]
fn oracle_emits_distribution_and_moment_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "oracle",
        "--out",
        dir.path().to_str().unwrap(),
        "--cycles",
        "2",
        "--steps",
        "300",
        "--oracle-steps",
        "300",
        "--n-max",
        "2",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let dist = read(&dir.path().join("oracle_distribution.csv"));
    assert!(dist.starts_with("E0_hw0,Etau_hw0,probability\n"));
    let total: f64 = dist
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-9, "total probability {total}");
    assert!(dir.path().join("oracle_moments.csv").exists());
    assert!(dir.path().join("oracle_gap.csv").exists());
}

#[test]
fn figures_render_from_tables_without_recomputation() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();

    let mut args = vec!["moments", "--out", out_dir];
    args.extend_from_slice(QUICK);
    assert!(run(&args).status.success());

    let out = run(&[
        "fdt-scan",
        "--out",
        out_dir,
        "--steps",
        "400",
        "--cycles",
        "2",
        "--fdt-lambda-count",
        "4",
        "--fdt-gamma-count",
        "3",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));

    let out = run(&["figures", "--out", out_dir]);
    assert!(out.status.success(), "{}", stderr(&out));
    for fig in ["fig1.svg", "fig2.svg", "fig3.svg"] {
        let svg = read(&dir.path().join(fig));
        assert!(svg.starts_with("<svg"), "{fig} is not an svg");
        assert!(svg.ends_with("</svg>\n"));
    }
}

#[test]
fn figures_without_tables_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["figures", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn misaligned_cycles_fail_with_numerical_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "qjump",
        "--out",
        dir.path().to_str().unwrap(),
        "--cycles",
        "2.3",
        "--steps",
        "500",
        "--n-traj",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(
        stderr(&out).contains("instantaneous_basis"),
        "{}",
        stderr(&out)
    );
}
