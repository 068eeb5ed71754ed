use std::path::Path;
use std::process::{Command, Output};

use diabatic::{Model, Settings};
use diabatic_cli::commands::{AdiabaticityOutput, CompositeReport, GateReport, ScalingReport};
use diabatic_cli::config::{Format, Range, RunConfig};
use diabatic_cli::table::{read_csv, Annotation, SweepRow, SweepTable};
use diabatic_cli::OUT_DIR_ENV;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_diabatic"))
        .env_remove(OUT_DIR_ENV)
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn read_json<T: for<'de> serde::Deserialize<'de>>(path: &Path) -> T {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn sweep_config(dir: &Path, format: Format) -> RunConfig {
    RunConfig {
        v_min: 0.05,
        v_max: 0.4,
        nv: Some(15),
        out_dir: dir.to_path_buf(),
        format,
        ..RunConfig::default()
    }
}

fn expected_sweep(cfg: &RunConfig) -> SweepTable {
    let b = Range {
        min: 0.0,
        max: 0.0,
        points: 1,
    };
    SweepTable::evaluate(cfg, &Model::default(), &Settings::default(), &cfg.v_range(500), &b)
}

#[test]
fn sweep_v_json_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["sweep-v", "--v-min", "0.05", "--v-max", "0.4", "--points", "15"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let back = SweepTable::read_json(&dir.path().join("sweep-v.json")).unwrap();
    assert_eq!(back, expected_sweep(&sweep_config(dir.path(), Format::Json)));
    assert_eq!(back.rows.len(), 15);
    assert!(back.rows.windows(2).all(|w| w[0].v < w[1].v));
}

#[test]
fn sweep_v_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["--format", "csv", "sweep-v", "--v-min", "0.05", "--v-max", "0.4", "--points", "15"],
    );
    assert_eq!(code(&out), 0);
    let rows: Vec<SweepRow> = read_csv(&dir.path().join("sweep-v.csv")).unwrap();
    let expected = expected_sweep(&sweep_config(dir.path(), Format::Csv)).rows;
    assert_eq!(rows.len(), expected.len());
    for (a, b) in rows.iter().zip(&expected) {
        let pairs = [
            (a.transition_probability, b.transition_probability),
            (a.half_p, b.half_p),
            (a.eta, b.eta),
            (a.alpha00, b.alpha00),
            (a.d_max_ix, b.d_max_ix),
            (a.d_max_tphased, b.d_max_tphased),
        ];
        for (x, y) in pairs {
            let (x, y) = (x.unwrap(), y.unwrap());
            assert!((x - y).abs() <= 1e-15 * y.abs(), "{x} vs {y}");
        }
    }
}

#[test]
fn sweep_grid_emits_annotations_separately() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["--format", "csv", "--grid", "6x4", "sweep-grid", "--v-min", "0.005", "--v-max", "0.3", "--b-max", "0.3"],
    );
    assert_eq!(code(&out), 0);
    let rows: Vec<SweepRow> = read_csv(&dir.path().join("sweep-grid.csv")).unwrap();
    assert_eq!(rows.len(), 24);
    assert!(rows.windows(2).all(|w| (w[0].v, w[0].b) < (w[1].v, w[1].b)));
    // Slow passages barely leave the lower state at every b.
    for r in rows.iter().filter(|r| r.v == 0.005) {
        assert!(r.half_p.unwrap() < 0.05, "{r:?}");
    }
    let ann: Vec<Annotation> = read_csv(&dir.path().join("sweep-grid.annotations.csv")).unwrap();
    let not = ann.iter().find(|a| a.label == "not").unwrap();
    assert!((not.half_p.unwrap() - 0.5).abs() < 0.05);
    let h = ann.iter().find(|a| a.label == "hadamard").unwrap();
    assert!((h.half_p.unwrap() - 0.5).abs() < 0.05);
}

#[test]
fn synthesize_not_meets_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--grid", "40x1", "synthesize", "not"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let r: GateReport = read_json(&dir.path().join("synthesize-not.json"));
    assert!((r.v - 0.2547).abs() <= 0.005);
    assert!(r.gate_error.d_max <= 1e-4);
    assert!(r.passed);
    assert_eq!(r.config.threshold, 1e-4);
    assert!(!r.search.unwrap().trace.is_empty());
}

#[test]
fn synthesize_cnot_reports_the_register() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--grid", "40x1", "synthesize", "cnot"]);
    assert_eq!(code(&out), 0);
    let r: GateReport = read_json(&dir.path().join("synthesize-cnot.json"));
    let e = r.embedded.unwrap();
    assert_eq!(e.full_unitary.dim(), 4);
    assert_eq!(e.complement_deviation, 0.0);
    assert!((e.block_error.d_max - r.gate_error.d_max).abs() < 1e-6);
    // The i phase on the block is physical relative to the identity part.
    assert!(e.ideal_error.d_max > 1.0);
}

#[test]
fn threshold_miss_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["report", "hadamard", "--v", "0.2249", "--b", "0.2677"]);
    assert_eq!(code(&out), 1);
    let r: GateReport = read_json(&dir.path().join("report-hadamard.json"));
    assert!(!r.passed);
    let ok = run(dir.path(), &["report", "hadamard", "--v", "0.2677", "--b", "0.2249"]);
    assert_eq!(code(&ok), 0);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "rel_tol = 1e-9\nspeed = 3\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["--config", cfg.to_str().unwrap(), "sweep-v"],
        vec!["synthesize", "swap"],
        vec!["--grid", "12", "sweep-grid"],
        vec!["--format", "xml", "sweep-v"],
        vec!["adiabaticity", "--v", "0.1"],
        vec!["adiabaticity", "--v", "-0.1", "--b", "0"],
        vec!["--rel-tol", "0", "sweep-v"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let out = run(dir.path(), &args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn numerical_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# starve the integrator\nmax_steps = 10\n").unwrap();
    let out = run(dir.path(), &["--config", cfg.to_str().unwrap(), "report", "not", "--v", "0.2547", "--b", "0"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn failed_sweep_rows_are_flagged_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "max_steps = 400\nv_min = 0.02\nv_max = 0.9\nnv = 8\n").unwrap();
    let out = run(dir.path(), &["--config", cfg.to_str().unwrap(), "sweep-v"]);
    assert_eq!(code(&out), 0);
    let t = SweepTable::read_json(&dir.path().join("sweep-v.json")).unwrap();
    assert_eq!(t.rows.len(), 8);
    assert!(t.failed_rows() > 0);
    assert!(t.rows.iter().any(|r| r.is_ok()));
    assert!(t.rows.iter().filter(|r| !r.is_ok()).all(|r| r.half_p.is_none()));
}

#[test]
fn out_dir_comes_from_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let base = || {
        let mut c = Command::new(env!("CARGO_BIN_EXE_diabatic"));
        c.env(OUT_DIR_ENV, env_dir.path());
        c
    };
    let out = base().args(["adiabaticity", "--v", "0.005", "--b", "0"]).output().unwrap();
    assert_eq!(code(&out), 0);
    assert!(env_dir.path().join("adiabaticity.json").exists());
    let out = base()
        .arg("--out")
        .arg(flag_dir.path())
        .args(["adiabaticity", "--v", "0.005", "--b", "0"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(flag_dir.path().join("adiabaticity.json").exists());
}

#[test]
fn adiabaticity_regimes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(dir.path(), &["adiabaticity", "--v", "0.005", "--b", "0"])), 0);
    let slow: AdiabaticityOutput = read_json(&dir.path().join("adiabaticity.json"));
    assert!(slow.is_adiabatic && slow.report.massey_xi > 5.0);
    assert!((slow.report.delta_e_min - 2f64.sqrt() / 8.0).abs() < 1e-12);
    assert_eq!(code(&run(dir.path(), &["adiabaticity", "--v", "0.2547", "--b", "0"])), 0);
    let fast: AdiabaticityOutput = read_json(&dir.path().join("adiabaticity.json"));
    assert!(!fast.is_adiabatic);
    assert!(fast.report.massey_xi > 0.1 && fast.report.massey_xi < 1.0);
}

#[test]
fn error_scaling_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--format", "csv", "error-scaling", "not", "--axis", "v"]);
    assert_eq!(code(&out), 0);
    let r: ScalingReport = read_json(&dir.path().join("error-scaling-not-v.json"));
    assert!((r.fit.slope - 2.0).abs() < 0.1);
    assert!(r.fit.prefactor > 40.0 / 3.0 && r.fit.prefactor < 120.0);
    let text = std::fs::read_to_string(dir.path().join("error-scaling-not-v.json")).unwrap();
    let again: ScalingReport = serde_json::from_str(&text).unwrap();
    assert_eq!(again, r);
    let pts = std::fs::read_to_string(dir.path().join("error-scaling-not-v.csv")).unwrap();
    assert!(pts.starts_with("eps,d_max\n"));
    assert_eq!(pts.lines().count(), 1 + r.fit.eps.len());
}

#[test]
fn compose_y_from_z_and_not() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["compose", "z", "not", "--expect", "Y", "--nominal", "--threshold", "1e-3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let r: CompositeReport = read_json(&dir.path().join("compose-z-not.json"));
    assert_eq!(r.components[0].gate, "z");
    assert!(r.passed);
}
