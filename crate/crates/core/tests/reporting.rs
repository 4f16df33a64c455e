use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use kplab::config::{parse_config_str, ExperimentConfig, Format};
use kplab::experiment::{determinism_probe, run_experiment, Command};
use kplab::report::{emit_report, read_report, DiagnosticsReport, Fragment, Table, REPORT_FILE};
use kplab::verdict::{Check, Verdict};
use kplab::{Error, GridSpec, Profile};

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

fn tiny(dir: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig {
        grid: GridSpec::new(32, 32, 4.0 * PI, 4.0 * PI),
        ..ExperimentConfig::default()
    };
    c.solve.t_final = 0.04;
    c.solve.dt = 0.01;
    c.solve.save_every = 1;
    c.output.directory = dir.to_path_buf();
    c
}

#[test]
fn empty_report_writes_only_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let report = DiagnosticsReport::new("solve", "abc");
    let written = emit_report(&report, dir.path(), &[Format::Json, Format::Csv]).unwrap();
    assert!(written.files.is_empty());
    assert_eq!(listing(dir.path()), [REPORT_FILE]);
    assert_eq!(read_report(dir.path()).unwrap(), written);
}

#[test]
fn one_table_gives_one_csv_with_a_hashed_header() {
    let dir = tempfile::tempdir().unwrap();
    let mut report = DiagnosticsReport::new("picard", "0123abcd");
    let mut t = Table::new("picard", &["n", "zeta_sup", "zeta_dissip", "ratio"]);
    t.push(vec![0.0, 1e-6, 2e-6, f64::NAN]);
    t.push(vec![1.0, 1e-8, 2e-8, 0.01]);
    report.tables.push(t);
    report.fragments.push(Fragment::new("picard").with("fitted_ratio", 0.01));
    let written = emit_report(&report, dir.path(), &[Format::Csv]).unwrap();
    assert_eq!(written.files, ["picard.csv"]);
    assert_eq!(listing(dir.path()), ["picard.csv", REPORT_FILE]);

    let text = fs::read_to_string(dir.path().join("picard.csv")).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with(&format!("# run={}", report.run_id)));
    assert!(header.contains("config_hash=0123abcd"));
    assert!(header.ends_with("table=picard"));
    assert_eq!(lines.next(), Some("n,zeta_sup,zeta_dissip,ratio"));
    assert_eq!(lines.next(), Some("0,0.000001,0.000002,"));
    assert_eq!(lines.next(), Some("1,0.00000001,0.00000002,0.01"));

    let back = read_report(dir.path()).unwrap();
    assert!(back.tables[0].rows[0][3].is_nan());
    assert_eq!(back.fragments, report.fragments);
}

#[test]
fn time_series_get_plot_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut report = DiagnosticsReport::new("diagnose", "ff");
    let mut t = Table::new("radii", &["t", "rho_x", "rho_y"]);
    t.push(vec![0.1, 0.5, f64::INFINITY]);
    report.tables.push(t);
    emit_report(&report, dir.path(), &[Format::Json, Format::Csv]).unwrap();
    let plot = fs::read_to_string(dir.path().join("plot_radii_rho_y.csv")).unwrap();
    assert_eq!(plot.lines().skip(1).collect::<Vec<_>>(), ["t,rho_y", "0.1,inf"]);
    assert!(dir.path().join("plot_radii_rho_x.csv").exists());
}

#[test]
fn json_only_skips_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut report = DiagnosticsReport::new("solve", "ff");
    report.tables.push(Table::new("norms", &["t", "h4"]));
    emit_report(&report, dir.path(), &[Format::Json]).unwrap();
    assert_eq!(listing(dir.path()), [REPORT_FILE]);
}

#[test]
fn run_id_depends_on_command_and_hash_only() {
    let a = DiagnosticsReport::new("solve", "h1");
    assert_eq!(a.run_id.len(), 12);
    assert_eq!(a.run_id, DiagnosticsReport::new("solve", "h1").run_id);
    assert_ne!(a.run_id, DiagnosticsReport::new("picard", "h1").run_id);
    assert_ne!(a.run_id, DiagnosticsReport::new("solve", "h2").run_id);
}

#[test]
fn verdict_lines_name_their_criterion() {
    let v = Verdict::new(4, "picard", vec![Check::below("ratio", 0.2, 0.9)]);
    assert!(v.passed);
    assert!(v.line().starts_with("criterion 4"), "{}", v.line());
    assert!(v.line().contains("PASS"));
    let health = Verdict::new(0, "run-health", vec![Check::holds("finite", false)]);
    assert!(health.line().starts_with("check"), "{}", health.line());
    assert!(health.line().contains("FAIL"));
}

#[test]
fn dotted_and_sectioned_configs_agree() {
    let dotted = parse_config_str("grid.nx = 64\nsolve.dt = 0.002\nmodified.deltas = [0.2, 0.1, 0.05]\n").unwrap();
    let sectioned = parse_config_str("[grid]\nnx = 64\n[solve]\ndt = 2e-3\n[modified]\ndeltas = [0.2, 0.1, 0.05]\n").unwrap();
    assert_eq!(dotted, sectioned);
    assert_eq!(dotted.grid.nx, 64);
    assert_eq!(dotted.modified.deltas, [0.2, 0.1, 0.05]);
    assert_eq!(dotted.hash(), sectioned.hash());
    assert_eq!(parse_config_str("").unwrap(), ExperimentConfig::default());
}

#[test]
fn config_errors_name_the_key() {
    let Err(Error::Config(errors)) = parse_config_str("grid.nx = \"big\"\nsolve.dtt = 0.1\ngrid.ly = -1.0\n") else {
        panic!("expected a config error");
    };
    assert_eq!(errors.len(), 3, "{errors:?}");
    assert!(errors.iter().any(|e| e.starts_with("grid.nx: expected an integer")));
    assert!(errors.iter().any(|e| e.starts_with("solve.dtt: unknown key") && e.contains("solve.dt")));
    assert!(errors.iter().any(|e| e.starts_with("grid.ly:")));
}

#[test]
fn hash_ignores_the_output_block() {
    let mut a = ExperimentConfig::default();
    let mut b = a.clone();
    b.output.directory = "elsewhere".into();
    b.output.formats = vec![Format::Json];
    assert_eq!(a.hash(), b.hash());
    a.solve.seed = 9;
    assert_ne!(a.hash(), b.hash());
    assert_eq!(a.hash().len(), 64);
}

#[test]
fn zero_profile_solve_reports_zeros_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = tiny(dir.path());
    c.solve.profile = Profile::Zero;
    let report = run_experiment(&c, Command::Solve).unwrap();
    assert!(report.passed());
    let norms = report.table("norms").unwrap();
    assert_eq!(norms.rows.len(), 5);
    assert!(norms.rows.iter().all(|r| r[1..5].iter().all(|&v| v == 0.0)));
    assert!(dir.path().join("checkpoint/manifest.json").exists());
    let csv = fs::read_to_string(dir.path().join("norms.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains(&c.hash()));
    assert_eq!(read_report(dir.path()).unwrap(), report);
}

#[test]
fn failed_stage_still_leaves_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = tiny(dir.path());
    c.grid = GridSpec::new(16, 16, PI, PI);
    c.solve.profile = Profile::gaussian(0.3);
    c.solve.tail_guard = 1e-300;
    let err = run_experiment(&c, Command::Diagnose).unwrap_err();
    assert!(matches!(err, Error::Stage { ref stage, .. } if stage == "solve"), "{err}");
    let on_disk = read_report(dir.path()).unwrap();
    assert!(on_disk.failed);
    assert!(on_disk.error.as_deref().unwrap().contains("step size floor"));
    assert!(!on_disk.passed());
}

#[test]
fn invalid_config_is_refused_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = tiny(dir.path());
    c.solve.dt = -1.0;
    assert!(matches!(run_experiment(&c, Command::Solve), Err(Error::Config(_))));
    assert!(listing(dir.path()).is_empty());
}

#[test]
fn repeated_diagnose_runs_are_byte_identical() {
    assert!(determinism_probe(3).unwrap());
}
