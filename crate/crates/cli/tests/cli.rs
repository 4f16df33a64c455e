use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kplab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kplab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("KPLAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn config_hash(dir: &Path) -> String {
    let text = fs::read_to_string(dir.join("report.json")).unwrap();
    let start = text.find("\"config_hash\": \"").expect("hash field") + 16;
    text[start..start + 64].to_string()
}

#[test]
fn commutator_check_passes_and_writes_its_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = kplab(&["commutator-check"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("criterion 7") && l.contains("PASS")), "{stdout}");
    assert!(stdout.contains("report.json"));
    let csv = fs::read_to_string(dir.path().join("commutator.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("k,eta,dt,residual"));
}

#[test]
fn quiet_run_prints_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = kplab(&["commutator-check", "--quiet"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn unknown_key_exits_two_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "solve.dtt = 0.1\n").unwrap();
    let out = kplab(&["solve", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("solve.dtt") && stderr.contains("solve.dt\""), "{stderr}");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn missing_config_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = kplab(&["solve", "--config", "/nonexistent/kplab.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_workers_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_kplab"))
        .args(["commutator-check", "--out"])
        .arg(dir.path())
        .env("KPLAB_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("KPLAB_WORKERS"));
}

#[test]
fn seed_enters_the_config_hash() {
    let base = tempfile::tempdir().unwrap();
    let run = |seed: &str, name: &str| {
        let dir = base.path().join(name);
        let out = kplab(&["commutator-check", "--quiet", "--seed", seed], &dir);
        assert_eq!(out.status.code(), Some(0));
        config_hash(&dir)
    };
    let a = run("1", "a");
    assert_eq!(a, run("1", "b"));
    assert_ne!(a, run("2", "c"));
}

#[test]
fn failing_verdict_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.toml");
    // Far too coarse a difference width for the commutator residual bound.
    fs::write(&cfg, "commutator.t = 0.5\ncommutator.dt = 0.2\ncommutator.k_max = 1\n").unwrap();
    let out = kplab(&["commutator-check", "--config", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}
