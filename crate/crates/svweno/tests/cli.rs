//! End-to-end checks of the command-line interface and its file outputs.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_svweno"))
}

#[test]
fn presets_lists_all_problems() {
    let out = bin().arg("presets").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for name in [
        "sin1d",
        "eulersin1d",
        "sod1d",
        "lax1d",
        "shuosher",
        "blast1d",
        "riemann2d1",
        "riemann2d2",
        "doublemach",
    ] {
        assert!(text.contains(name), "missing preset {name} in:\n{text}");
    }
}

#[test]
fn run_writes_expected_files() {
    let dir = std::env::temp_dir().join(format!("svweno_cli_{}", std::process::id()));
    let out = bin()
        .args([
            "run",
            "--problem",
            "sod1d",
            "--order",
            "3",
            "--nsv",
            "20",
            "--tvb-m",
            "10",
            "--tfinal",
            "0.4",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let solution = std::fs::read_to_string(dir.join("solution.csv")).unwrap();
    // one row per CV plus the header
    assert_eq!(solution.lines().count(), 1 + 20 * 3);
    assert!(solution.starts_with("x,cv_width,rho,momx,energy,exact_rho"));
    assert!(dir.join("troubled.csv").exists());
    assert!(dir.join("runlog.jsonl").exists());
    assert!(dir.join("config.json").exists());
    // the config round-trips through serde
    let cfg: svweno::harness::ProblemConfig =
        serde_json::from_str(&std::fs::read_to_string(dir.join("config.json")).unwrap()).unwrap();
    assert_eq!(cfg.n_sv, 20);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn run_2d_writes_field_files() {
    let dir = std::env::temp_dir().join(format!("svweno_cli2d_{}", std::process::id()));
    let out = bin()
        .args([
            "run",
            "--problem",
            "riemann2d1",
            "--nsv",
            "10",
            "--nsv-y",
            "10",
            "--tfinal",
            "0.02",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let field = std::fs::read_to_string(dir.join("field.dat")).unwrap();
    assert!(field.starts_with("# 30 30"));
    assert_eq!(field.lines().count(), 1 + 900);
    let dens = std::fs::read_to_string(dir.join("density.dat")).unwrap();
    assert_eq!(dens.lines().count(), 1 + 30);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn convergence_emits_table() {
    let out = bin()
        .args([
            "convergence",
            "--problem",
            "sin1d",
            "--order",
            "3",
            "--tvb-m",
            "2",
            "--nsv",
            "5,10,20",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("sin1d order 3"), "got:\n{text}");
    assert!(text.lines().count() >= 5);
}

#[test]
fn unknown_preset_fails_with_nonzero_exit() {
    let out = bin()
        .args(["run", "--problem", "nosuchproblem"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown preset"), "stderr: {err}");
}
