use std::fs;
use std::path::Path;
use std::process::Command;

use critnls::grids::{make_radial_grid, Spacing};
use critnls::problem::validate_params;
use critnls::solve::{ground_state_sp, SolverOpts};

fn critnls(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_critnls")).args(args).output().unwrap()
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn sp_prints_value_and_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "model.cfg", "[params]\nN = 3\na = 1\nb = 1\ns = 0.5\nmu = 1\n[grid]\nM = 2000\n");
    let out = dir.path().join("out");
    let res = critnls(&["sp", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    let stdout = String::from_utf8(res.stdout).unwrap();
    let line = stdout.lines().find(|l| l.starts_with("S_p=")).unwrap();
    let printed: f64 = line[4..].parse().unwrap();

    let params = validate_params(3, 1.0, 1.0, 0.5, 1.0).unwrap();
    let grid = make_radial_grid(3, 1e-3, 40.0, 2000, Spacing::Uniform).unwrap();
    let direct = ground_state_sp(&params, &grid, &SolverOpts::default()).unwrap().value;
    assert!((printed - direct).abs() < 1e-10 * direct);

    let csv = fs::read_to_string(out.join("sp_minimizer.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,value"));
    assert_eq!(lines.count(), 2000);
}

#[test]
fn invalid_parameters_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "bad.cfg", "[params]\nb = 0\n");
    let res = critnls(&["threshold", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8(res.stderr).unwrap().contains("b != 0"));
}

#[test]
fn config_and_usage_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "typo.cfg", "[grid]\nrmax = 10\n");
    assert_eq!(critnls(&["sp", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(critnls(&["sp", "--grid-M", "lots"]).status.code(), Some(2));
    assert_eq!(critnls(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(critnls(&["sp", "--config", "/nonexistent/x.cfg"]).status.code(), Some(2));
}

#[test]
fn help_names_every_subcommand() {
    let res = critnls(&["--help"]);
    assert_eq!(res.status.code(), Some(0));
    let text = String::from_utf8(res.stdout).unwrap();
    for cmd in ["sp", "solve", "threshold", "verify", "transform-check"] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
    assert!(text.matches("[anchor:").count() >= 5);
}

#[test]
fn solve_and_threshold_succeed_on_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(critnls(&["solve", "--out", out, "--grid-M", "2000"]).status.code(), Some(0));
    assert_eq!(critnls(&["threshold", "--out", out, "--grid-M", "2000"]).status.code(), Some(0));
    for f in [
        "nehari_solution.csv",
        "mountain_pass_saddle.csv",
        "mountain_pass_path.csv",
        "solve_report.csv",
        "threshold_report.csv",
        "annulus_sweep.csv",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let report = fs::read_to_string(dir.path().join("threshold_report.csv")).unwrap();
    assert!(report.starts_with("quantity,value\nlhs,"));
}

#[test]
fn verify_passes_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let res = critnls(&["verify", "--seed", "7", "--out", out.to_str().unwrap()]);
        assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stdout));
    }
    let ra = fs::read(a.join("verify_report.csv")).unwrap();
    assert_eq!(ra, fs::read(b.join("verify_report.csv")).unwrap());
    assert!(!String::from_utf8(ra).unwrap().contains(",false"));
}

#[test]
fn transform_check_writes_six_records() {
    let dir = tempfile::tempdir().unwrap();
    let res = critnls(&["transform-check", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("transform_check.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn seed_changes_are_reflected_only_through_perturbation() {
    // With zero perturbation the seed is inert, so outputs agree byte for byte.
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (out, seed) in [(&a, "1"), (&b, "2")] {
        let res = critnls(&["sp", "--seed", seed, "--grid-M", "1000", "--out", out.to_str().unwrap()]);
        assert_eq!(res.status.code(), Some(0));
    }
    assert_eq!(
        fs::read(a.join("sp_minimizer.csv")).unwrap(),
        fs::read(b.join("sp_minimizer.csv")).unwrap()
    );
}
