//! End-to-end tests of the command-line interface: exit codes, report
//! shape, and byte-determinism of the sweep table.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_hypforce")
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

const LIGHT_SAMPLING: &str = "
[sampling]
tube_points = 7
base_points = 2
offsets_per_unit = 2.0
ode_step = 5e-3
richardson_tol = 1e-6
radial_samples = 3
curvature_points = 2
planes_per_point = 1
";

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, format!("{body}\n{LIGHT_SAMPLING}")).unwrap();
    path
}

#[test]
fn bounds_run_passes_and_echoes_config() {
    let dir = tmp("bounds");
    let out = run(&["bounds", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.join("bounds.json")).unwrap();
    assert!(report.contains("\"config\""));
    assert!(report.contains("\"result\""));
    assert!(report.contains("\"closeness_constant\""));
    // The echoed configuration includes the resolved defaults.
    assert!(report.contains("\"tube_points\": 17"));
}

#[test]
fn verify_not_certified_exits_one() {
    let dir = tmp("tight");
    let config = write_config(
        &dir,
        "tight.toml",
        "[metric]\ndim = 2\n\n[verify]\neps = 1e-12\noffset_lo = 12.0\noffset_hi = 12.2",
    );
    let out = run(&["verify", "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("not certified"));
}

#[test]
fn constraint_violation_exits_two_naming_the_rule() {
    let dir = tmp("narrow");
    let config = write_config(&dir, "narrow.toml", "[force]\nr0 = 12.0\nd = 1.0");
    let out = run(&["force", "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("4(1+xi)"));
}

#[test]
fn config_problems_exit_two() {
    let out = run(&["verify", "--config", "/nonexistent/config.toml"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tmp("badkey");
    let config = dir.join("bad.toml");
    std::fs::write(&config, "[metric]\nnot_a_key = 1\n").unwrap();
    let out = run(&["verify", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("configuration"));
}

#[test]
fn usage_errors_exit_two() {
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["verify", "--grid-scale", "-1", "--out", tmp("gs").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_three() {
    let out = run(&["bounds", "--out", "/proc/no-such-dir/out"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sweep_reruns_are_byte_identical() {
    let dir = tmp("sweep-det");
    let config = write_config(
        &dir,
        "sweep.toml",
        "[metric]\ndim = 2\nkind = \"conformal\"\namplitude = 0.01\npoly = [{ coeff = 1.0, powers = [2, 0] }]\n\n[sweep]\ndims = [2]\nxis = [0.0]\nr0s = [12.0]\nds = [4.0]",
    );
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out_dir in [&out_a, &out_b] {
        let out = run(&[
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(out_a.join("sweep.csv")).unwrap();
    let b = std::fs::read(out_b.join("sweep.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("n, xi, r0, d, eps_in, eta_measured, eta_bound, pass\n"));
    assert_eq!(text.lines().count(), 2);
    // The JSON report echoes the resolved output directory, so reruns are
    // compared within one directory.
    let first = std::fs::read(out_a.join("sweep.json")).unwrap();
    let out = run(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_a.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let second = std::fs::read(out_a.join("sweep.json")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn curvature_flags_a_perturbed_surface() {
    let dir = tmp("curv-fail");
    let config = write_config(
        &dir,
        "curv.toml",
        "[metric]\ndim = 2\nkind = \"conformal\"\namplitude = 0.02\npoly = [{ coeff = 1.0, powers = [2, 0] }]\n\n[metric.profile]\ncenter = 2.5\nwidth = 1.0",
    );
    let out = run(&["curvature", "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    // The perturbation sits inside the default curvature window, so the
    // unforced surface is not certified.
    assert_eq!(out.status.code(), Some(1), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.join("curvature.json")).unwrap();
    assert!(report.contains("\"max_deviation\""));
}

#[test]
fn family_run_converges_on_the_default_metric() {
    let dir = tmp("family-cli");
    let config = write_config(&dir, "family.toml", "");
    let out = run(&["family", "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.join("family.json")).unwrap();
    assert!(report.contains("\"converged\": true"));
}

#[test]
fn flag_overrides_are_applied_and_echoed_in_the_report() {
    let dir = tmp("seed");
    let config = write_config(
        &dir,
        "seed.toml",
        "[metric]\ndim = 2\n\n[verify]\neps = 0.5\noffset_lo = 12.0\noffset_hi = 12.2",
    );
    let out = run(&[
        "verify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--seed",
        "99",
        "--grid-scale",
        "1.5",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.join("verify.json")).unwrap();
    assert!(report.contains("\"seed\": 99"));
    assert!(report.contains("\"grid_scale\": 1.5"));
}
