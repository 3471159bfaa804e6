//! End-to-end checks of the `pointflux` binary: exit codes, manifest
//! contents, CSV determinism, and plot reformatting.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> PathBuf {
    // integration tests live next to the binary under target/<profile>/
    let mut p = std::env::current_exe().unwrap();
    p.pop();
    if p.ends_with("deps") {
        p.pop();
    }
    p.join("pointflux")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(bin())
        .args(args)
        .env("POINTFLUX_THREADS", "2")
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write_cfg(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("run.cfg");
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn selftest_exits_zero() {
    let dir = tempdir("selftest");
    let (code, stdout, stderr) = run(&["selftest", "--out", dir.to_str().unwrap()]);
    assert_eq!(code, 0, "stdout: {stdout}, stderr: {stderr}");
    assert!(stdout.contains("ok"));
    assert!(dir.join("manifest.json").exists());
}

#[test]
fn malformed_config_exits_one_and_names_the_key() {
    let dir = tempdir("badcfg");
    let cfg = write_cfg(&dir, "sigma = -3\n");
    let (code, _, stderr) = run(&[
        "evolve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(stderr.contains("sigma"), "stderr: {stderr}");

    let cfg = write_cfg(&dir, "not_a_key = 1\n");
    let (code, _, stderr) = run(&[
        "evolve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(stderr.contains("not_a_key"), "stderr: {stderr}");
}

#[test]
fn identical_runs_produce_byte_identical_csv() {
    let d1 = tempdir("det1");
    let d2 = tempdir("det2");
    let cfg = write_cfg(&d1, "grid_r = 2, 5\ngrid_t = 1, 2\nalpha = 1\n");
    for d in [&d1, &d2] {
        let (code, _, stderr) = run(&[
            "evolve",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            d.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "stderr: {stderr}");
    }
    let a = fs::read(d1.join("evolve.csv")).unwrap();
    let b = fs::read(d2.join("evolve.csv")).unwrap();
    assert_eq!(a, b, "evolve.csv differs between identical runs");
}

#[test]
fn manifest_captures_resolved_config_and_artifacts() {
    let dir = tempdir("manifest");
    let cfg = write_cfg(&dir, "alpha = 1\nradii = 4, 8\ngrid_r = 2, 5\ngrid_t = 1, 2\n");
    let (code, _, stderr) = run(&[
        "identity",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "identity");
    assert_eq!(manifest["config"]["alpha"], "1");
    assert_eq!(manifest["config"]["radii"], "4,8");
    assert_eq!(manifest["versions"]["config_schema"], 1);
    assert!(manifest["flags"].as_array().unwrap().is_empty());
    let artifacts = manifest["artifacts"].as_array().unwrap();
    assert!(artifacts.iter().any(|a| a == "identity.csv"));
    // data files carry no timestamps
    let csv = fs::read_to_string(dir.join("identity.csv")).unwrap();
    assert!(csv.starts_with("R,T,lhs_main,rhs_partial,rel_diff\n"));
}

#[test]
fn resonant_divergence_is_flagged_with_exit_two() {
    let dir = tempdir("resonance");
    let cfg = write_cfg(&dir, "preset = exponential\n");
    let (code, _, stderr) = run(&[
        "resonance",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "stderr: {stderr}");
    assert!(stderr.contains("flag:"), "stderr: {stderr}");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert!(!manifest["flags"].as_array().unwrap().is_empty());
    // artifacts are still written on flagged runs
    assert!(dir.join("divergence.csv").exists());
    assert!(dir.join("resonance_summary.json").exists());
}

#[test]
fn plot_reformats_and_rejects_wrong_headers() {
    let dir = tempdir("plot");
    fs::write(
        dir.join("fas_sweep.csv"),
        "R,lhs_truncated,tail_estimate,rhs,rel_error,tail_divergent\n1e1,9e-1,1e-4,1.0,1e-1,false\n",
    )
    .unwrap();
    let (code, _, stderr) = run(&[
        "plot",
        "--input",
        dir.join("fas_sweep.csv").to_str().unwrap(),
        "--kind",
        "fas-convergence",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stderr: {stderr}");
    assert!(dir.join("fas_convergence.dat").exists());
    assert!(dir.join("fas_convergence.gp").exists());

    let (code, _, stderr) = run(&[
        "plot",
        "--input",
        dir.join("fas_sweep.csv").to_str().unwrap(),
        "--kind",
        "flux-vs-time",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(stderr.contains("expected"), "stderr: {stderr}");
}

fn tempdir(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("pointflux_cli_{tag}_{}", std::process::id()));
    fs::create_dir_all(&d).unwrap();
    d
}
