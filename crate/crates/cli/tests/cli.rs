use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gp-dirichlet"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env("GP_DIRICHLET_THREADS", "2").output().expect("spawn")
}

fn footer(text: &str) -> serde_json::Value {
    let line = text.lines().rev().find_map(|l| l.strip_prefix("# ")).expect("footer");
    serde_json::from_str(line).unwrap()
}

fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn expand_arcsin_first_coefficient() {
    let out = run(&["expand", "--function", "arcsin", "--jmax", "40"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let r = rows(&text);
    assert_eq!(r.len(), 41);
    let b1: f64 = r[1][1].parse().unwrap();
    assert!(b1 > 0.0);
    let b2: f64 = r[2][1].parse().unwrap();
    assert_eq!(b2, 0.0);
}

#[test]
fn expand_monomial_is_single_mode() {
    let out = run(&["expand", "--function", "monomial:1", "--jmax", "6"]);
    assert!(out.status.success());
    let r = rows(&String::from_utf8(out.stdout).unwrap());
    for (j, row) in r.iter().enumerate() {
        let b: f64 = row[1].parse().unwrap();
        let want = if j == 1 { 1.0 } else { 0.0 };
        assert!((b - want).abs() < 1e-12, "B_{j} = {b}");
    }
}

#[test]
fn expand_hypergeometric_decay_near_two() {
    let out = run(&["expand", "--function", "hyp:0.5,0.5,1.5", "--jmax", "120"]);
    assert!(out.status.success());
    let f = footer(&String::from_utf8(out.stdout).unwrap());
    let d = f["fitted_decay"].as_f64().unwrap();
    assert!((d - 2.0).abs() < 0.1, "decay {d}");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["expand", "--function", "arcsin", "--n-max", "5", "--jmax", "10"]).status.code(), Some(2));
    assert_eq!(run(&["expand", "--function", "nope"]).status.code(), Some(64));
    assert_eq!(run(&["besov", "--kernel", "unknown"]).status.code(), Some(64));
    assert_eq!(run(&["besov", "--kernel", "minxy", "--jmax", "6", "--fit", "4:12"]).status.code(), Some(64));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["regularity", "--in", "/nonexistent/x.csv", "--fit", "2:5"]).status.code(), Some(1));
}

fn simulate_to(dir: &Path, name: &str) -> Vec<u8> {
    let p = dir.join(name);
    let out = run(&[
        "simulate", "--kernel", "circle-bm", "--jmax", "6", "--paths", "8", "--seed", "11", "--out",
        p.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read(p).unwrap()
}

#[test]
fn simulate_is_byte_deterministic_and_feeds_regularity() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate_to(dir.path(), "a.csv");
    let b = simulate_to(dir.path(), "b.csv");
    assert_eq!(a, b);
    assert!(dir.path().join("a.points.csv").exists());

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);

    let text = String::from_utf8(a).unwrap();
    let f = footer(&text);
    assert_eq!(f["n_paths"], 8);
    assert_eq!(f["j_max"], 6);
    let band_points: Vec<u64> = f["band_points"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    let rows = rows(&text);
    assert_eq!(rows.len() as u64, 8 * band_points.iter().sum::<u64>());

    let out = run(&["regularity", "--in", dir.path().join("a.csv").to_str().unwrap(), "--fit", "2:6", "--pisier-correct"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["n_paths"], 8);
    assert!(r["fitted_alpha"].as_f64().unwrap().is_finite());
}

#[test]
fn seed_changes_paths() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate_to(dir.path(), "a.csv");
    let p = dir.path().join("c.csv");
    let out = run(&[
        "simulate", "--kernel", "circle-bm", "--jmax", "6", "--paths", "8", "--seed", "12", "--out",
        p.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_ne!(a, std::fs::read(p).unwrap());
}

#[test]
fn besov_minxy_slope() {
    let out = run(&["besov", "--kernel", "minxy", "--jmax", "11"]);
    assert!(out.status.success());
    let f = footer(&String::from_utf8(out.stdout).unwrap());
    let s = f["fitted_s"].as_f64().unwrap();
    assert!((s - 1.0).abs() < 0.2, "s = {s}");
}

#[test]
fn kernel_check_metric_power() {
    let out = run(&["kernel-check", "--kernel", "rho:1", "--space", "circle", "--mode", "nd", "--points", "30", "--t", "1"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["report"]["verdict"], "nd_pass");
    assert_eq!(v["exp_checks"][0]["verdict"], "pd_pass");
}

#[test]
fn report_fast_subset() {
    let out = run(&["report", "--only", "fast"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["all_passed"], true);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.lines().filter(|l| l.starts_with("criterion")).count() >= 3);
}
