use std::fs;
use std::process::{Command, Output};

fn radproj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radproj")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn count_disk() {
    let out = radproj(&["count", "--rho", "10"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("points 316"), "{}", stdout(&out));
}

#[test]
fn count_superellipse() {
    let out = radproj(&["count", "--body", "superellipsoid k=2", "--rho", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("points 12"), "{}", stdout(&out));
}

#[test]
fn inverted_range_is_a_config_error() {
    let out = radproj(&["converge", "--rho-start", "100", "--rho-stop", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rho-stop"));
}

#[test]
fn unknown_key_is_rejected() {
    let out = radproj(&["count", "--rho", "10", "--set", "colour=red"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_exhaustion_has_its_own_code() {
    let out = radproj(&["count", "--rho", "1e6", "--budget", "1000"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn identity_check_passes() {
    let out = radproj(&["verify-identity", "--f", "cos2", "--density", "cos-bump", "--samples", "200000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("pass"));
}

#[test]
fn theory_table() {
    let out = radproj(&["theory", "--family", "superellipsoid", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("A = 0.75"));
    assert!(text.contains("B = 0.6667"));
    assert!(text.contains("predicted -1.25"));
    let out = radproj(&["theory", "--family", "superellipsoid", "--k", "2", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["predicted"], -1.25);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out_dir = dir.path().join("out");
    fs::write(&cfg, format!("# disk run\nkind = converge\nrho-start = 16\nrho-stop = 64\nout = {}\n", out_dir.display())).unwrap();
    let out = radproj(&["converge", "--config", cfg.to_str().unwrap(), "--rho-stop", "128"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("residuals.csv")).unwrap();
    let last: f64 = csv.lines().last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!(last > 64.0 && last <= 128.0);
    assert!(out_dir.join("run.json").exists());
    assert!(out_dir.join("summary.txt").exists());
}

#[test]
fn bad_config_line_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "kind = converge\nrho-start = 16\nrho-stop = nope\n").unwrap();
    let out = radproj(&["converge", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}
