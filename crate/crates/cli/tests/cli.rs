use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_conesolve"))
}

fn manifest(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn config(name: &str) -> String {
    manifest(name).display().to_string()
}

#[test]
fn system_example_solves_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    let o = run(&["solve", "--config", &config("examples/system_disk.cfg"), "--h", "0.0625", "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("verdict:   nonzero positive solution"), "{text}");

    let solution = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    let mut lines = solution.lines();
    assert_eq!(lines.next(), Some("x1,x2,u1,u2"));
    let rho = 15.0 * std::f64::consts::PI / 64.0;
    for line in lines {
        let fields: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(fields.len(), 4);
        assert!(fields[2..].iter().all(|&u| u > -1e-10 && u <= rho));
    }
    for name in ["checks.csv", "ranges.csv", "iteration.csv", "certificate.txt"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
}

#[test]
fn csv_values_round_trip() {
    let o = run(&["solve", "--config", &config("examples/system_disk.cfg"), "--h", "0.125", "--csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    for field in row.split(',') {
        let v: f64 = field.parse().unwrap();
        assert_eq!(format!("{v:.16e}"), field);
    }
}

#[test]
fn runs_are_reproducible() {
    let args = ["lambda-range", "--config", &config("examples/system_disk.cfg"), "--h", "0.125", "--csv"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(0));
}

#[test]
fn system_ranges_from_the_cli() {
    let o = run(&["lambda-range", "--config", &config("examples/system_disk.cfg"), "--h", "0.0625"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("lambda1 in (") && text.contains("lambda2 in (0.000000, 5.43"), "{text}");
}

#[test]
fn scalar_range_from_the_cli() {
    let o = run(&["lambda-range", "--config", &config("examples/scalar_disk.cfg"), "--h", "0.0625"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains(", 1.669"), "{}", stdout(&o));
}

#[test]
fn linear_scalar_range_is_empty() {
    let o = run(&["lambda-range", "--config", &config("tests/fixtures/linear.cfg")]);
    assert_eq!(o.status.code(), Some(3), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("EMPTY"));
}

#[test]
fn non_monotone_nonlinearity_fails_condition_a() {
    let o = run(&["solve", "--config", &config("tests/fixtures/nonmonotone.cfg")]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("(a) f1 non-decreasing: FAIL with witness"), "{text}");
    assert!(text.contains("hypothesis (a) fails"), "{text}");
}

#[test]
fn tiny_lambda_outcome_is_classified() {
    // the outcome is whatever the certificate says; only the classification is checked
    let o = run(&["solve", "--config", &config("tests/fixtures/tiny_lambda.cfg")]);
    let code = o.status.code().unwrap();
    assert!([0, 2].contains(&code), "exit {code}: {}{}", stdout(&o), stderr(&o));
    if code == 2 {
        assert!(stdout(&o).contains("no nonzero solution found in bracket"));
    }
}

#[test]
fn spectrum_reports_the_principal_value() {
    let o = run(&["spectrum", "--config", &config("examples/system_disk.cfg"), "--h", "0.0625", "--csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mu1: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("mu1,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!((mu1 - 5.7832).abs() / 5.7832 < 0.01);
}

#[test]
fn usage_and_io_errors_use_high_codes() {
    assert_eq!(run(&["solve"]).status.code(), Some(64));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(run(&["solve", "--config", "/nonexistent/x.cfg"]).status.code(), Some(74));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "domain = disk\nh = 1/8\nwhat = 3\n").unwrap();
    let o = run(&["solve", "--config", &bad.display().to_string()]);
    assert_eq!(o.status.code(), Some(65));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    let o = bin()
        .args(["spectrum", "--config", &config("examples/system_disk.cfg"), "--h", "0.25"])
        .env("CONESOLVE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn verify_lists_and_skips_coarse() {
    let o = run(&["verify", "--list"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 10);

    let o = bin()
        .args(["verify", "--h", "0.25"])
        .env("CONESOLVE_THREADS", "2")
        .output()
        .unwrap();
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with('[')).count(), 10, "{text}");
    assert!(!text.contains("[FAIL]"), "{text}");
    assert_eq!(o.status.code(), Some(0));
}
