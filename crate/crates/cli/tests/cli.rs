use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn tauber(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tauber")).args(args).output().expect("spawn tauber")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_op(dir: &TempDir, name: &str, json: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ladder_json(n: usize) -> String {
    let eig: Vec<String> = (1..=n).map(|j| format!("[{},0]", 1.0 - j as f64 / n as f64)).collect();
    format!(r#"{{"variant":"diagonal","eigenvalues":[{}]}}"#, eig.join(","))
}

#[test]
fn profile_of_half_diagonal_at_zero_is_two() {
    let dir = TempDir::new().unwrap();
    let op = write_op(&dir, "d.json", r#"{"variant":"diagonal","eigenvalues":[[0.5,0]]}"#);
    let o = tauber(&["operator", "profile", "--op", s(&op), "--theta", "0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    let row = out.lines().nth(1).unwrap();
    let v: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((v - 2.0).abs() < 1e-12, "{out}");
}

#[test]
fn ladder_certifies() {
    let dir = TempDir::new().unwrap();
    let op = write_op(&dir, "ladder.json", &ladder_json(10_000));
    let report = dir.path().join("report.json");
    let o = tauber(&["certify", "--op", s(&op), "--out", s(&report)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("verdict: certified"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["verdict"], "certified");
    let csv = std::fs::read_to_string(report.with_extension("csv")).unwrap();
    assert!(csv.starts_with("n,d_n,predicted,ratio\n"));
}

#[test]
fn spectral_curve_certifies() {
    let dir = TempDir::new().unwrap();
    let op = write_op(&dir, "sc.json", r#"{"variant":"spectral_curve","alpha":2,"n":2000}"#);
    let o = tauber(&["certify", "--op", s(&op), "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("n,d_n,predicted,ratio"));
}

#[test]
fn ones_is_refused() {
    let o = tauber(&["certify", "--seq", "ones"]);
    assert_eq!(code(&o), 6);
    assert!(stderr(&o).contains("partial sums unbounded"), "{}", stderr(&o));
}

#[test]
fn alternating_is_refused_for_its_singularity() {
    let o = tauber(&["certify", "--seq", "alternating"]);
    assert_eq!(code(&o), 6);
    assert!(stderr(&o).contains("singularity"), "{}", stderr(&o));
}

#[test]
fn jordan_block_is_refused() {
    let dir = TempDir::new().unwrap();
    let op = write_op(&dir, "j.json", r#"{"variant":"dense","entries":[[[1,0],[1,0]],[[0,0],[1,0]]]}"#);
    let o = tauber(&["certify", "--op", s(&op)]);
    assert_eq!(code(&o), 6);
    assert!(stderr(&o).contains("power-bounded"));
}

#[test]
fn verdict_exit_codes() {
    let dir = TempDir::new().unwrap();
    let op = write_op(&dir, "sc.json", r#"{"variant":"spectral_curve","alpha":2,"n":2000}"#);
    let coarse = tauber(&["certify", "--op", s(&op), "--grid", "3", "--theta-min", "0.5"]);
    assert_eq!(code(&coarse), 4, "{}", stderr(&coarse));
    assert!(stderr(&coarse).contains("verdict: violated"));
    let tiny_c = tauber(&["certify", "--op", s(&op), "--c", "1e-6"]);
    assert_eq!(code(&tiny_c), 5);
    assert!(stderr(&tiny_c).contains("verdict: pre-asymptotic"));
    let short = tauber(&["certify", "--op", s(&op), "--hypothesis-window", "20"]);
    assert_eq!(code(&short), 5);
    assert!(stderr(&short).contains("verdict: certified"));
}

#[test]
fn geometric_sequence_certifies() {
    let o = tauber(&["certify", "--seq", "geometric:0.5,0.2"]);
    let c = code(&o);
    assert!(c == 0 || c == 5, "{c}: {}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_ne!(v["verdict"], "violated");
}

#[test]
fn singular_profile_exits_three() {
    let dir = TempDir::new().unwrap();
    let op = write_op(&dir, "one.json", r#"{"variant":"diagonal","eigenvalues":[[1,0]],"allow_one":true}"#);
    let o = tauber(&["operator", "profile", "--op", s(&op), "--theta", "0"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("theta = 0"));
}

#[test]
fn scan_flags_near_minus_one() {
    let dir = TempDir::new().unwrap();
    let op = write_op(&dir, "m.json", r#"{"variant":"diagonal","eigenvalues":[[-0.999999,0]]}"#);
    let o = tauber(&["operator", "scan", "--op", s(&op), "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let flagged = v["flagged"].as_array().unwrap();
    assert!(!flagged.is_empty());
    for t in flagged {
        assert!(t.as_f64().unwrap().abs() > 2.5);
    }
}

#[test]
fn decay_rows() {
    let dir = TempDir::new().unwrap();
    let op = write_op(&dir, "d.json", r#"{"variant":"diagonal","eigenvalues":[[0.5,0]]}"#);
    let o = tauber(&["operator", "decay", "--op", s(&op), "--n-max", "3"]);
    assert_eq!(code(&o), 0);
    let rows: Vec<f64> = stdout(&o).lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(rows, vec![0.5, 0.25, 0.125, 0.0625]);
}

#[test]
fn rates_round_trip() {
    let o = tauber(&["rates", "invert", "--rate", "poly:2,1.5", "--kind", "mlog", "--y", "10,1e6"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    for line in stdout(&o).lines().skip(1) {
        let c: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((c[2] - c[0]).abs() <= 1e-9 * c[0], "{line}");
    }
    let e = tauber(&["rates", "eval", "--rate", "poly:1,1", "--eps", "pi/4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&e)).unwrap();
    assert!((v[0]["m"].as_f64().unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn schedule_marks_pre_asymptotic_cells() {
    let o = tauber(&["rates", "schedule", "--rate", "poly:1,1", "--c", "0.1", "--n", "1,1000"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[1].ends_with(",,"), "{}", lines[1]);
    assert!(!lines[2].ends_with(','));
}

#[test]
fn input_errors_exit_two() {
    for args in [
        vec!["rates", "eval", "--rate", "poly:1,1", "--eps", "4"],
        vec!["rates", "eval", "--rate", "poly:0.5,1", "--eps", "1"],
        vec!["rates", "eval", "--rate", "nope", "--eps", "1"],
        vec!["certify", "--seq", "fib"],
        vec!["certify", "--seq", "ones", "--calib", "9:3"],
        vec!["operator", "decay", "--op", "/nonexistent.json"],
        vec!["kernel", "selftest", "--eps", "pi"],
        vec!["kernel", "selftest", "--identity", "nope"],
        vec!["kernel", "selftest", "--identity", "coeff-bounds", "--n", "101", "--k", "3"],
        vec!["no-such-command"],
    ] {
        let o = tauber(&args);
        assert_eq!(code(&o), 2, "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn selftest_and_coefficient_bounds() {
    let o = tauber(&["kernel", "selftest", "--identity", "coeff-bounds", "--n", "10", "--k", "5"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["bounds_ok"], true);
    let phi = tauber(&["kernel", "selftest", "--identity", "phi-identity", "--eps", "pi/4,pi/8"]);
    assert_eq!(code(&phi), 0, "{}", stderr(&phi));
    let v: serde_json::Value = serde_json::from_str(&stdout(&phi)).unwrap();
    assert_eq!(v["identities"].as_array().unwrap().len(), 1);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let op = write_op(&dir, "sc.json", r#"{"variant":"spectral_curve","alpha":1.5,"n":300}"#);
    let runs: [&[&str]; 3] =
        [&["certify", "--op", s(&op)], &["operator", "profile", "--op", s(&op), "--format", "json"], &["kernel", "selftest", "--eps", "pi/4"]];
    for args in runs {
        let a = tauber(args);
        let b = tauber(args);
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
