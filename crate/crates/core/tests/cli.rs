//! Golden-file and exit-code tests for the `qcgrowth` binary.
//! Set `UPDATE_GOLDEN=1` to rewrite the expected outputs.

use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn qcgrowth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcgrowth")).args(args).output().expect("binary runs")
}

fn check_golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn spectral_fibonacci() {
    let fib = data("fib.json");
    let out = qcgrowth(&["spectral", "--in", &fib, "--tol", "1e-9"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["period"], 1);
    let lo: f64 = v["rho"]["decimal"][0].as_str().unwrap().parse().unwrap();
    let hi: f64 = v["rho"]["decimal"][1].as_str().unwrap().parse().unwrap();
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!(lo <= phi && phi <= hi && hi - lo < 1e-9);
    check_golden("spectral_fib.json", &stdout(&out));
}

#[test]
fn census_csv() {
    let out = qcgrowth(&["census", "--in", &data("fib.json"), "--n-max", "10", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    check_golden("census_fib.csv", &stdout(&out));
}

#[test]
fn stallings_report() {
    let out = qcgrowth(&["stallings", "--rank", "2", "--gens", "abA,bab"]);
    assert_eq!(out.status.code(), Some(0));
    check_golden("stallings_abA_bab.json", &stdout(&out));
    let from_file = qcgrowth(&["stallings", "--in", &data("conjugate_core.json")]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&from_file)).unwrap();
    assert_eq!(v["generators"], serde_json::json!(["abA"]));
}

#[test]
fn verdict_certified() {
    let out = qcgrowth(&["verdict", "--rank", "2", "--gens", "aa,b"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["certified"], true);
    assert_eq!(v["lambda_G"], "3");
    check_golden("verdict_aa_b.json", &stdout(&out));
}

#[test]
fn nonuniform_table() {
    let out = qcgrowth(&["nonuniform", "--kmax", "3", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,degree,girth,lambda_lower,lambda_upper,bound_lower,certified");
    assert_eq!(lines.len(), 4);
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")));
    check_golden("nonuniform_k3_seed7.csv", &text);
}

#[test]
fn gamma_m_automaton() {
    let out = qcgrowth(&["gamma-m", "--gens", "aa,b", "--cofactor", "2"]);
    assert_eq!(out.status.code(), Some(0));
    check_golden("gamma_m_aa_b.json", &stdout(&out));
}

#[test]
fn identical_invocations_are_byte_identical() {
    for args in [
        &["verdict", "--gens", "abAB,bb"][..],
        &["nonuniform", "--kmax", "2", "--seed", "11"],
        &["stallings", "--gens", "ab,ba,aab"],
    ] {
        let a = qcgrowth(args);
        let b = qcgrowth(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
}

#[test]
fn input_errors_exit_one() {
    let out = qcgrowth(&["spectral", "--in", &data("truncated.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("truncated.json:5:"), "{}", stderr(&out));

    let out = qcgrowth(&["spectral", "--in", &data("nondeterministic.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("state 0"));

    let out = qcgrowth(&["verdict", "--gens", "ab,aA"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("generator 2 `aA`"), "{}", stderr(&out));

    let out = qcgrowth(&["verdict", "--gens", "a,b"]);
    assert_eq!(out.status.code(), Some(1));

    let out = qcgrowth(&["spectral", "--in", &data("missing.json")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn attempt_cap_exits_two() {
    let out = qcgrowth(&["nonuniform", "--kmax", "1", "--attempts", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("attempt cap"));
}
