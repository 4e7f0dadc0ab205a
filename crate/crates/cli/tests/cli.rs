use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn cylset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cylset"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn eval_prints_the_full_square() {
    let o = cylset(&[
        "eval",
        "--unit",
        &data("sq22.json"),
        "--term",
        "c0 -d01",
        "--assign",
        "x0=[0]",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "{<0,0>, <0,1>, <1,0>, <1,1>}");

    let o = cylset(&[
        "eval",
        "--json",
        "--unit",
        &data("sq22.json"),
        "--term=-d01",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["positions"], serde_json::json!([1, 2]));
}

#[test]
fn classify_non_diagonalizable_unit() {
    let o = cylset(&["classify", "--unit", &data("notdiag.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), r#"["Crs"]"#);
}

#[test]
fn failed_checks_exit_one() {
    let o = cylset(&["check-axioms", "--unit", &data("ca4.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("CA4"));
    let o = cylset(&["check-eqs", "--unit", &data("ca4.json")]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn usage_and_input_errors_exit_two() {
    assert_eq!(
        cylset(&["parse", "--term", "x0 . ("]).status.code(),
        Some(2)
    );
    assert_eq!(
        cylset(&["classify", "--unit", "/nonexistent.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cylset(&["eval", "--unit", &data("sq22.json"), "--term", "c5 x0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(cylset(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn split_certificate_reverifies() {
    for class in ["d", "crs"] {
        let o = cylset(&[
            "split",
            "--json",
            "--unit",
            &data("sq22.json"),
            "--term",
            "x0",
            "--assign",
            "x0=[0,1,2,3]",
            "--class",
            class,
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        let cert = cylset::constructions::SplitCertificate::from_json(stdout(&o).trim()).unwrap();
        cert.verify().unwrap();
    }
}

#[test]
fn replicate_all_passes_and_is_worker_independent() {
    let one = cylset(&[
        "replicate",
        "--suite",
        "all",
        "--max-base",
        "2",
        "--workers",
        "1",
    ]);
    assert_eq!(one.status.code(), Some(0), "{}", stdout(&one));
    assert_eq!(
        stdout(&one)
            .lines()
            .filter(|l| l.starts_with("PASS"))
            .count(),
        6
    );
    let four = cylset(&[
        "replicate",
        "--suite",
        "all",
        "--max-base",
        "2",
        "--workers",
        "4",
    ]);
    assert_eq!(stdout(&one), stdout(&four));
}

#[test]
fn replicate_zero_dim_over_crs_finds_counterexample() {
    let o = cylset(&["replicate", "--suite", "zero-dim", "--class", "crs"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL zero-dim"));
}
