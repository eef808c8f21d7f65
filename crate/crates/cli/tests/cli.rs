use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn qcausal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcausal"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn certify_correlated(out: &Path, eps: &str) -> Output {
    qcausal(&[
        "certify",
        "--scenario",
        s(&scenario("triangle.json")),
        "--dist",
        s(&scenario("triangle_correlated.json")),
        "-n",
        "2",
        "-C",
        "0.25",
        "--eps",
        eps,
        "--out",
        s(out),
    ])
}

#[test]
fn compile_reports_the_alphabet() {
    let dir = tempfile::tempdir().unwrap();
    let out = qcausal(&["compile", "--scenario", s(&scenario("triangle.json")), "--out", s(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["stats"]["generatorCount"], 7);
    assert_eq!(report["config"]["n"], 1);
    assert_eq!(report["structureClass"], "correlation");
    let sdpa = fs::read_to_string(dir.path().join("problem.sdpa")).unwrap();
    qcausal_core::sdp::import_sdpa(&sdpa).unwrap();
}

#[test]
fn correlated_bits_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = certify_correlated(dir.path(), "0");
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["decision"], "rejected");
    assert_eq!(report["config"]["C"], 0.25);
    assert_eq!(report["config"]["epsilon"], 0.0);
    assert!(report["value"].as_f64().unwrap() > 0.0);
    let stdout: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(stdout["decision"], "rejected");
}

/// Raising ε can only turn a rejection into acceptance.
#[test]
fn tolerance_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let codes: Vec<i32> = ["0", "0.1", "0.3", "10"]
        .iter()
        .map(|eps| code(&certify_correlated(dir.path(), eps)))
        .collect();
    assert_eq!(codes.last(), Some(&0));
    let first_accept = codes.iter().position(|&c| c == 0).unwrap();
    assert!(codes[..first_accept].iter().all(|&c| c == 2), "{codes:?}");
    assert!(codes[first_accept..].iter().all(|&c| c == 0), "{codes:?}");
}

#[test]
fn sampled_model_is_reproducible_and_compatible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = qcausal(&[
            "oracle", "sample", "--scenario", s(&scenario("triangle.json")), "-r", "2", "--seed", "42", "--out",
            s(dir.path()),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["model.json", "distribution.json"] {
        assert_eq!(
            fs::read(a.path().join(file)).unwrap(),
            fs::read(b.path().join(file)).unwrap()
        );
    }
    let c_bound = json(&a.path().join("model.json"))["cBound"].as_f64().unwrap().to_string();
    let run = tempfile::tempdir().unwrap();
    let out = qcausal(&[
        "certify", "--scenario", s(&scenario("triangle.json")), "--dist",
        s(&a.path().join("distribution.json")), "-r", "2", "-k", "2", "-C", &c_bound, "--out",
        s(run.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(json(&run.path().join("report.json"))["value"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn oracle_moments_and_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let out = qcausal(&["oracle", "sample", "--magic", "--out", s(dir.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let model = dir.path().join("model.json");

    let m = tempfile::tempdir().unwrap();
    let out = qcausal(&["oracle", "moments", "--model", s(&model), "--word", "1", "--out", s(m.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let moments = json(&m.path().join("moments.json"));
    assert_eq!(moments[0]["word"], "1");
    assert!((moments[0]["re"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let report = json(&m.path().join("report.json"));
    assert!(!report["blockMinEigenvalues"].as_array().unwrap().is_empty());
    for e in report["blockMinEigenvalues"].as_array().unwrap() {
        assert!(e.as_f64().unwrap() >= -1e-9);
    }

    let t = tempfile::tempdir().unwrap();
    let out = qcausal(&["oracle", "truncate", "--model", s(&model), "-r", "4", "--out", s(t.path())]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&t.path().join("report.json"));
    assert!(report["distributionError"].as_f64().unwrap() < 1e-24);
    let out = qcausal(&["oracle", "truncate", "--model", s(&model), "-r", "1", "--out", s(t.path())]);
    assert_eq!(code(&out), 1);
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let tri = scenario("triangle.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["certify", "--scenario", s(&tri), "--out", s(dir.path())],
        vec!["compile", "--scenario", "/nonexistent.json", "--out", s(dir.path())],
        vec!["compile", "--scenario", s(&tri), "--profile", "bogus", "--out", s(dir.path())],
        vec!["compile", "--scenario", s(&tri), "-C", "-1", "--out", s(dir.path())],
        vec!["compile", "--scenario", s(&tri), "--mode", "linearConstraints", "--out", s(dir.path())],
        vec!["compile"],
        vec!["frobnicate"],
    ];
    for args in cases {
        let out = qcausal(&args);
        assert_eq!(code(&out), 1, "{args:?}");
    }
    assert_eq!(code(&qcausal(&["--help"])), 0);
}
