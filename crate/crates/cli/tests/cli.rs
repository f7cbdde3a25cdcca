use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fracpow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracpow"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn complex(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

/// Every pass flag must follow from the recorded measurement and threshold.
fn assert_complete(report: &Value) {
    let mut all = true;
    for c in report["checks"].as_array().unwrap() {
        let m = c["measured"].as_f64().expect("finite measurement");
        let t = c["threshold"].as_f64().unwrap();
        let holds = match c["comparison"].as_str().unwrap() {
            "<=" => m <= t,
            ">=" => m >= t,
            other => panic!("unknown comparison {other}"),
        };
        assert_eq!(c["pass"].as_bool().unwrap(), holds, "{c}");
        all &= holds;
    }
    assert_eq!(report["pass"].as_bool().unwrap(), all);
}

#[test]
fn compare_on_identity_returns_x() {
    let out = fracpow(&[
        "compare",
        "--op",
        "identity",
        "--alpha",
        "0.5",
        "--vector",
        "1, [0, 2], -3",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["schema"], 1);
    let want = [(1.0, 0.0), (0.0, 2.0), (-3.0, 0.0)];
    let routes = report["routes"].as_array().unwrap();
    let names: Vec<&str> = routes.iter().map(|r| r["route"].as_str().unwrap()).collect();
    assert_eq!(
        names,
        [
            "balakrishnan",
            "shifted_limit",
            "spectral_oracle",
            "dtn",
            "c_alpha_balakrishnan"
        ]
    );
    for r in routes {
        for (got, w) in r["value"].as_array().unwrap().iter().zip(want) {
            let (re, im) = complex(got);
            assert!((re - w.0).abs() < 1e-8 && (im - w.1).abs() < 1e-8, "{}", r["route"]);
        }
    }
    for c in report["checks"].as_array().unwrap() {
        assert!(c["measured"].as_f64().unwrap() <= 1e-10, "{c}");
    }
    assert_complete(&report);
}

#[test]
fn dtn_on_multiplication_operator() {
    let dir = tempfile::tempdir().unwrap();
    let op = write(
        dir.path(),
        "mul.json",
        r#"{"kind": "multiplication", "symbol": [1, 4, 9]}"#,
    );
    let out = fracpow(&["dtn", "--op", &op, "--alpha", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert!(report["pass"].as_bool().unwrap());
    let dtn = &report["routes"][0];
    assert_eq!(dtn["route"], "dtn");
    for (got, want) in dtn["value"].as_array().unwrap().iter().zip([1.0, 2.0, 3.0]) {
        assert!((complex(got).0 - want).abs() < 1e-6);
    }
    assert_eq!(report["table"]["rows"].as_array().unwrap().len(), 8);
    assert_complete(&report);
}

#[test]
fn power_and_extend_reports() {
    let out = fracpow(&["power", "--op", "hpd_dense", "--alpha", "0.3,0.2", "--tol", "1e-10"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["routes"].as_array().unwrap().len(), 2);
    assert!(report["checks"][0]["measured"].as_f64().unwrap() < 1e-8);
    assert_complete(&report);

    let out = fracpow(&["power", "--op", "jordan", "--alpha", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let (re, _) = complex(&report["routes"][0]["value"][0]);
    assert!((re - 1.5).abs() < 1e-8);
    assert!(report["notes"][0]
        .as_str()
        .unwrap()
        .contains("spectral oracle unavailable"));

    let out = fracpow(&[
        "extend",
        "--op",
        "laplacian",
        "--alpha",
        "0.25",
        "--steps",
        "5",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,u_norm,du_norm,est_error,ode_residual");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("1.0000000000000000e0,"));
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = fracpow(&[
            "compare",
            "--op",
            "sector_multiplication",
            "--alpha",
            "0.4,0.2",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn selftest_passes_and_is_deterministic() {
    let first = fracpow(&["selftest"]);
    assert_eq!(
        first.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    let second = fracpow(&["selftest"]);
    assert_eq!(first.stdout, second.stdout);
    let report = json(&first);
    assert_eq!(report["criteria"].as_array().unwrap().len(), 11);
    assert!(String::from_utf8_lossy(&first.stderr).contains("11 of 11 criteria passed"));
}

#[test]
fn validate_reports_resolvent_samples() {
    let out = fracpow(&["validate", "--op", "multiplication"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["table"]["rows"].as_array().unwrap().len(), 40);
    assert!(report.get("alpha").is_none());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"kind": "circulant"}"#);
    assert_eq!(
        fracpow(&["power", "--op", &bad, "--alpha", "0.5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        fracpow(&["power", "--op", "identity", "--alpha", "1.5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        fracpow(&["power", "--op", "identity", "--alpha", "0.5", "--tol", "-1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        fracpow(&["power", "--op", "identity", "--alpha", "0.5", "--vector", "1"])
            .status
            .code(),
        Some(2)
    );

    // the node budget cannot reach this tolerance
    let out = fracpow(&["power", "--op", "hpd_dense", "--alpha", "0.5", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("did not converge"));

    // a declared constant below the sampled resolvent bound fails its check
    let skew = write(
        dir.path(),
        "skew.json",
        r#"{"kind": "dense_matrix", "matrix": [[1, 10], [0, 1]], "m_estimate": 1.0}"#,
    );
    let out = fracpow(&["validate", "--op", &skew]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!json(&out)["pass"].as_bool().unwrap());
}
