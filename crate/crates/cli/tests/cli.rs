use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tracenet_core::{parse_net, Marking};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn reference() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/reference_net.json")
}

fn tracenet(args: &[&str], net: &PathBuf) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tracenet"));
    cmd.arg(args[0])
        .arg(net)
        .args(&args[1..])
        .env_remove("TRACENET_MAX_CLIQUES");
    cmd.output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn analyze_reference_net() {
    let out = tracenet(&["analyze", "--no-timestamp"], &reference());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = stdout_json(&out);
    assert_eq!(r["schema_version"], 1);
    assert!(r.get("timestamp").is_none());
    assert_eq!(
        r["theta"]["coefficients"],
        serde_json::json!([1, -5, 7, -1, -2])
    );
    assert_eq!(r["state_count"], 2);
    let q0 = r["characteristic_root"]["midpoint"].as_f64().unwrap();
    assert!((q0 - (2f64.sqrt() - 1.0)).abs() < 1e-12);
}

#[test]
fn timestamp_is_present_unless_suppressed() {
    let out = tracenet(&["analyze"], &reference());
    assert!(stdout_json(&out)["timestamp"].is_string());
    let a = tracenet(&["analyze", "--no-timestamp"], &reference());
    let b = tracenet(&["analyze", "--no-timestamp"], &reference());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn malformed_input_exits_2() {
    let out = tracenet(&["analyze"], &fixture("malformed.json"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("syntax error"));
    let missing = tracenet(&["analyze"], &fixture("absent.json"));
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn unsafe_net_exits_3_with_witness() {
    let out = tracenet(&["analyze"], &fixture("two_token_contact.json"));
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[\"t\"]") && err.contains('q'), "{err}");
}

#[test]
fn reducible_net_exits_4() {
    assert_eq!(
        tracenet(&["chain"], &fixture("dead_end.json"))
            .status
            .code(),
        Some(4)
    );
}

#[test]
fn clique_cap_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_tracenet"))
        .args(["analyze"])
        .arg(reference())
        .env("TRACENET_MAX_CLIQUES", "4")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(6));
    let bad = Command::new(env!("CARGO_BIN_EXE_tracenet"))
        .args(["analyze"])
        .arg(reference())
        .env("TRACENET_MAX_CLIQUES", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn chain_csv_and_report() {
    let out = tracenet(&["chain", "--format", "csv"], &reference());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 11);
    assert!(text.lines().nth(6).unwrap().starts_with("\"(M1,b)\",0,1,0"));
    let report = stdout_json(&tracenet(&["chain", "--no-timestamp"], &reference()));
    assert_eq!(report["lumping"]["verdict"], "NOT_LUMPABLE");
    assert_eq!(
        report["discrepancy"]["flagged"],
        serde_json::json!(["(M1,b)"])
    );
}

#[test]
fn self_loop_chain_is_one_by_one() {
    let out = tracenet(&["chain", "--format", "csv"], &fixture("self_loop.json"));
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        ",\"(M0,t)\"\n\"(M0,t)\",1\n"
    );
}

#[test]
fn sample_is_byte_identical_for_a_seed() {
    let args = ["sample", "--steps", "20", "--runs", "3", "--seed", "7"];
    let a = tracenet(&args, &reference());
    let b = tracenet(&args, &reference());
    assert!(a.status.success());
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    let other = tracenet(
        &["sample", "--steps", "20", "--runs", "3", "--seed", "8"],
        &reference(),
    );
    assert_ne!(a.stdout, other.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 60);
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["k"], 1);
}

#[test]
fn sampled_firings_replay() {
    let net = parse_net(&std::fs::read_to_string(reference()).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("firings.txt");
    let out = tracenet(
        &[
            "sample",
            "--steps",
            "15",
            "--runs",
            "25",
            "--seed",
            "3",
            "--format",
            "firings",
            "--output",
            path.to_str().unwrap(),
        ],
        &reference(),
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 25);
    for line in text.lines() {
        let mut m: Marking = net.initial_marking().clone();
        for id in line.split_whitespace() {
            m = net.fire(&m, net.transition_index(id).unwrap()).unwrap();
        }
    }
}

#[test]
fn sample_rejects_bad_requests() {
    assert_eq!(
        tracenet(&["sample", "--steps", "0"], &reference())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        tracenet(&["sample", "--validate", "--runs", "10"], &reference())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        tracenet(&["sample", "--format", "csv"], &reference())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn validation_mode() {
    let out = tracenet(
        &[
            "sample",
            "--validate",
            "--runs",
            "20000",
            "--steps",
            "4",
            "--seed",
            "5",
        ],
        &reference(),
    );
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["pass"], true);
}

#[test]
fn verify_and_corruption() {
    let ok = tracenet(&["verify", "--depth", "2"], &reference());
    assert!(
        ok.status.success(),
        "{}",
        String::from_utf8_lossy(&ok.stdout)
    );
    let bad = tracenet(&["verify", "--corrupt-gamma", "0,1,1.01"], &reference());
    assert_eq!(bad.status.code(), Some(1));
    let report = stdout_json(&bad);
    let rule = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "chain_rule")
        .unwrap();
    assert_eq!(rule["outcome"], "fail");
}

#[test]
fn enumerate_lengths() {
    let r = stdout_json(&tracenet(&["enumerate", "--length", "2"], &reference()));
    assert_eq!(r["lambda_recurrence"], serde_json::json!(["1", "5", "20"]));
    let r0 = stdout_json(&tracenet(&["enumerate", "--length", "0"], &reference()));
    assert_eq!(r0["lambda_recurrence"], serde_json::json!(["1"]));
    let single = stdout_json(&tracenet(
        &["enumerate", "--length", "6"],
        &fixture("self_loop.json"),
    ));
    assert_eq!(
        single["lambda_brute_force"],
        serde_json::json!(["1", "1", "1", "1", "1", "1", "1"])
    );
    let capped = tracenet(
        &["enumerate", "--length", "12", "--max-length", "10"],
        &reference(),
    );
    assert_eq!(capped.status.code(), Some(6));
}
