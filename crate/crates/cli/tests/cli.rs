//! End-to-end exercises of the binary: exit codes, JSON round trips,
//! byte-level determinism and the SVG path-count contract.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_cvxcover")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const DISK: &str =
    r#"{"type":"ellipsoid","center":[0.0,0.0],"shape":[[1.0,0.0],[0.0,1.0]],"r":1.0,"r_outer":1.0}"#;

#[test]
fn cover_verify_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(dir.path(), "disk.json", DISK);
    let cov1 = dir.path().join("cov1.json");
    let cov2 = dir.path().join("cov2.json");
    let svg = dir.path().join("cov.svg");

    let out = run(&[
        "cover", "--body", &body, "--eps", "0.1", "--c", "2", "--seed", "7",
        "--out", cov1.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
        "--samples", "20000",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let out = run(&[
        "cover", "--body", &body, "--eps", "0.1", "--c", "2", "--seed", "7",
        "--out", cov2.to_str().unwrap(), "--samples", "20000",
    ]);
    assert!(out.status.success());
    assert_eq!(
        fs::read(&cov1).unwrap(),
        fs::read(&cov2).unwrap(),
        "same seed must produce byte-identical covering JSON"
    );

    // schema echoes eps and re-parses
    let text = fs::read_to_string(&cov1).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["eps"], serde_json::json!(0.1));
    let elements = parsed["elements"].as_array().unwrap().len();

    // svg carries elements + 2 closed paths
    let svg_text = fs::read_to_string(&svg).unwrap();
    assert_eq!(svg_text.matches("<path").count(), elements + 2);

    // verify passes on the emitted covering
    let out = run(&["verify", "--cover", cov1.to_str().unwrap(), "--samples", "20000"]);
    assert!(out.status.success());

    // corrupting the covering flips the exit code to 1 and names coverage
    let mut corrupted: serde_json::Value = serde_json::from_str(&text).unwrap();
    let kept: Vec<serde_json::Value> = corrupted["elements"]
        .as_array()
        .unwrap()
        .iter()
        .take(3)
        .cloned()
        .collect();
    corrupted["elements"] = serde_json::Value::Array(kept);
    let bad = write(dir.path(), "bad.json", &corrupted.to_string());
    let out = run(&["verify", "--cover", &bad, "--samples", "5000"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("coverage"));
}

#[test]
fn cvp_answer_matches_known_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(
        dir.path(),
        "inst.json",
        r#"{"basis":[[1,0],[0,1]],"target":[0.4,0.3],
            "norm":{"type":"lpball","p":"inf","radius":1.0,"dim":2,"r":1.0,"r_outer":1.4142135623730951},
            "eps":0.1}"#,
    );
    let ans = dir.path().join("ans.json");
    let out = run(&["cvp", "--instance", &inst, "--seed", "3", "--out", ans.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let parsed: serde_json::Value = serde_json::from_str(&fs::read_to_string(&ans).unwrap()).unwrap();
    let distance = parsed["distance"].as_f64().unwrap();
    assert!(distance <= 0.44, "distance {distance} above the certified bound");
    assert!(parsed["bound"].as_f64().unwrap() >= distance - 1e-9);

    // answer JSON is byte-identical under the same seed
    let ans2 = dir.path().join("ans2.json");
    let out = run(&["cvp", "--instance", &inst, "--seed", "3", "--out", ans2.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(fs::read(&ans).unwrap(), fs::read(&ans2).unwrap());
}

#[test]
fn ip_empty_and_found() {
    let dir = tempfile::tempdir().unwrap();
    let basis = write(dir.path(), "basis.json", r#"{"basis":[[1,0],[0,1]]}"#);
    let empty_region = write(
        dir.path(),
        "box.json",
        r#"{"shape":{"type":"hpoly",
            "normals":[[1.0,0.0],[-1.0,0.0],[0.0,1.0],[0.0,-1.0]],
            "offsets":[0.4,0.4,0.4,0.4],"r":0.4,"r_outer":0.5656854249492381},
            "offset":[5.5,5.5]}"#,
    );
    let out = run(&["ip", "--body", &empty_region, "--basis", &basis, "--eps", "0.01", "--seed", "5"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"answer\": \"empty\""));

    let found_region = write(
        dir.path(),
        "disk.json",
        r#"{"shape":{"type":"ellipsoid","center":[0.0,0.0],
            "shape":[[1.5625,0.0],[0.0,1.5625]],"r":0.8,"r_outer":0.8},
            "offset":[2.1,2.9]}"#,
    );
    let out = run(&["ip", "--body", &found_region, "--basis", &basis, "--eps", "0.1", "--seed", "5"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("\"answer\": \"found\""), "{stdout}");
    assert!(stdout.contains("2.0") && stdout.contains("3.0"));
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(dir.path(), "broken.json", "{not json");
    let out = run(&["cover", "--body", &body, "--eps", "0.1"]);
    assert_eq!(out.status.code(), Some(2));

    let good = write(dir.path(), "disk.json", DISK);
    let out = run(&["cover", "--body", &good, "--eps", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["cover", "--body", &good, "--eps", "0.1", "--c", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["cover", "--body", "/nonexistent/file.json", "--eps", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scale_and_lemmas_commands() {
    let dir = tempfile::tempdir().unwrap();
    let body = write(dir.path(), "disk.json", DISK);
    let table = dir.path().join("scale.json");
    let out = run(&[
        "scale", "--body", &body, "--eps-list", "0.2,0.1", "--seed", "4",
        "--samples", "10000", "--out", table.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&table).unwrap()).unwrap();
    assert_eq!(parsed["rows"].as_array().unwrap().len(), 2);
    assert!(parsed["slope"].is_number());

    let out = run(&["lemmas", "--suite", "mahler", "--trials", "24", "--seed", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("pass"));

    let out = run(&["lemmas", "--suite", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
}
