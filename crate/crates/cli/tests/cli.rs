//! End-to-end tests of the binary: output shapes, golden renderings, and
//! the exit-code contract (0 ok, 2 usage, 3 violation, 4 I/O).

use std::path::Path;
use std::process::{Command, Output};

fn baseshift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_baseshift"))
        .args(args)
        .env_remove("BASESHIFT_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn map_examples() {
    let out = baseshift(&["map", "3", "--base", "2", "--target", "4"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), golden("map_3_2_4.json"));

    let out = baseshift(&["map", "0", "--base", "7", "--target", "3"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["base_shift"], "0");
    assert_eq!(doc["digits"].as_array().unwrap().len(), 0);

    let out = baseshift(&["map", "123", "--base", "10", "--target", "1"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["base_shift"], "6");

    // arbitrary precision end to end: B_{2,10}(2^80) = 10^80
    let n = (num_bigint::BigUint::from(1u32) << 80u32).to_string();
    let out = baseshift(&["map", &n, "--base", "2", "--target", "10"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["base_shift"].as_str().unwrap(), format!("1{}", "0".repeat(80)));

    let out = baseshift(&["map", "5", "--base", "1", "--target", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn period_examples() {
    let out = baseshift(&["period", "4", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), golden("period_4_2.json"));

    let out = baseshift(&["period", "2", "1"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["periodic"], false);

    let out = baseshift(&["period", "0", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pte_single_and_enumerated() {
    let out = baseshift(&["pte", "3", "--N", "2", "--p", "1"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), golden("pte_3_2_1.json"));

    // non-coprime N: certification fails as a result, not an error
    let out = baseshift(&["pte", "4", "--N", "2", "--p", "1"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["failing_power"], 1);
    assert!(doc.get("certified_degree").is_none());

    let out = baseshift(&["pte", "6", "--p", "1", "--enumerate"]);
    assert!(out.status.success());
    let docs: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let arr = docs.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    assert_eq!(arr[0]["N"], 1);
    assert_eq!(arr[1]["N"], 5);

    // --enumerate and --N conflict
    let out = baseshift(&["pte", "6", "--N", "1", "--p", "1", "--enumerate"]);
    assert_eq!(out.status.code(), Some(2));
    // missing both is also a usage error
    let out = baseshift(&["pte", "6", "--p", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn pte_csv_table() {
    let dir = std::env::temp_dir().join(format!("baseshift-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let csv_path = dir.join("sums.csv");
    let out = baseshift(&[
        "pte", "2", "--N", "1", "--p", "2", "--csv", csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv, "block,k=0,k=1,k=2\n0,4,14,70\n1,4,14,70\n");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_single_identities() {
    let out = baseshift(&["verify", "moment-0", "--p", "1", "--M", "2", "--N", "1"]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out), golden("verify_moment0_1_2_1.json"));

    let out = baseshift(&["verify", "first-closed-form", "--p-list", "0", "--M", "2", "--N", "1"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["verified"], true);

    let out = baseshift(&[
        "verify", "second-closed-form", "--p-list", "0,1", "--M", "3", "--N", "2",
    ]);
    assert!(out.status.success());

    let out = baseshift(&["verify", "fd-multi", "--p-list", "0,0", "--M", "2", "--N", "1"]);
    assert!(out.status.success());

    let out = baseshift(&["verify", "S_k", "--k", "1", "--p", "1", "--M", "2", "--N", "1"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(doc["identity"], "S_k-vanishing");

    // outside the statement: usage error
    let out = baseshift(&["verify", "S_k", "--k", "5", "--p", "1", "--M", "2", "--N", "1"]);
    assert_eq!(out.status.code(), Some(2));

    // hypothesis violation: rad(4) | rad(2)
    let out = baseshift(&["verify", "moment-0", "--p", "0", "--M", "4", "--N", "2"]);
    assert_eq!(out.status.code(), Some(2));

    let out = baseshift(&["verify", "no-such-identity", "--M", "2", "--N", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_all_small_sweep() {
    let out = baseshift(&[
        "verify-all", "--M-cap", "3", "--N-cap", "2", "--p-cap", "1", "--r-cap", "1",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let mut checks = 0;
    for line in text.lines() {
        let doc: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(doc["verified"], true, "unverified: {line}");
        checks += 1;
    }
    assert!(checks > 10);
    // caps above the configured limits are rejected
    let out = baseshift(&["verify-all", "--M-cap", "3", "--p-cap", "9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_outputs_json_lines() {
    let dir = std::env::temp_dir().join(format!("baseshift-scan-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("scan.jsonl");
    let out = baseshift(&[
        "scan", "--M-range", "2..6", "--N-limit", "8", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines.len() > 2);
    let first: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(first["M"], 2);
    assert_eq!(first["match"], true);
    let summary: serde_json::Value = serde_json::from_str(lines.last().unwrap()).unwrap();
    assert_eq!(summary["all_match"], true);
    std::fs::remove_dir_all(&dir).ok();

    // unwritable sink: I/O exit code
    let out = baseshift(&[
        "scan", "--M-range", "2..4", "--N-limit", "4", "--out", "/nonexistent-dir/x.jsonl",
    ]);
    assert_eq!(out.status.code(), Some(4));

    // malformed range and range beyond the scan cap
    let out = baseshift(&["scan", "--M-range", "oops", "--N-limit", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let out = baseshift(&["scan", "--M-range", "2..200", "--N-limit", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_via_environment() {
    let dir = std::env::temp_dir().join(format!("baseshift-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("config.json");
    std::fs::write(&cfg_path, r#"{"order_cap": 4}"#).unwrap();
    // M above the configured order cap is a configuration error
    let out = Command::new(env!("CARGO_BIN_EXE_baseshift"))
        .args(["verify", "moment-0", "--p", "0", "--M", "6", "--N", "4"])
        .env("BASESHIFT_CONFIG", &cfg_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("exceeds configured cap"), "stderr: {err}");
    // same command passes without the cap
    let out = baseshift(&["verify", "moment-0", "--p", "0", "--M", "6", "--N", "4"]);
    assert!(out.status.success());
    std::fs::remove_dir_all(&dir).ok();
}
