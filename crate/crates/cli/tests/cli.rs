use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coupled"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_input(name: &str, value: &Value) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("coupled-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, value.to_string()).unwrap();
    path
}

#[test]
fn hopf_reports_both_predicates() {
    assert_eq!(run_json(&["hopf", "1", "2"]), json!({"biskew_blocked": true, "shares": false}));
    assert_eq!(run_json(&["hopf", "3", "5"]), json!({"biskew_blocked": false, "shares": true}));
    let with_sig = run_json(&["hopf", "4", "6", "--sig", "2", "2", "6"]);
    assert_eq!(with_sig["zero_guaranteed"], json!(true));
}

#[test]
fn bilinear_catalog_quaternions() {
    let v = run_json(&["bilinear-catalog", "4", "4"]);
    assert_eq!(v["d"], json!(4));
    assert_eq!(v["trace"][0], json!("scalar(H,1)"));
    assert_eq!(run_json(&["bilinear-catalog", "3", "5"])["d"], json!(7));
}

#[test]
fn usage_and_input_errors_have_distinct_codes() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["bilinear-catalog", "0", "4"]).status.code(), Some(2));
    let bad = std::env::temp_dir().join(format!("coupled-bad-{}.json", std::process::id()));
    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(run(&["kneser-chi", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["kneser-chi", "/nonexistent/complex.json"]).status.code(), Some(2));
}

#[test]
fn kneser_chi_of_an_edge_on_six_vertices() {
    let k = write_input("edge.json", &json!({"n": 6, "facets": [[1, 2]]}));
    let v = run_json(&["kneser-chi", k.to_str().unwrap()]);
    assert_eq!(v["chi"], json!(4));
    assert_eq!(v["edgeless"], json!(false));
}

#[test]
fn reproduce_table_is_deterministic() {
    let first = run(&["reproduce-table"]);
    let second = run(&["reproduce-table", "--threads", "1"]);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let v: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v["all_match"], json!(true));
}

#[test]
fn bounds_certificate_is_tight_for_rp2_and_a_sphere() {
    let x = write_input("x.json", &json!({"kind": "named", "name": "rp2_6"}));
    let y = write_input("y.json", &json!({"kind": "sphere", "m": 4}));
    let v = run_json(&["bounds", x.to_str().unwrap(), y.to_str().unwrap()]);
    assert_eq!(v["lower"]["value"], json!(8));
    assert_eq!(v["upper"]["value"], json!(8));
    assert_eq!(v["tight"], json!(true));
}

#[test]
fn search_writes_to_out_file() {
    let map = write_input(
        "map.json",
        &json!({"kind": "trig_random", "x": {"type": "sphere", "m": 1}, "y": {"type": "sphere", "m": 2}, "d": 3, "seed": 1, "degree": 2}),
    );
    let out = std::env::temp_dir().join(format!("coupled-out-{}.json", std::process::id()));
    let status = run(&[
        "search-parallelogram",
        map.to_str().unwrap(),
        "--z2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["verdict"], json!("WitnessFound"));
}

#[test]
fn zero_search_on_simplex_pair() {
    let simplex = |n: usize| json!({"type": "complex", "complex": {"n": n, "facets": [(1..=n).collect::<Vec<_>>()]}});
    let spec = write_input(
        "zero.json",
        &json!({"construction": "simplex_pair", "map": {"kind": "trig_random", "x": simplex(3), "y": simplex(4), "d": 3, "seed": 2, "degree": 2}}),
    );
    let v = run_json(&["zero-search", spec.to_str().unwrap()]);
    assert_eq!(v["zero_guaranteed"], json!(true));
    assert_eq!(v["report"]["verdict"], json!("WitnessFound"));
}
