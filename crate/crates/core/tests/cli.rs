use std::path::PathBuf;
use std::process::Command as Process;

use dof_region::cli::{run_cli, CliInvocation, Command, OutputFormat};
use serde_json::Value;

fn spec_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("examples/specs")
        .join(name)
}

fn invoke(command: Command, spec: &str, point: Option<&str>) -> CliInvocation {
    let mut inv = CliInvocation::new(command, spec_path(spec));
    inv.point = point.map(str::to_string);
    inv.format = OutputFormat::Machine;
    inv
}

fn json(inv: &CliInvocation) -> (i32, Value) {
    let out = run_cli(inv);
    (out.exit_code, serde_json::from_str(&out.output).unwrap())
}

#[test]
fn region_lists_four_supports() {
    let (code, doc) = json(&invoke(Command::Region, "chain4.json", None));
    assert_eq!(code, 0);
    let supports: Vec<Value> = doc["inequalities"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["support"].clone())
        .collect();
    assert_eq!(
        supports,
        vec![
            serde_json::json!([1, 2, 3]),
            serde_json::json!([1, 2, 4]),
            serde_json::json!([2, 3, 4]),
            serde_json::json!([1, 3, 4]),
        ]
    );
    assert!(doc["inequalities"]
        .as_array()
        .unwrap()
        .iter()
        .all(|i| i["bound"] == 1));
}

#[test]
fn maxsum_on_the_remark_instance() {
    let (code, doc) = json(&invoke(Command::Maxsum, "star4.json", None));
    assert_eq!(code, 0);
    assert_eq!(doc["total"], "3/2");
    assert_eq!(doc["argmax"], serde_json::json!(["0", "1/2", "1/2", "1/2"]));
}

#[test]
fn primes_of_the_poset_example() {
    let (code, doc) = json(&invoke(Command::Primes, "poset5.json", None));
    assert_eq!(code, 0);
    assert_eq!(doc["primes"], serde_json::json!([1, 3, 5]));
    assert_eq!(doc["G"], 3);
}

#[test]
fn vertices_as_rational_strings() {
    let (code, doc) = json(&invoke(Command::Vertices, "chain4.json", None));
    assert_eq!(code, 0);
    let vertices = doc["vertices"].as_array().unwrap();
    assert_eq!(vertices.len(), 6);
    assert!(vertices.contains(&serde_json::json!(["1/3", "1/3", "1/3", "1/3"])));
}

#[test]
fn check_reports_outside_with_its_own_exit_code() {
    let (code, doc) = json(&invoke(
        Command::Check,
        "chain4.json",
        Some("1/2,1/2,1/2,0"),
    ));
    assert_eq!(code, 3);
    assert_eq!(doc["inside"], false);
    assert_eq!(doc["violated"], serde_json::json!([[1, 2, 3]]));
    let (code, doc) = json(&invoke(
        Command::Check,
        "chain4.json",
        Some("1/3,1/3,1/3,1/3"),
    ));
    assert_eq!(code, 0);
    assert_eq!(doc["tight"].as_array().unwrap().len(), 4);
}

#[test]
fn plan_summary_matches_the_worked_example() {
    let (code, doc) = json(&invoke(
        Command::Plan,
        "chain4.json",
        Some("1/3,1/3,1/3,1/3"),
    ));
    assert_eq!(code, 0);
    assert_eq!(doc["tau"], 24);
    assert_eq!(doc["kappa"], 3);
    assert_eq!(doc["Gamma"], 3);
    assert_eq!(doc["columnCounts"], serde_json::json!([8, 4, 4, 1]));
    assert_eq!(
        doc["dofFractions"],
        serde_json::json!(["1/3", "1/6", "1/6", "1/24"])
    );
}

#[test]
fn verify_passes_and_is_byte_stable() {
    let inv = invoke(Command::Verify, "chain4.json", Some("1/3,1/3,1/3,1/3"));
    let first = run_cli(&inv);
    let second = run_cli(&inv);
    assert_eq!(first.exit_code, 0, "{}", first.output);
    assert_eq!(first.output, second.output);
    let doc: Value = serde_json::from_str(&first.output).unwrap();
    assert_eq!(doc["verdict"]["overall"], true);
    assert_eq!(doc["seed"], 42);
}

#[test]
fn verify_outside_region_is_a_structured_error() {
    let (code, doc) = json(&invoke(
        Command::Verify,
        "chain4.json",
        Some("1/2,1/2,1/2,0"),
    ));
    assert_eq!(code, 3);
    assert_eq!(doc["error"]["class"], "out-of-region");
    assert!(doc["error"]["message"]
        .as_str()
        .unwrap()
        .contains("receiver 1"));
}

#[test]
fn validation_errors() {
    let (code, doc) = json(&invoke(Command::Plan, "chain4.json", None));
    assert_eq!(code, 2);
    assert_eq!(doc["error"]["class"], "validation");
    let (code, _) = json(&invoke(Command::Region, "chain4.json", Some("1,0,0,0")));
    assert_eq!(code, 2);
    let (code, _) = json(&invoke(Command::Check, "chain4.json", Some("1/3,1/3")));
    assert_eq!(code, 2);
    let mut inv = invoke(Command::Verify, "chain4.json", Some("1/3,1/3,1/3,1/3"));
    inv.tolerance = 0.0;
    assert_eq!(run_cli(&inv).exit_code, 2);
    let mut inv = invoke(Command::Verify, "chain4.json", Some("1/3,1/3,1/3,1/3"));
    inv.multi = true;
    assert_eq!(run_cli(&inv).exit_code, 2);
    let mut inv = invoke(Command::Verify, "chain4.json", Some("1/3,1/3,1/3,1/3"));
    inv.bounds = "2,1".into();
    assert_eq!(run_cli(&inv).exit_code, 2);
}

#[test]
fn tau_cap_is_its_own_class() {
    let mut inv = invoke(Command::Plan, "chain4.json", Some("1/3,1/3,1/3,1/3"));
    inv.tau_cap = 10;
    let (code, doc) = json(&inv);
    assert_eq!(code, 4);
    assert_eq!(doc["error"]["class"], "cap-exceeded");
}

#[test]
fn missing_spec_is_an_io_error() {
    let (code, doc) = json(&invoke(Command::Region, "no-such-spec.json", None));
    assert_eq!(code, 1);
    assert_eq!(doc["error"]["class"], "io");
}

#[test]
fn binary_forwards_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_dofregion");
    let ok = Process::new(bin)
        .args(["maxsum", spec_path("star4.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("3/2"));

    let outside = Process::new(bin)
        .args([
            "check",
            spec_path("chain4.json").to_str().unwrap(),
            "--point",
            "1/2,1/2,1/2,0",
        ])
        .output()
        .unwrap();
    assert_eq!(outside.status.code(), Some(3));
}
