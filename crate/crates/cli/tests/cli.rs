use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

const BIN: &str = env!("CARGO_BIN_EXE_pta");

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(rel)
}

fn pta(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("PTA_CATALOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8 stderr")
}

fn reference() -> String {
    fixture("reference_model.yaml").display().to_string()
}

fn builtin_catalog_json() -> Value {
    serde_json::from_str(&stdout(&pta(&["catalog", "export"]))).expect("exported catalog is JSON")
}

fn fully_controlled_model(dir: &Path) -> PathBuf {
    let catalog = builtin_catalog_json();
    let controls: Vec<&Value> = catalog["controls"].as_array().unwrap().iter().map(|c| &c["id"]).collect();
    let model = json!({
        "name": "hardened",
        "stages": ["source", "build", "deployment", "monitoring"],
        "assets": (1..=11).map(|n| format!("AS{n}")).collect::<Vec<_>>(),
        "agents": (1..=7).map(|n| format!("TA{n}")).collect::<Vec<_>>(),
        "controls": controls,
        "slsa_capabilities": [
            "scripted_build",
            "hosted_build_provenance",
            "hardened_build_verifiable_provenance",
            "hermetic_reproducible"
        ],
        "flows": [],
        "boundaries": []
    });
    let path = dir.join("hardened.json");
    std::fs::write(&path, serde_json::to_string_pretty(&model).unwrap()).unwrap();
    path
}

#[test]
fn audit_reference_trips_unmitigated_gate_with_fifteen_findings() {
    let o = pta(&["--format", "json", "audit", &reference(), "--gate", "unmitigated"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["findings"].as_array().unwrap().len(), 15);
}

#[test]
fn audit_without_gate_exits_zero() {
    let o = pta(&["audit", &reference()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("T14"));
}

#[test]
fn fully_controlled_model_passes_strictest_gate() {
    let dir = tempfile::tempdir().unwrap();
    let model = fully_controlled_model(dir.path());
    let o = pta(&["audit", model.to_str().unwrap(), "--gate", "partial"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn audit_missing_file_exits_two_with_stderr_only() {
    let o = pta(&["audit", "/definitely/not/here.yaml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
    assert!(stderr(&o).contains("cannot read"));
}

#[test]
fn audit_formats_render() {
    for (format, marker) in [("matrix-md", "## "), ("sarif", "\"version\": \"2.1.0\""), ("plan", "T9")] {
        let o = pta(&["--format", format, "audit", &reference()]);
        assert_eq!(o.status.code(), Some(0), "{format}");
        assert!(stdout(&o).contains(marker), "{format}");
    }
}

#[test]
fn audit_runs_are_repeatable() {
    let a = pta(&["--format", "json", "audit", &reference(), "--gate", "partial"]);
    let b = pta(&["--format", "json", "audit", &reference(), "--gate", "partial"]);
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn unknown_gate_is_usage_error() {
    let o = pta(&["audit", &reference(), "--gate", "sometimes"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn catalog_show_summary_line() {
    let o = pta(&["catalog", "show"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().next().unwrap().contains("15 threats, 11 assets, 7 agents"));
}

#[test]
fn catalog_validate_exported_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("catalog.json");
    let o = pta(&["catalog", "export", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = pta(&["--quiet", "catalog", "validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).is_empty());
    assert!(stdout(&o).contains("15 threats"));
}

#[test]
fn catalog_validate_truncated_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("catalog.json");
    let text = stdout(&pta(&["catalog", "export"]));
    std::fs::write(&path, &text[..text.len() / 2]).unwrap();
    let o = pta(&["catalog", "validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("syntax"));
}

#[test]
fn external_catalog_via_env() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("catalog.json");
    std::fs::write(&path, stdout(&pta(&["catalog", "export"]))).unwrap();
    let o = Command::new(BIN)
        .args(["--quiet", "catalog", "show"])
        .env("PTA_CATALOG", &path)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("15 threats"));
}

#[test]
fn import_credential_prints_redacted_indicator() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("partial.json");
    let o = pta(&["import", fixture("workflows/credential.yml").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("aws-access-key-id"));
    assert!(text.contains("T4/source"));
    assert!(!text.contains("IOSFODNN"));
    let model: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(model["stages"].as_array().unwrap().iter().any(|s| s == "source"));
}

#[test]
fn import_empty_workflow_gives_empty_model() {
    let o = pta(&["import", fixture("workflows/empty.yml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let model: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(model["stages"].as_array().unwrap().is_empty());
    assert!(model["assets"].as_array().unwrap().is_empty());
}

#[test]
fn import_binary_garbage_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("garbage.yml");
    std::fs::write(&path, [0xffu8, 0xfe, 0x00, 0x9c, 0x81, 0x07, 0xc3, 0x28]).unwrap();
    let o = pta(&["import", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn import_unknown_dialect_is_usage_error() {
    let o = pta(&["import", fixture("workflows/clean.yml").to_str().unwrap(), "--dialect", "jenkins"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dfd_renders_digraph() {
    let o = pta(&["dfd", &reference()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("digraph"));
}

#[test]
fn dfd_without_flows_is_empty_digraph() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.yaml");
    std::fs::write(&path, "name: bare\nstages: [build]\nassets: [AS2]\nagents: [TA1]\n").unwrap();
    let o = pta(&["dfd", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let dot = stdout(&o);
    assert!(dot.starts_with("digraph"));
    assert!(!dot.contains("->"));
}

#[test]
fn dfd_invalid_stage_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.yaml");
    std::fs::write(&path, "name: bad\nstages: [packaging]\n").unwrap();
    let o = pta(&["dfd", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).is_empty());
    assert!(stderr(&o).contains("/stages/0"));
}
