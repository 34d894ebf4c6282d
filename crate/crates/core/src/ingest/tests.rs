use super::*;
use crate::catalog::{builtin_catalog, Confidence};
use crate::diagnostic::DiagnosticKind;
use crate::model::{AgentId, AssetId, PipelineModel, PipelineStage, ThreatKey};
use crate::source::SourceFormat;

const REFERENCE: &str = include_str!("../../tests/fixtures/reference_model.yaml");

fn parse(text: &str) -> Result<PipelineModel, crate::diagnostic::Diagnostics> {
    parse_pipeline_model(text, SourceFormat::Auto, builtin_catalog()).map(|l| l.value)
}

fn first_error(text: &str) -> crate::diagnostic::Diagnostic {
    parse(text).unwrap_err().errors().next().unwrap().clone()
}

fn import(text: &str) -> WorkflowImport {
    import_ci_workflow(text, SourceFormat::Yaml, Dialect::Generic, builtin_catalog()).unwrap()
}

#[test]
fn minimal_model() {
    let m = parse(r#"{"name": "p", "stages": ["source"], "assets": ["AS1"], "agents": ["TA1"]}"#).unwrap();
    assert_eq!(m.name, "p");
    assert!(m.controls.is_empty());
    assert_eq!(m.stages.len(), 1);
}

#[test]
fn stage_suggestion() {
    let d = first_error(r#"{"name": "p", "stages": ["sourcecode"], "assets": ["AS1"], "agents": ["TA1"]}"#);
    assert_eq!(d.kind, DiagnosticKind::Schema);
    assert_eq!(d.path, "/stages/0");
    assert!(d.message.contains("did you mean \"source\""), "{}", d.message);
}

#[test]
fn unresolved_asset() {
    let d = first_error(r#"{"name": "p", "stages": ["source"], "assets": ["AS1", "AS12"], "agents": ["TA1"]}"#);
    assert_eq!(d.kind, DiagnosticKind::UnresolvedId);
    assert_eq!(d.path, "/assets/1");
    assert!(d.message.contains("AS1..AS11"), "{}", d.message);
}

#[test]
fn unknown_key_rejected() {
    let d = first_error("name: p\nstages: [build]\nassets: [AS1]\nagents: [TA1]\ncontrol: []\n");
    assert_eq!(d.kind, DiagnosticKind::UnknownKey);
    assert_eq!(d.path, "/control");
    assert!(d.message.contains("did you mean \"controls\""));
}

#[test]
fn unknown_control_suggests() {
    let d = first_error("name: p\nstages: [build]\nassets: [AS1]\nagents: [TA1]\ncontrols: [mfa-for-all-user]\n");
    assert_eq!(d.kind, DiagnosticKind::UnresolvedId);
    assert!(d.message.contains("mfa-for-all-users"), "{}", d.message);
}

#[test]
fn syntax_error_position() {
    let err = parse("name: p\nstages: [build\n").unwrap_err();
    assert!(err.iter().next().unwrap().position.is_some());
}

#[test]
fn non_contiguous_capabilities_warn() {
    let loaded = parse_pipeline_model(
        "name: p\nstages: [build]\nassets: [AS1]\nagents: [TA1]\nslsa_capabilities: [scripted_build, hermetic_reproducible]\n",
        SourceFormat::Yaml,
        builtin_catalog(),
    )
    .unwrap();
    assert_eq!(loaded.value.slsa_level(), crate::model::SlsaLevel::L1);
    assert!(loaded.diagnostics.iter().any(|d| d.kind == DiagnosticKind::NonContiguous));
}

#[test]
fn self_flow_and_overlap_rejected() {
    let d = first_error("name: p\nstages: [build]\nflows: [{from: a, to: a}]\n");
    assert_eq!(d.path, "/flows/0");
    let d = first_error("name: p\nstages: [build]\nboundaries: [{name: x, members: [a, b]}, {name: y, members: [b]}]\n");
    assert_eq!(d.kind, DiagnosticKind::Conflict);
    assert_eq!(d.path, "/boundaries/1/members");
    assert!(parse("name: p\nstages: [build]\nboundaries: [{name: x, members: [a, b]}, {name: y, members: [b], nested: true}]\n").is_ok());
}

#[test]
fn custom_ids() {
    let m = parse(
        "name: p\nstages: [build]\nassets: [AS1, {id: ASX-db, description: Orders database}]\nagents: [{id: TAX-vendor, name: Vendor}]\n",
    )
    .unwrap();
    assert_eq!(m.custom_assets[&AssetId::Custom("db".into())], "Orders database");
    assert!(m.agents.contains(&AgentId::Custom("vendor".into())));
    let d = first_error("name: p\nstages: [build]\nassets: [ASX-db]\n");
    assert_eq!(d.kind, DiagnosticKind::UnresolvedId);
}

#[test]
fn yaml_and_json_agree() {
    let yaml = parse(REFERENCE).unwrap();
    let json = parse(&export_model(&yaml)).unwrap();
    assert_eq!(yaml, json);
    assert_eq!(yaml.assets.len(), 11);
    assert_eq!(yaml.flows.len(), 5);
}

#[test]
fn export_is_canonical() {
    let m = parse(REFERENCE).unwrap();
    let once = export_model(&m);
    assert_eq!(export_model(&parse(&once).unwrap()), once);
}

#[test]
fn validation_is_deterministic() {
    let text = "name: p\nstages: [nope, build]\nassets: [AS99, TA1]\nagents: [AS1]\ncontrols: [x-y, Bad]\n";
    let a = parse(text).unwrap_err();
    let b = parse(text).unwrap_err();
    assert_eq!(a, b);
    assert!(a.len() >= 4);
}

#[test]
fn merge_union() {
    let c = builtin_catalog();
    let base = parse_pipeline_model("name: base\nstages: [source]\nassets: [AS1]\nagents: [TA1]\n", SourceFormat::Yaml, c).unwrap().value;
    let overlay = parse_partial_model("assets: [AS2]\nstages: [build]\n", SourceFormat::Yaml, c).unwrap().value;
    let merged = merge_models(&base, &overlay).unwrap();
    assert_eq!(merged.name, "base");
    assert_eq!(merged.assets.len(), 2);
    assert_eq!(merged.stages.len(), 2);
    assert_eq!(merge_models(&base, &PipelineModel::named("")).unwrap(), base);
}

#[test]
fn merge_conflict() {
    let c = builtin_catalog();
    let base = parse("name: b\nstages: [build]\nassets: [{id: ASX-db, description: one}]\n").unwrap();
    let overlay = parse_partial_model("assets: [{id: ASX-db, description: two}]\n", SourceFormat::Yaml, c).unwrap().value;
    assert_eq!(merge_models(&base, &overlay), Err(MergeError::ConflictingAsset(AssetId::Custom("db".into()))));
}

#[test]
fn credential_fixture() {
    let r = import(include_str!("../../tests/fixtures/workflows/credential.yml"));
    assert_eq!(r.indicators.len(), 1, "{:?}", r.indicators);
    let f = &r.indicators[0];
    assert_eq!(f.indicator_id, "aws-access-key-id");
    assert_eq!(f.suggests_threat, ThreatKey::new(4, PipelineStage::Source));
    assert_eq!(f.confidence, Confidence::High);
    assert_eq!(f.location.path, "/env/AWS_ACCESS_KEY_ID");
    assert_eq!(f.location.line, Some(6));
    assert!(!f.evidence.contains("IOSFODNN"));
    assert!(r.model.assets.contains(&AssetId::Builtin(4)));
}

#[test]
fn unpinned_fixture() {
    let r = import(include_str!("../../tests/fixtures/workflows/unpinned.yml"));
    assert_eq!(r.indicators.len(), 1, "{:?}", r.indicators);
    let f = &r.indicators[0];
    assert_eq!(f.indicator_id, "unpinned-dependency-reference");
    assert_eq!(f.suggests_threat, ThreatKey::new(9, PipelineStage::Build));
    assert_eq!(f.confidence, Confidence::Medium);
    assert_eq!(f.evidence, "actions/setup-node@v4");
    assert_eq!(f.location.line, Some(9));
}

#[test]
fn clean_fixture() {
    let r = import(include_str!("../../tests/fixtures/workflows/clean.yml"));
    assert!(r.indicators.is_empty(), "{:?}", r.indicators);
    let stages: Vec<_> = r.model.stages.iter().copied().collect();
    assert_eq!(stages, [PipelineStage::Source, PipelineStage::Build, PipelineStage::Deployment]);
    assert!(r.model.agents.contains(&AgentId::Builtin(1)) && r.model.agents.contains(&AgentId::Builtin(2)));
}

#[test]
fn risky_generic_fixture() {
    let r = import(include_str!("../../tests/fixtures/workflows/risky.yml"));
    let ids: Vec<&str> = r.indicators.iter().map(|f| f.indicator_id.as_str()).collect();
    assert_eq!(
        ids,
        [
            "unpinned-dependency-reference",
            "remote-script-execution",
            "secret-echo",
            "credential-assignment",
            "auto-deploy-on-push"
        ]
    );
    let cred = &r.indicators[3];
    assert_eq!(cred.evidence, "DB_PASSWORD: hu**********r2");
}

#[test]
fn github_dialect_ignores_generic_keys() {
    let text = include_str!("../../tests/fixtures/workflows/risky.yml");
    let r = import_ci_workflow(text, SourceFormat::Yaml, Dialect::GithubActions, builtin_catalog()).unwrap();
    assert!(r.indicators.iter().all(|f| f.indicator_id != "remote-script-execution"));
}

#[test]
fn empty_workflow() {
    let r = import(include_str!("../../tests/fixtures/workflows/empty.yml"));
    assert!(r.indicators.is_empty());
    assert_eq!(r.model, PipelineModel::named(""));
    let r = import("");
    assert_eq!(r.model, PipelineModel::named(""));
}

#[test]
fn import_output_is_a_partial_model() {
    let c = builtin_catalog();
    let r = import(include_str!("../../tests/fixtures/workflows/clean.yml"));
    let text = export_model(&r.model);
    assert_eq!(parse_partial_model(&text, SourceFormat::Json, c).unwrap().value, r.model);
}

#[test]
fn garbage_is_a_syntax_error() {
    let err = import_ci_workflow("{ not: [valid", SourceFormat::Auto, Dialect::Generic, builtin_catalog()).unwrap_err();
    assert_eq!(err.kind, DiagnosticKind::Syntax);
}
