use serde_json::{json, Value};

use crate::engine::{AuditReport, MitigationStatus};

pub const SARIF_VERSION: &str = "2.1.0";
const SARIF_SCHEMA: &str = "https://json.schemastore.org/sarif-2.1.0.json";

/// Compact JSON with object keys in sorted order.
pub fn render_json(report: &AuditReport) -> String {
    let tree = serde_json::to_value(report).expect("report serializes");
    let mut out = serde_json::to_string(&tree).expect("value serializes");
    out.push('\n');
    out
}

pub fn parse_report_json(text: &str) -> serde_json::Result<AuditReport> {
    serde_json::from_str(text)
}

pub(crate) fn rule_id(key: &crate::model::ThreatKey) -> String {
    format!("THREAT-{}-{}", key.threat_id, key.stage)
}

/// SARIF 2.1.0 log with one rule per matched catalog entry and one result
/// per open finding.
pub fn render_sarif(report: &AuditReport) -> String {
    let rules: Vec<Value> = report
        .findings
        .iter()
        .map(|a| {
            let e = &a.entry;
            json!({
                "id": rule_id(&e.key),
                "name": format!("{} ({})", e.key.threat_id, e.key.stage.label()),
                "shortDescription": {"text": e.description},
                "properties": {
                    "stage": e.key.stage.as_str(),
                    "stride": e.stride.iter().map(|c| c.as_str()).collect::<Vec<_>>(),
                    "ssdf": e.ssdf.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                },
            })
        })
        .collect();
    let results: Vec<Value> = report
        .findings
        .iter()
        .enumerate()
        .filter(|(_, a)| a.status.is_open())
        .map(|(i, a)| {
            let level = if a.status == MitigationStatus::Unmitigated { "error" } else { "warning" };
            let missing: Vec<String> = a
                .missing_controls
                .iter()
                .map(|id| report.controls.get(id).cloned().unwrap_or_else(|| id.to_string()))
                .collect();
            let mut text = format!(
                "{} at {} is {} ({} mitigation units satisfied).",
                a.entry.key.threat_id,
                a.finding.stage.label(),
                a.status.as_str().to_lowercase(),
                a.coverage_ratio
            );
            if !missing.is_empty() {
                text.push_str(&format!(" Missing controls: {}.", missing.join("; ")));
            }
            if !a.entry.slsa_levels.is_empty() && !a.slsa_assist {
                let min = a.entry.min_slsa_level().expect("non-empty");
                text.push_str(&format!(" SLSA credit requires {min} or higher."));
            }
            json!({
                "ruleId": rule_id(&a.entry.key),
                "ruleIndex": i,
                "level": level,
                "message": {"text": text},
                "properties": {
                    "status": a.status.as_str(),
                    "coverage_ratio": a.coverage_ratio.to_string(),
                    "matched_assets": a.finding.matched_assets.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                    "matched_agents": a.finding.matched_agents.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                },
            })
        })
        .collect();
    let log = json!({
        "$schema": SARIF_SCHEMA,
        "version": SARIF_VERSION,
        "runs": [{
            "tool": {"driver": {
                "name": "pta",
                "version": env!("CARGO_PKG_VERSION"),
                "properties": {"catalog_version": report.catalog_version, "model": report.model},
                "rules": rules,
            }},
            "results": results,
        }],
    });
    let mut out = serde_json::to_string_pretty(&log).expect("sarif serializes");
    out.push('\n');
    out
}
