use std::fmt::Write;

use super::cell;
use crate::catalog::{Catalog, ToolchainEntry};
use crate::engine::{AuditReport, MitigationStatus};
use crate::model::{PipelineStage, ThreatKey};

/// Toolchain rows recommended for one open finding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanItem<'a> {
    pub key: ThreatKey,
    pub status: MitigationStatus,
    pub description: &'a str,
    pub rows: Vec<&'a ToolchainEntry>,
}

/// Open findings in report order, each with every toolchain row for its
/// threat id.
pub fn toolchain_plan<'a>(report: &'a AuditReport, catalog: &'a Catalog) -> Vec<PlanItem<'a>> {
    report
        .open_findings()
        .map(|a| PlanItem {
            key: a.key(),
            status: a.status,
            description: &a.entry.description,
            rows: catalog.toolchain_for(a.key().threat_id),
        })
        .collect()
}

/// Markdown hardening plan grouped by stage.
pub fn render_toolchain_plan(report: &AuditReport, catalog: &Catalog) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Toolchain hardening plan: {}\n", report.model);
    let items = toolchain_plan(report, catalog);
    if items.is_empty() {
        let _ = writeln!(out, "Pipeline fully mitigated per catalog.");
        return out;
    }
    for stage in PipelineStage::CANONICAL {
        let in_stage: Vec<&PlanItem> = items.iter().filter(|i| i.key.stage == stage).collect();
        if in_stage.is_empty() {
            continue;
        }
        let _ = writeln!(out, "## {}\n", stage.label());
        for item in in_stage {
            let _ = writeln!(out, "### {} ({}): {}\n", item.key.threat_id, item.status, cell(item.description));
            if item.rows.is_empty() {
                let _ = writeln!(out, "No toolchain recommendation in catalog.\n");
                continue;
            }
            let _ = writeln!(out, "| Objective | Recommended tools | Applies at |");
            let _ = writeln!(out, "|---|---|---|");
            for row in &item.rows {
                let stages = row.stages.iter().map(|s| s.label()).collect::<Vec<_>>().join(", ");
                let _ = writeln!(out, "| {} | {} | {stages} |", cell(&row.objective), cell(&row.tools_text));
            }
            out.push('\n');
        }
    }
    out
}
