use std::fmt::Write;

use super::{cell, RenderOptions};
use crate::catalog::{Coverage, ThreatCatalogEntry};
use crate::engine::{AuditReport, MitigationAssessment, MitigationStatus};
use crate::model::{PipelineStage, StrideCategory};

fn join<T: ToString>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items.into_iter().map(|i| i.to_string()).collect::<Vec<_>>().join(sep)
}

fn agents_cell(e: &ThreatCatalogEntry) -> String {
    join(
        e.agents.iter().map(|a| match e.agent_notes.get(a) {
            Some(note) => format!("{a} ({note})"),
            None => a.to_string(),
        }),
        ", ",
    )
}

fn slsa_text(e: &ThreatCatalogEntry) -> String {
    if e.slsa_levels.is_empty() {
        "None".to_string()
    } else {
        join(&e.slsa_levels, ", ")
    }
}

fn controls_text(report: &AuditReport, a: &MitigationAssessment) -> Vec<String> {
    a.entry
        .controls
        .iter()
        .map(|id| report.controls.get(id).cloned().unwrap_or_else(|| id.to_string()))
        .collect()
}

/// Traceability matrix in markdown, one section per canonical stage,
/// followed by SLSA, stage gap and priority summaries.
pub fn render_matrix(report: &AuditReport, options: &RenderOptions) -> String {
    let mut out = String::new();
    let g = options.glyphs;
    let _ = writeln!(out, "# Threat traceability matrix: {}\n", report.model);
    let _ = writeln!(
        out,
        "Catalog {}. Attained SLSA level: {}. Findings: {} total, {} mitigated, {} partial, {} unmitigated.",
        report.catalog_version,
        report.slsa.attained,
        report.findings.len(),
        report.count(MitigationStatus::Mitigated),
        report.count(MitigationStatus::Partial),
        report.count(MitigationStatus::Unmitigated),
    );

    let stride_head = join(StrideCategory::ALL.map(|c| c.letter()), " | ");
    let stride_rule = "---|".repeat(6);
    let (control_head, control_rule) = if options.split_columns {
        ("Security Controls | SLSA | SSDF", "---|---|---|")
    } else {
        ("Security Controls and SLSA/SSDF Mapping", "---|")
    };

    for stage in PipelineStage::CANONICAL {
        let _ = writeln!(out, "\n## {}\n", stage.label());
        let rows: Vec<&MitigationAssessment> = report
            .findings
            .iter()
            .filter(|a| a.finding.stage == stage && (options.include_mitigated || a.status.is_open()))
            .collect();
        if rows.is_empty() {
            let _ = writeln!(out, "No open threats.");
            continue;
        }
        let _ = writeln!(
            out,
            "| Threat | Asset (AS#) | Threat Agent (TA#) | Threat Description | {stride_head} | OWASP | {control_head} | Status (tool) |"
        );
        let _ = writeln!(out, "|---|---|---|---|{stride_rule}---|{control_rule}---|");
        for a in rows {
            let e = &a.entry;
            let flags = join(StrideCategory::ALL.map(|c| g.mark(e.stride.contains(&c))), " | ");
            let owasp = if e.owasp.is_empty() { "-".to_string() } else { join(&e.owasp, ", ") };
            let controls = controls_text(report, a);
            let ssdf = join(&e.ssdf, ", ");
            let mapping = if options.split_columns {
                format!("{} | {} | {}", cell(&controls.join("; ")), slsa_text(e), ssdf)
            } else {
                let mut parts = controls;
                parts.push(format!("SLSA: {}", slsa_text(e)));
                parts.push(format!("SSDF: {ssdf}"));
                cell(&parts.join("; "))
            };
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {flags} | {} | {mapping} | {} ({}) |",
                e.key.threat_id,
                join(&e.assets, ", "),
                agents_cell(e),
                cell(&e.description),
                cell(&owasp),
                a.status,
                a.coverage_ratio,
            );
        }
    }

    let _ = writeln!(out, "\n## SLSA assessment\n");
    let _ = writeln!(out, "Attained level: {}.\n", report.slsa.attained);
    let _ = writeln!(out, "| STRIDE category | Coverage |");
    let _ = writeln!(out, "|---|---|");
    for (cat, cov) in &report.slsa.per_category {
        let word = match cov {
            Coverage::None => "None",
            Coverage::Partial => "Partial",
            Coverage::Full => "Full",
        };
        let _ = writeln!(out, "| {} | {word} |", cat.label());
    }

    let _ = writeln!(out, "\n## Stage gaps\n");
    if report.stage_gaps.is_empty() {
        let _ = writeln!(out, "No stages in model.");
    } else {
        let _ = writeln!(out, "| Stage | SLSA applies | STRIDE required | Open findings | Residual STRIDE |");
        let _ = writeln!(out, "|---|---|---|---|---|");
        for gap in &report.stage_gaps {
            let label = if gap.editorial {
                format!("{} (no catalog row)", gap.stage_label)
            } else {
                gap.stage_label.clone()
            };
            let residual = if gap.stride_residual.is_empty() {
                "-".to_string()
            } else {
                gap.stride_residual.iter().map(|c| c.letter()).collect()
            };
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {residual} |",
                cell(&label),
                gap.slsa_applies,
                if gap.stride_required { "Yes" } else { "No" },
                gap.open_findings,
            );
        }
    }

    let _ = writeln!(out, "\n## Priorities\n");
    let _ = writeln!(out, "{}\n", report.priority_formula);
    let open: Vec<_> = report.priorities.iter().filter(|p| p.score > 0).collect();
    if open.is_empty() {
        let _ = writeln!(out, "No open threats.");
    } else {
        let _ = writeln!(out, "| Rank | Threat | Stage | Score |");
        let _ = writeln!(out, "|---|---|---|---|");
        for (i, p) in open.iter().enumerate() {
            let _ = writeln!(out, "| {} | {} | {} | {} |", i + 1, p.key.threat_id, p.key.stage.label(), p.score);
        }
    }
    out
}
