//! Matching a pipeline model against the catalog and assessing what the
//! model leaves open.

mod types;

use std::collections::{BTreeMap, BTreeSet};

pub use types::*;

use crate::catalog::{Catalog, SlsaApplicability, ThreatCatalogEntry};
use crate::diagnostic::Diagnostics;
use crate::model::{PipelineModel, PipelineStage, StrideCategory, StrideSet};

fn matches(entry: &ThreatCatalogEntry, model: &PipelineModel) -> Option<ThreatFinding> {
    if !model.stages.contains(&entry.key.stage) {
        return None;
    }
    let matched_assets: BTreeSet<_> = entry.assets.iter().filter(|a| model.assets.contains(a)).cloned().collect();
    let matched_agents: BTreeSet<_> = entry.agents.iter().filter(|a| model.agents.contains(a)).cloned().collect();
    if matched_assets.is_empty() || matched_agents.is_empty() {
        return None;
    }
    Some(ThreatFinding {
        entry_key: entry.key,
        matched_assets,
        matched_agents,
        stride: entry.stride.clone(),
        stage: entry.key.stage,
    })
}

/// Catalog entries at a model stage sharing at least one asset and one
/// agent with the model, in stage then row order.
pub fn identify_threats(model: &PipelineModel, catalog: &Catalog) -> Vec<ThreatFinding> {
    let mut found: Vec<ThreatFinding> = catalog.entries.iter().filter_map(|e| matches(e, model)).collect();
    found.sort_by_key(|f| f.stage);
    found
}

/// Control and SLSA satisfaction for each finding.
pub fn evaluate_controls(model: &PipelineModel, catalog: &Catalog, findings: &[ThreatFinding]) -> Vec<MitigationAssessment> {
    let attained = model.slsa_level();
    findings
        .iter()
        .filter_map(|f| {
            let entry = catalog.entry(f.entry_key)?;
            let (satisfied_controls, missing_controls): (Vec<_>, Vec<_>) =
                entry.controls.iter().cloned().partition(|c| model.controls.contains(c));
            let slsa_assist = entry.min_slsa_level().is_some_and(|min| attained >= min);
            let has_slsa_unit = !entry.slsa_levels.is_empty();
            let status = if missing_controls.is_empty() && (!has_slsa_unit || slsa_assist) {
                MitigationStatus::Mitigated
            } else if satisfied_controls.is_empty() && !slsa_assist {
                MitigationStatus::Unmitigated
            } else {
                MitigationStatus::Partial
            };
            let units = |controls: usize, slsa: bool| u32::try_from(controls).expect("control count") + u32::from(slsa);
            let coverage_ratio = CoverageRatio::new(
                units(satisfied_controls.len(), slsa_assist),
                units(entry.controls.len(), has_slsa_unit),
            );
            Some(MitigationAssessment {
                finding: f.clone(),
                entry: entry.clone(),
                satisfied_controls,
                missing_controls,
                slsa_assist,
                status,
                coverage_ratio,
            })
        })
        .collect()
}

/// Attained SLSA level and the coverage it provides per STRIDE category.
pub fn assess_slsa(model: &PipelineModel, catalog: &Catalog) -> SlsaAssessment {
    let attained = model.slsa_level();
    let per_category: BTreeMap<_, _> = StrideCategory::ALL
        .into_iter()
        .map(|c| (c, catalog.coverage.get(c, attained)))
        .collect();
    let unaddressed = per_category
        .iter()
        .filter(|(_, v)| **v == crate::catalog::Coverage::None)
        .map(|(c, _)| *c)
        .collect();
    SlsaAssessment {
        attained,
        per_category,
        unaddressed,
    }
}

/// Applicability rows for the model's stages joined with open findings.
/// Monitoring, absent from the applicability table, gets an editorial row.
pub fn stage_gap_analysis(model: &PipelineModel, catalog: &Catalog, assessments: &[MitigationAssessment]) -> Vec<StageGap> {
    let join = |stage: PipelineStage| {
        let open: Vec<_> = assessments.iter().filter(|a| a.finding.stage == stage && a.status.is_open()).collect();
        let residual: StrideSet = open.iter().flat_map(|a| a.finding.stride.iter().copied()).collect();
        (open.len(), residual)
    };
    let mut gaps = Vec::new();
    for stage in PipelineStage::CANONICAL {
        if !model.stages.contains(&stage) {
            continue;
        }
        let rows = catalog.applicability_for(stage);
        let (open_findings, stride_residual) = join(stage);
        if rows.is_empty() {
            gaps.push(StageGap {
                stage_label: stage.label().to_string(),
                stage,
                typical_threats: String::new(),
                slsa_applies: SlsaApplicability::No,
                stride_required: true,
                editorial: true,
                open_findings,
                stride_residual,
            });
            continue;
        }
        for row in rows {
            gaps.push(StageGap {
                stage_label: row.stage_label.clone(),
                stage,
                typical_threats: row.typical_threats.clone(),
                slsa_applies: row.slsa_applies.clone(),
                stride_required: row.stride_required,
                editorial: false,
                open_findings,
                stride_residual: stride_residual.clone(),
            });
        }
    }
    gaps
}

/// Scores every assessment and orders by descending score, then by key.
pub fn prioritize(assessments: &[MitigationAssessment]) -> Vec<Priority> {
    let mut out: Vec<Priority> = assessments
        .iter()
        .map(|a| Priority {
            key: a.key(),
            score: if a.status.is_open() {
                (a.finding.stride.len() * a.finding.matched_assets.len()) as u32
            } else {
                0
            },
        })
        .collect();
    out.sort_by(|a, b| b.score.cmp(&a.score).then(a.key.cmp(&b.key)));
    out
}

/// Runs the whole analysis. Fails only if the model does not resolve
/// against the catalog.
pub fn full_audit(model: &PipelineModel, catalog: &Catalog) -> Result<AuditReport, Diagnostics> {
    let diags = crate::ingest::validate_model(model, catalog);
    if diags.has_errors() {
        return Err(diags);
    }
    let findings = identify_threats(model, catalog);
    let assessments = evaluate_controls(model, catalog, &findings);
    let slsa = assess_slsa(model, catalog);
    let stage_gaps = stage_gap_analysis(model, catalog, &assessments);
    let priorities = prioritize(&assessments);
    let controls = assessments
        .iter()
        .flat_map(|a| a.entry.controls.iter())
        .filter_map(|id| catalog.controls.get(id).map(|d| (id.clone(), d.text.clone())))
        .collect();
    Ok(AuditReport {
        version: REPORT_VERSION.to_string(),
        model: model.name.clone(),
        catalog_version: catalog.version.clone(),
        stages: model.stages.clone(),
        findings: assessments,
        slsa,
        stage_gaps,
        priorities,
        priority_formula: PRIORITY_FORMULA.to_string(),
        controls,
    })
}

#[cfg(test)]
mod tests;
