use std::collections::{BTreeSet, HashSet};

use super::*;
use crate::catalog::{builtin_catalog, Coverage};
use crate::model::{AgentId, AssetId, ControlId, SlsaCapability, SlsaLevel, StrideCategory::*, ThreatKey};
use PipelineStage::*;

fn model(stages: &[PipelineStage], assets: &[u32], agents: &[u32]) -> PipelineModel {
    let mut m = PipelineModel::named("t");
    m.stages = stages.iter().copied().collect();
    m.assets = assets.iter().map(|n| AssetId::Builtin(*n)).collect();
    m.agents = agents.iter().map(|n| AgentId::Builtin(*n)).collect();
    m
}

fn reference() -> PipelineModel {
    model(&PipelineStage::CANONICAL, &(1..=11).collect::<Vec<_>>(), &(1..=7).collect::<Vec<_>>())
}

fn caps(n: usize) -> BTreeSet<SlsaCapability> {
    SlsaCapability::ALL[..n].iter().copied().collect()
}

/// Independent filter using string-keyed hash sets.
fn oracle(m: &PipelineModel) -> Vec<ThreatKey> {
    let assets: HashSet<String> = m.assets.iter().map(|a| a.to_string()).collect();
    let agents: HashSet<String> = m.agents.iter().map(|a| a.to_string()).collect();
    let mut out = Vec::new();
    for stage in PipelineStage::CANONICAL {
        for e in builtin_catalog().entries.iter().filter(|e| e.key.stage == stage) {
            let a = e.assets.iter().any(|x| assets.contains(&x.to_string()));
            let g = e.agents.iter().any(|x| agents.contains(&x.to_string()));
            if m.stages.contains(&stage) && a && g {
                out.push(e.key);
            }
        }
    }
    out
}

fn keys(f: &[ThreatFinding]) -> Vec<ThreatKey> {
    f.iter().map(|f| f.entry_key).collect()
}

fn assess(m: &PipelineModel, key: ThreatKey) -> MitigationAssessment {
    let c = builtin_catalog();
    evaluate_controls(m, c, &identify_threats(m, c))
        .into_iter()
        .find(|a| a.key() == key)
        .unwrap()
}

#[test]
fn reference_matches_every_row() {
    let f = identify_threats(&reference(), builtin_catalog());
    assert_eq!(f.len(), 15);
    assert_eq!(keys(&f), builtin_catalog().entries.iter().map(|e| e.key).collect::<Vec<_>>());
}

#[test]
fn single_source_asset_and_agent() {
    let m = model(&[Source], &[1], &[1]);
    let f = identify_threats(&m, builtin_catalog());
    assert_eq!(keys(&f), oracle(&m));
    assert_eq!(keys(&f), [ThreatKey::new(1, Source)]);
}

#[test]
fn empty_agents_match_nothing() {
    let m = model(&PipelineStage::CANONICAL, &[1, 2, 3], &[]);
    assert!(identify_threats(&m, builtin_catalog()).is_empty());
}

#[test]
fn matched_sets_are_intersections() {
    let m = model(&[Build], &[3, 5], &[1, 2]);
    for f in identify_threats(&m, builtin_catalog()) {
        let e = builtin_catalog().entry(f.entry_key).unwrap();
        for a in &f.matched_assets {
            assert!(e.assets.contains(a) && m.assets.contains(a));
        }
        assert!(!f.matched_agents.is_empty());
    }
}

#[test]
fn full_controls_mitigate_t1() {
    let key = ThreatKey::new(1, Source);
    let mut m = reference();
    m.controls = builtin_catalog().entry(key).unwrap().controls.iter().cloned().collect();
    let a = assess(&m, key);
    assert_eq!(a.status, MitigationStatus::Mitigated);
    assert_eq!(a.coverage_ratio, CoverageRatio::new(4, 4));
}

#[test]
fn one_control_is_partial() {
    let key = ThreatKey::new(1, Source);
    let mut m = reference();
    let mfa: ControlId = builtin_catalog().entry(key).unwrap().controls[0].clone();
    assert!(mfa.as_str().starts_with("mfa"));
    m.controls.insert(mfa);
    let a = assess(&m, key);
    assert_eq!(a.status, MitigationStatus::Partial);
    assert_eq!(a.coverage_ratio, CoverageRatio::new(1, 4));
    assert_eq!(a.missing_controls.len(), 3);
}

#[test]
fn slsa_assist_without_controls() {
    let key = ThreatKey::new(12, Build);
    let mut m = reference();
    m.slsa_capabilities = caps(3);
    let a = assess(&m, key);
    assert!(a.slsa_assist);
    assert_eq!(a.status, MitigationStatus::Partial);
    // Three listed controls plus one SLSA unit; only the SLSA unit is met.
    assert_eq!(a.entry.controls.len(), 3);
    assert_eq!(a.coverage_ratio, CoverageRatio::new(1, 4));
    m.slsa_capabilities = caps(2);
    let a = assess(&m, key);
    assert!(!a.slsa_assist);
    assert_eq!(a.status, MitigationStatus::Unmitigated);
}

#[test]
fn controls_without_slsa_leave_slsa_rows_partial() {
    let key = ThreatKey::new(3, Build);
    let mut m = reference();
    m.controls = builtin_catalog().entry(key).unwrap().controls.iter().cloned().collect();
    m.slsa_capabilities = caps(3);
    assert_eq!(assess(&m, key).status, MitigationStatus::Partial);
    m.slsa_capabilities = caps(4);
    assert_eq!(assess(&m, key).status, MitigationStatus::Mitigated);
}

#[test]
fn slsa_levels() {
    let c = builtin_catalog();
    let mut m = reference();
    m.slsa_capabilities = caps(4);
    let s = assess_slsa(&m, c);
    assert_eq!(s.attained, SlsaLevel::L4);
    assert_eq!(s.per_category[&Tampering], Coverage::Full);
    assert_eq!(s.per_category[&Spoofing], Coverage::Partial);
    assert_eq!(s.per_category[&DenialOfService], Coverage::None);

    m.slsa_capabilities.clear();
    let s = assess_slsa(&m, c);
    assert_eq!(s.attained, SlsaLevel::L0);
    assert_eq!(s.unaddressed.len(), 6);

    m.slsa_capabilities = caps(2);
    assert_eq!(assess_slsa(&m, c).per_category[&InformationDisclosure], Coverage::Partial);
}

#[test]
fn dos_unaddressed_at_every_subset() {
    for bits in 0..16u32 {
        let mut m = reference();
        m.slsa_capabilities = SlsaCapability::ALL
            .into_iter()
            .enumerate()
            .filter(|(i, _)| bits & (1 << i) != 0)
            .map(|(_, c)| c)
            .collect();
        assert!(assess_slsa(&m, builtin_catalog()).unaddressed.contains(&DenialOfService));
    }
}

#[test]
fn coverage_rises_with_level_except_spoofing_at_l4() {
    let c = builtin_catalog();
    let violations = c.coverage.monotonicity_violations();
    assert_eq!(violations, [(Spoofing, SlsaLevel::L3, SlsaLevel::L4)]);
}

#[test]
fn stage_gaps_reference() {
    let c = builtin_catalog();
    let m = reference();
    let report = full_audit(&m, c).unwrap();
    let source: Vec<_> = report.stage_gaps.iter().filter(|g| g.stage == Source).collect();
    assert_eq!(source.len(), 2);
    assert!(source.iter().all(|g| g.open_findings == 4));
    let build = report.stage_gaps.iter().find(|g| g.stage == Build).unwrap();
    assert_eq!(build.slsa_applies.to_string(), "Yes (L2\u{2013}L4)");
    let mon = report.stage_gaps.iter().find(|g| g.stage == Monitoring).unwrap();
    assert!(mon.editorial && mon.stride_required);
    assert_eq!(mon.slsa_applies, SlsaApplicability::No);
    for g in &report.stage_gaps {
        let union: StrideSet = c.threats_for(g.stage).iter().flat_map(|e| e.stride.iter().copied()).collect();
        assert!(g.stride_residual.is_subset(&union));
    }
}

#[test]
fn mitigated_source_has_no_gap() {
    let c = builtin_catalog();
    let mut m = reference();
    m.controls = c.threats_for(Source).iter().flat_map(|e| e.controls.iter().cloned()).collect();
    m.slsa_capabilities = caps(4);
    let report = full_audit(&m, c).unwrap();
    for g in report.stage_gaps.iter().filter(|g| g.stage == Source) {
        assert_eq!(g.open_findings, 0);
        assert!(g.stride_residual.is_empty());
    }
}

#[test]
fn priorities() {
    let c = builtin_catalog();
    let report = full_audit(&reference(), c).unwrap();
    let t14 = report.priorities.iter().find(|p| p.key == ThreatKey::new(14, Build)).unwrap();
    let entry = c.entry(ThreatKey::new(14, Build)).unwrap();
    assert_eq!(entry.assets.len(), 2);
    assert_eq!(t14.score, 10);
    for w in report.priorities.windows(2) {
        assert!(w[0].score > w[1].score || (w[0].score == w[1].score && w[0].key < w[1].key));
    }
}

#[test]
fn reference_audit_all_unmitigated() {
    let report = full_audit(&reference(), builtin_catalog()).unwrap();
    assert_eq!(report.findings.len(), 15);
    assert_eq!(report.count(MitigationStatus::Unmitigated), 15);
    assert_eq!(report.slsa.attained, SlsaLevel::L0);
    assert_eq!(report.version, REPORT_VERSION);
}

#[test]
fn saturated_audit_all_mitigated() {
    let c = builtin_catalog();
    let mut m = reference();
    m.controls = c.controls.ids().cloned().collect();
    m.slsa_capabilities = caps(4);
    let report = full_audit(&m, c).unwrap();
    assert_eq!(report.count(MitigationStatus::Mitigated), 15);
    assert!(report.priorities.iter().all(|p| p.score == 0));
}

#[test]
fn audit_is_deterministic() {
    let c = builtin_catalog();
    assert_eq!(full_audit(&reference(), c).unwrap(), full_audit(&reference(), c).unwrap());
}

#[test]
fn unresolved_model_fails() {
    let m = model(&[Source], &[12], &[1]);
    assert!(full_audit(&m, builtin_catalog()).is_err());
}

#[test]
fn ratio_order_is_by_value() {
    assert_eq!(CoverageRatio::new(1, 2).cmp(&CoverageRatio::new(2, 4)), std::cmp::Ordering::Equal);
    assert!(CoverageRatio::new(1, 4) < CoverageRatio::new(1, 3));
    assert!(CoverageRatio::new(0, 0) > CoverageRatio::new(3, 4));
}
