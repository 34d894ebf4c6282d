use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::str::FromStr;

use serde_json::Value;

use super::document::*;
use super::*;
use crate::diagnostic::{pointer, Diagnostic, DiagnosticKind, Diagnostics, Loaded};
use crate::model::{
    parse_stride_flags, AgentId, AssetId, AssetRef, ControlDescriptor, ControlId, ControlType,
    OwaspCategory, OwaspCode, ParseError, PipelineStage, Provenance, SlsaLevel, SsdfPracticeId,
    StrideCategory, ThreatAgentRef, ThreatId, ThreatKey,
};
use crate::source::{parse_tree, SourceFormat};

const APPLICABILITY_ROWS: usize = 4;
const ASPECT_ROWS: usize = 6;

/// Parses and validates a catalog document from JSON or YAML text.
pub fn load_catalog(text: &str, format: SourceFormat) -> Result<Loaded<Catalog>, Diagnostics> {
    let tree = parse_tree(text, format)?;
    load_catalog_tree(tree)
}

/// Validates an already-parsed catalog tree.
pub fn load_catalog_tree(tree: Value) -> Result<Loaded<Catalog>, Diagnostics> {
    let doc: CatalogDocument = serde_path_to_error::deserialize(tree).map_err(|e| {
        let path = path_to_pointer(e.path());
        let inner = e.into_inner().to_string();
        let kind = if inner.starts_with("unknown field") {
            DiagnosticKind::UnknownKey
        } else {
            DiagnosticKind::Schema
        };
        Diagnostics::from(Diagnostic::error(kind, path, inner))
    })?;
    Validator::default().run(doc)
}

fn path_to_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out = match seg {
            Segment::Seq { index } => pointer(&out, index),
            Segment::Map { key } => pointer(&out, key),
            Segment::Enum { variant } => pointer(&out, variant),
            Segment::Unknown => pointer(&out, "?"),
        };
    }
    out
}

#[derive(Default)]
struct Validator {
    diags: Diagnostics,
}

impl Validator {
    fn error(&mut self, kind: DiagnosticKind, path: String, message: impl Into<String>) {
        self.diags.push(Diagnostic::error(kind, path, message));
    }

    fn parse<T: FromStr<Err = ParseError>>(&mut self, path: String, value: &str) -> Option<T> {
        match value.parse::<T>() {
            Ok(v) => Some(v),
            Err(e) => {
                self.error(DiagnosticKind::Schema, path, e.to_string());
                None
            }
        }
    }

    fn non_empty(&mut self, path: String, value: &str, what: &str) {
        if value.trim().is_empty() {
            self.error(DiagnosticKind::Schema, path, format!("{what} must not be empty"));
        }
    }

    fn run(mut self, doc: CatalogDocument) -> Result<Loaded<Catalog>, Diagnostics> {
        self.non_empty("/version".into(), &doc.version, "version");
        let assets = self.assets(&doc.assets);
        let agents = self.agents(&doc.agents);
        let mut controls = self.controls(&doc.controls);
        let asset_ids: BTreeSet<AssetId> = assets.iter().map(|a| a.id.clone()).collect();
        let agent_ids: BTreeSet<AgentId> = agents.iter().map(|a| a.id.clone()).collect();
        let entries = self.entries(&doc.entries, &asset_ids, &agent_ids, &controls);
        self.link_controls(&mut controls, &entries);
        let coverage = self.coverage(&doc.coverage);
        let applicability = self.applicability(&doc.applicability);
        let aspects = self.aspects(&doc.aspects);
        let toolchain = self.toolchain(&doc.toolchain, &entries);
        let incidents = self.incidents(&doc.incidents);
        let heuristics = self.heuristics(&doc.heuristics, &entries);

        let version = doc.version;
        self.diags.finish(move || Catalog {
            version,
            assets,
            agents,
            controls,
            entries,
            coverage: coverage.expect("coverage validated"),
            applicability,
            aspects,
            toolchain,
            incidents,
            heuristics,
        })
    }

    fn assets(&mut self, docs: &[AssetDoc]) -> Vec<AssetRef> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (i, a) in docs.iter().enumerate() {
            let path = pointer("/assets", i);
            self.non_empty(pointer(&path, "description"), &a.description, "asset description");
            let Some(id) = self.parse::<AssetId>(pointer(&path, "id"), &a.id) else {
                continue;
            };
            if !seen.insert(id.clone()) {
                self.error(DiagnosticKind::Duplicate, pointer(&path, "id"), format!("duplicate asset id {id}"));
                continue;
            }
            out.push(AssetRef {
                id,
                description: a.description.clone(),
            });
        }
        out
    }

    fn agents(&mut self, docs: &[AgentDoc]) -> Vec<ThreatAgentRef> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (i, a) in docs.iter().enumerate() {
            let path = pointer("/agents", i);
            self.non_empty(pointer(&path, "name"), &a.name, "agent name");
            let Some(id) = self.parse::<AgentId>(pointer(&path, "id"), &a.id) else {
                continue;
            };
            if !seen.insert(id.clone()) {
                self.error(DiagnosticKind::Duplicate, pointer(&path, "id"), format!("duplicate agent id {id}"));
                continue;
            }
            out.push(ThreatAgentRef {
                id,
                name: a.name.clone(),
                description: a.description.clone(),
            });
        }
        out
    }

    fn controls(&mut self, docs: &[ControlDoc]) -> ControlRegistry {
        let mut registry = ControlRegistry::default();
        for (i, c) in docs.iter().enumerate() {
            let path = pointer("/controls", i);
            self.non_empty(pointer(&path, "text"), &c.text, "control text");
            let control_type = match c.control_type.as_str() {
                "preventive" => Some(ControlType::Preventive),
                "detective" => Some(ControlType::Detective),
                "corrective" => Some(ControlType::Corrective),
                other => {
                    self.error(
                        DiagnosticKind::Schema,
                        pointer(&path, "control_type"),
                        format!("unknown control type {other:?}; expected preventive, detective or corrective"),
                    );
                    None
                }
            };
            let classification = match c.classification.as_str() {
                "transcribed" => Some(Provenance::Transcribed),
                "editorial" => Some(Provenance::Editorial),
                other => {
                    self.error(
                        DiagnosticKind::Schema,
                        pointer(&path, "classification"),
                        format!("unknown classification {other:?}; expected transcribed or editorial"),
                    );
                    None
                }
            };
            let id = self.parse::<ControlId>(pointer(&path, "id"), &c.id);
            let (Some(id), Some(control_type), Some(classification)) = (id, control_type, classification) else {
                continue;
            };
            if registry.index.contains_key(&id) {
                self.error(DiagnosticKind::Duplicate, pointer(&path, "id"), format!("duplicate control id {id}"));
                continue;
            }
            registry.index.insert(id.clone(), registry.controls.len());
            registry.controls.push(ControlDescriptor {
                id,
                text: c.text.clone(),
                control_type,
                classification,
                source_threats: Vec::new(),
            });
        }
        registry
    }

    fn entries(
        &mut self,
        docs: &[EntryDoc],
        assets: &BTreeSet<AssetId>,
        agents: &BTreeSet<AgentId>,
        controls: &ControlRegistry,
    ) -> Vec<ThreatCatalogEntry> {
        let mut keys = HashSet::new();
        let mut out = Vec::new();
        for (i, e) in docs.iter().enumerate() {
            let path = pointer("/entries", i);
            let errors_before = self.diags.errors().count();

            let threat_id = self.parse::<ThreatId>(pointer(&path, "threat_id"), &e.threat_id);
            let stage = match PipelineStage::parse_canonical(&e.stage) {
                Ok(s) => Some(s),
                Err(err) => {
                    self.error(DiagnosticKind::Schema, pointer(&path, "stage"), err.to_string());
                    None
                }
            };
            let key = threat_id.zip(stage).map(|(threat_id, stage)| ThreatKey { threat_id, stage });
            if let Some(key) = key {
                if !keys.insert(key) {
                    self.error(DiagnosticKind::Duplicate, path.clone(), format!("duplicate entry key {key}"));
                }
            }

            let entry_assets = self.id_list::<AssetId>(&pointer(&path, "assets"), &e.assets, assets, "asset");
            let entry_agents = self.id_list::<AgentId>(&pointer(&path, "agents"), &e.agents, agents, "agent");
            let mut agent_notes = BTreeMap::new();
            for (k, note) in &e.agent_notes {
                let p = pointer(&pointer(&path, "agent_notes"), k);
                if let Some(id) = self.parse::<AgentId>(p.clone(), k) {
                    if !entry_agents.contains(&id) {
                        self.error(DiagnosticKind::DanglingReference, p, format!("note for agent {id} which the entry does not list"));
                    } else {
                        agent_notes.insert(id, note.clone());
                    }
                }
            }

            let stride = match parse_stride_flags(&e.stride) {
                Ok(s) if s.is_empty() => {
                    self.error(DiagnosticKind::Invariant, pointer(&path, "stride"), "entry must flag at least one STRIDE category");
                    s
                }
                Ok(s) => s,
                Err(err) => {
                    self.error(DiagnosticKind::Schema, pointer(&path, "stride"), err.to_string());
                    Default::default()
                }
            };
            self.non_empty(pointer(&path, "description"), &e.description, "threat description");

            let owasp = e
                .owasp
                .iter()
                .enumerate()
                .filter_map(|(j, o)| {
                    let code = self.parse::<OwaspCode>(pointer(&pointer(&pointer(&path, "owasp"), j), "code"), &o.code)?;
                    Some(OwaspCategory {
                        code,
                        name: o.name.clone(),
                    })
                })
                .collect();

            let mut entry_controls: Vec<ControlId> = Vec::new();
            for (j, c) in e.controls.iter().enumerate() {
                let p = pointer(&pointer(&path, "controls"), j);
                let Some(id) = self.parse::<ControlId>(p.clone(), c) else {
                    continue;
                };
                if !controls.contains(&id) {
                    self.error(DiagnosticKind::DanglingReference, p, format!("control {id:?} is not in the control registry"));
                } else if entry_controls.contains(&id) {
                    self.error(DiagnosticKind::Duplicate, p, format!("control {id} listed twice"));
                } else {
                    entry_controls.push(id);
                }
            }

            let mut slsa_levels = BTreeSet::new();
            for (j, l) in e.slsa_levels.iter().enumerate() {
                let p = pointer(&pointer(&path, "slsa_levels"), j);
                match self.parse::<SlsaLevel>(p.clone(), l) {
                    Some(SlsaLevel::L0) => self.error(DiagnosticKind::Schema, p, "L0 cannot be listed as a mitigating level"),
                    Some(level) => {
                        slsa_levels.insert(level);
                    }
                    None => {}
                }
            }

            let mut ssdf: Vec<SsdfPracticeId> = Vec::new();
            for (j, s) in e.ssdf.iter().enumerate() {
                let p = pointer(&pointer(&path, "ssdf"), j);
                let Some(id) = self.parse::<SsdfPracticeId>(p.clone(), s) else {
                    continue;
                };
                if ssdf.contains(&id) {
                    self.diags.push(Diagnostic::info(
                        DiagnosticKind::Deduplicated,
                        p,
                        format!("SSDF practice {id} listed more than once; kept first occurrence"),
                    ));
                } else {
                    ssdf.push(id);
                }
            }
            if e.ssdf.is_empty() {
                self.error(DiagnosticKind::Invariant, pointer(&path, "ssdf"), "entry must list at least one SSDF practice");
            }

            if self.diags.errors().count() > errors_before {
                continue;
            }
            if let Some(key) = key {
                out.push(ThreatCatalogEntry {
                    key,
                    assets: entry_assets,
                    agents: entry_agents,
                    agent_notes,
                    stride,
                    description: e.description.clone(),
                    owasp,
                    controls: entry_controls,
                    slsa_levels,
                    ssdf,
                });
            }
        }
        out
    }

    fn id_list<T>(&mut self, path: &str, raw: &[String], known: &BTreeSet<T>, what: &str) -> Vec<T>
    where
        T: FromStr<Err = ParseError> + Ord + Clone + std::fmt::Display,
    {
        let mut out: Vec<T> = Vec::new();
        if raw.is_empty() {
            self.error(DiagnosticKind::Invariant, path.to_string(), format!("entry must list at least one {what}"));
        }
        for (j, s) in raw.iter().enumerate() {
            let p = pointer(path, j);
            let Some(id) = self.parse::<T>(p.clone(), s) else {
                continue;
            };
            if !known.contains(&id) {
                self.error(DiagnosticKind::DanglingReference, p, format!("{what} {id} is not defined in the catalog"));
            } else if out.contains(&id) {
                self.error(DiagnosticKind::Duplicate, p, format!("{what} {id} listed twice"));
            } else {
                out.push(id);
            }
        }
        out
    }

    fn link_controls(&mut self, registry: &mut ControlRegistry, entries: &[ThreatCatalogEntry]) {
        for e in entries {
            for id in &e.controls {
                if let Some(&i) = registry.index.get(id) {
                    registry.controls[i].source_threats.push(e.key);
                }
            }
        }
        // Only meaningful when every entry survived validation.
        if self.diags.has_errors() {
            return;
        }
        for (i, c) in registry.controls.iter().enumerate() {
            if c.source_threats.is_empty() {
                self.error(
                    DiagnosticKind::Invariant,
                    pointer(&pointer("/controls", i), "id"),
                    format!("control {} is not referenced by any entry", c.id),
                );
            }
        }
    }

    fn coverage(&mut self, rows: &[CoverageRowDoc]) -> Option<SlsaStrideCoverage> {
        let mut cells = BTreeMap::new();
        let mut gap_notes = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (i, row) in rows.iter().enumerate() {
            let path = pointer("/coverage", i);
            let Some(cat) = self.parse::<StrideCategory>(pointer(&path, "stride"), &row.stride) else {
                continue;
            };
            if !seen.insert(cat) {
                self.error(DiagnosticKind::Duplicate, pointer(&path, "stride"), format!("duplicate coverage row for {cat}"));
                continue;
            }
            gap_notes.insert(cat, row.gap.clone());
            let cells_path = pointer(&path, "cells");
            for key in row.cells.keys() {
                if !SlsaLevel::GRADED.iter().any(|l| l.as_str() == key) {
                    self.error(DiagnosticKind::UnknownKey, pointer(&cells_path, key), format!("unexpected coverage level {key:?}; expected L1..L4"));
                }
            }
            for level in SlsaLevel::GRADED {
                match row.cells.get(level.as_str()) {
                    None => self.error(
                        DiagnosticKind::MissingCell,
                        pointer(&cells_path, level),
                        format!("coverage cell ({cat}, {level}) is missing"),
                    ),
                    Some(v) => match Coverage::parse(v) {
                        Some(c) => {
                            cells.insert((cat, level), c);
                        }
                        None => self.error(
                            DiagnosticKind::Schema,
                            pointer(&cells_path, level),
                            format!("unknown coverage value {v:?}; expected none, partial or full"),
                        ),
                    },
                }
            }
        }
        for cat in StrideCategory::ALL {
            if !seen.contains(&cat) {
                for level in SlsaLevel::GRADED {
                    self.error(
                        DiagnosticKind::MissingCell,
                        "/coverage".into(),
                        format!("coverage cell ({cat}, {level}) is missing"),
                    );
                }
            }
        }
        let coverage = SlsaStrideCoverage { cells, gap_notes };
        for (cat, lo, hi) in coverage.monotonicity_violations() {
            let row = rows.iter().position(|r| r.stride.parse::<StrideCategory>().ok() == Some(cat)).unwrap_or_default();
            self.diags.push(Diagnostic::warning(
                DiagnosticKind::Invariant,
                pointer(&pointer(&pointer("/coverage", row), "cells"), hi),
                format!(
                    "{cat} coverage drops from {} at {lo} to {} at {hi}",
                    coverage.get(cat, lo).as_str(),
                    coverage.get(cat, hi).as_str()
                ),
            ));
        }
        (coverage.cells.len() == 24).then_some(coverage)
    }

    fn applicability(&mut self, docs: &[ApplicabilityDoc]) -> Vec<StageApplicability> {
        if docs.len() != APPLICABILITY_ROWS {
            self.error(
                DiagnosticKind::Invariant,
                "/applicability".into(),
                format!("expected {APPLICABILITY_ROWS} stage rows, found {}", docs.len()),
            );
        }
        let mut out = Vec::new();
        for (i, a) in docs.iter().enumerate() {
            let path = pointer("/applicability", i);
            self.non_empty(pointer(&path, "stage_label"), &a.stage_label, "stage label");
            let stage = match PipelineStage::parse_canonical(&a.stage) {
                Ok(s) => Some(s),
                Err(e) => {
                    self.error(DiagnosticKind::Schema, pointer(&path, "stage"), e.to_string());
                    None
                }
            };
            let applies_path = pointer(&path, "slsa_applies");
            let levels: BTreeSet<SlsaLevel> = a
                .slsa_applies
                .levels
                .iter()
                .enumerate()
                .filter_map(|(j, l)| self.parse(pointer(&pointer(&applies_path, "levels"), j), l))
                .collect();
            let applies = match a.slsa_applies.kind.as_str() {
                "no" if levels.is_empty() => Some(SlsaApplicability::No),
                "partial" if !levels.is_empty() => Some(SlsaApplicability::Partial(levels)),
                "yes" if !levels.is_empty() => Some(SlsaApplicability::Yes(levels)),
                "no" | "partial" | "yes" => {
                    self.error(
                        DiagnosticKind::Schema,
                        pointer(&applies_path, "levels"),
                        "levels must be empty for \"no\" and non-empty otherwise",
                    );
                    None
                }
                other => {
                    self.error(
                        DiagnosticKind::Schema,
                        pointer(&applies_path, "kind"),
                        format!("unknown applicability {other:?}; expected no, partial or yes"),
                    );
                    None
                }
            };
            if let (Some(stage), Some(slsa_applies)) = (stage, applies) {
                out.push(StageApplicability {
                    stage_label: a.stage_label.clone(),
                    stage,
                    typical_threats: a.typical_threats.clone(),
                    slsa_applies,
                    stride_required: a.stride_required,
                });
            }
        }
        out
    }

    fn aspects(&mut self, docs: &[AspectDoc]) -> Vec<AspectGap> {
        if docs.len() != ASPECT_ROWS {
            self.error(
                DiagnosticKind::Invariant,
                "/aspects".into(),
                format!("expected {ASPECT_ROWS} aspect rows, found {}", docs.len()),
            );
        }
        docs.iter()
            .map(|a| AspectGap {
                aspect: a.aspect.clone(),
                slsa_coverage: a.slsa_coverage.clone(),
                gap: a.gap.clone(),
            })
            .collect()
    }

    fn toolchain(&mut self, docs: &[ToolchainDoc], entries: &[ThreatCatalogEntry]) -> Vec<ToolchainEntry> {
        let known: BTreeSet<ThreatId> = entries.iter().map(|e| e.key.threat_id).collect();
        let mut covered = BTreeSet::new();
        let mut out = Vec::new();
        for (i, t) in docs.iter().enumerate() {
            let path = pointer("/toolchain", i);
            let threat_id = self.parse::<ThreatId>(pointer(&path, "threat_id"), &t.threat_id);
            if let Some(id) = threat_id {
                if !known.contains(&id) {
                    self.error(DiagnosticKind::DanglingReference, pointer(&path, "threat_id"), format!("no catalog entry has threat id {id}"));
                }
                covered.insert(id);
            }
            self.non_empty(pointer(&path, "objective"), &t.objective, "objective");
            let stages: Vec<PipelineStage> = t
                .stages
                .iter()
                .enumerate()
                .filter_map(|(j, s)| self.parse(pointer(&pointer(&path, "stages"), j), s))
                .collect();
            if let Some(threat_id) = threat_id {
                out.push(ToolchainEntry {
                    threat_id,
                    objective: t.objective.clone(),
                    tools_text: t.tools.clone(),
                    stages,
                });
            }
        }
        for id in known.difference(&covered) {
            self.error(DiagnosticKind::Invariant, "/toolchain".into(), format!("threat {id} has no toolchain recommendation"));
        }
        out
    }

    fn incidents(&mut self, docs: &[IncidentDoc]) -> Vec<IncidentAnnotation> {
        let out: Vec<IncidentAnnotation> = docs
            .iter()
            .enumerate()
            .filter_map(|(i, d)| {
                let stride = self.parse(pointer(&pointer("/incidents", i), "stride"), &d.stride)?;
                Some(IncidentAnnotation {
                    stride,
                    incident_name: d.incident.clone(),
                    year: d.year,
                    summary: d.summary.clone(),
                })
            })
            .collect();
        for cat in StrideCategory::ALL {
            if !out.iter().any(|i| i.stride == cat) {
                self.diags.push(Diagnostic::warning(
                    DiagnosticKind::Invariant,
                    "/incidents",
                    format!("no incident annotation for {cat}"),
                ));
            }
        }
        out
    }

    fn heuristics(&mut self, docs: &[HeuristicDoc], entries: &[ThreatCatalogEntry]) -> Vec<IndicatorHeuristic> {
        let mut ids = HashSet::new();
        let mut out = Vec::new();
        for (i, h) in docs.iter().enumerate() {
            let path = pointer("/heuristics", i);
            if !ids.insert(h.id.as_str()) {
                self.error(DiagnosticKind::Duplicate, pointer(&path, "id"), format!("duplicate heuristic id {:?}", h.id));
            }
            let kind = HeuristicKind::ALL.into_iter().find(|k| k.as_str() == h.kind);
            if kind.is_none() {
                self.error(DiagnosticKind::Schema, pointer(&path, "kind"), format!("unknown heuristic kind {:?}", h.kind));
            }
            if let Some(k) = kind {
                match (&h.pattern, k.needs_pattern()) {
                    (None, true) => self.error(DiagnosticKind::Schema, pointer(&path, "pattern"), format!("{} heuristics need a pattern", k.as_str())),
                    (Some(_), false) => self.error(DiagnosticKind::Schema, pointer(&path, "pattern"), format!("{} heuristics take no pattern", k.as_str())),
                    (Some(p), true) => {
                        if let Err(e) = regex::Regex::new(p) {
                            self.error(DiagnosticKind::Schema, pointer(&path, "pattern"), format!("invalid regex: {e}"));
                        }
                    }
                    (None, false) => {}
                }
            }
            let suggests = self.parse::<ThreatKey>(pointer(&path, "suggests"), &h.suggests);
            if let Some(key) = suggests {
                if !entries.iter().any(|e| e.key == key) {
                    self.error(DiagnosticKind::DanglingReference, pointer(&path, "suggests"), format!("no catalog entry {key}"));
                }
            }
            let confidence = Confidence::parse(&h.confidence);
            if confidence.is_none() {
                self.error(DiagnosticKind::Schema, pointer(&path, "confidence"), format!("unknown confidence {:?}; expected low, medium or high", h.confidence));
            }
            if let (Some(kind), Some(suggests), Some(confidence)) = (kind, suggests, confidence) {
                out.push(IndicatorHeuristic {
                    id: h.id.clone(),
                    kind,
                    pattern: h.pattern.clone(),
                    suggests,
                    confidence,
                    description: h.description.clone(),
                });
            }
        }
        out
    }
}
