//! Wire schema of the catalog data file.
//!
//! Enumerated fields are plain strings here so that validation can report
//! every bad value with its path instead of stopping at the first one.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Catalog, SlsaApplicability};
use crate::model::{format_stride_flags, SlsaLevel, StrideCategory};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogDocument {
    pub version: String,
    pub assets: Vec<AssetDoc>,
    pub agents: Vec<AgentDoc>,
    pub controls: Vec<ControlDoc>,
    pub entries: Vec<EntryDoc>,
    pub coverage: Vec<CoverageRowDoc>,
    pub applicability: Vec<ApplicabilityDoc>,
    pub aspects: Vec<AspectDoc>,
    pub toolchain: Vec<ToolchainDoc>,
    pub incidents: Vec<IncidentDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub heuristics: Vec<HeuristicDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetDoc {
    pub id: String,
    pub description: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentDoc {
    pub id: String,
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlDoc {
    pub id: String,
    pub text: String,
    pub control_type: String,
    pub classification: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDoc {
    pub threat_id: String,
    pub stage: String,
    pub assets: Vec<String>,
    pub agents: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub agent_notes: BTreeMap<String, String>,
    /// Six-character `Y`/`N` checklist in S, T, R, I, D, E order.
    pub stride: String,
    pub description: String,
    pub owasp: Vec<OwaspDoc>,
    pub controls: Vec<String>,
    pub slsa_levels: Vec<String>,
    pub ssdf: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OwaspDoc {
    pub code: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageRowDoc {
    pub stride: String,
    /// Level (`L1`..`L4`) to `none` / `partial` / `full`.
    pub cells: BTreeMap<String, String>,
    pub gap: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApplicabilityDoc {
    pub stage_label: String,
    pub stage: String,
    pub typical_threats: String,
    pub slsa_applies: SlsaAppliesDoc,
    pub stride_required: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlsaAppliesDoc {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AspectDoc {
    pub aspect: String,
    pub slsa_coverage: String,
    pub gap: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolchainDoc {
    pub threat_id: String,
    pub objective: String,
    pub tools: String,
    pub stages: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentDoc {
    pub stride: String,
    pub incident: String,
    pub year: i32,
    pub summary: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeuristicDoc {
    pub id: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    pub suggests: String,
    pub confidence: String,
    pub description: String,
}

fn strings<T: ToString>(items: impl IntoIterator<Item = T>) -> Vec<String> {
    items.into_iter().map(|i| i.to_string()).collect()
}

impl From<&Catalog> for CatalogDocument {
    fn from(c: &Catalog) -> Self {
        CatalogDocument {
            version: c.version.clone(),
            assets: c
                .assets
                .iter()
                .map(|a| AssetDoc {
                    id: a.id.to_string(),
                    description: a.description.clone(),
                })
                .collect(),
            agents: c
                .agents
                .iter()
                .map(|a| AgentDoc {
                    id: a.id.to_string(),
                    name: a.name.clone(),
                    description: a.description.clone(),
                })
                .collect(),
            controls: c
                .controls
                .iter()
                .map(|d| ControlDoc {
                    id: d.id.to_string(),
                    text: d.text.clone(),
                    control_type: d.control_type.as_str().to_string(),
                    classification: match d.classification {
                        crate::model::Provenance::Transcribed => "transcribed".into(),
                        crate::model::Provenance::Editorial => "editorial".into(),
                    },
                })
                .collect(),
            entries: c
                .entries
                .iter()
                .map(|e| EntryDoc {
                    threat_id: e.key.threat_id.to_string(),
                    stage: e.key.stage.to_string(),
                    assets: strings(&e.assets),
                    agents: strings(&e.agents),
                    agent_notes: e
                        .agent_notes
                        .iter()
                        .map(|(k, v)| (k.to_string(), v.clone()))
                        .collect(),
                    stride: format_stride_flags(&e.stride),
                    description: e.description.clone(),
                    owasp: e
                        .owasp
                        .iter()
                        .map(|o| OwaspDoc {
                            code: o.code.to_string(),
                            name: o.name.clone(),
                        })
                        .collect(),
                    controls: strings(&e.controls),
                    slsa_levels: strings(&e.slsa_levels),
                    ssdf: strings(&e.ssdf),
                })
                .collect(),
            coverage: StrideCategory::ALL
                .into_iter()
                .map(|cat| CoverageRowDoc {
                    stride: cat.to_string(),
                    cells: SlsaLevel::GRADED
                        .into_iter()
                        .map(|l| (l.to_string(), c.coverage.get(cat, l).as_str().to_string()))
                        .collect(),
                    gap: c.coverage.gap_note(cat).to_string(),
                })
                .collect(),
            applicability: c
                .applicability
                .iter()
                .map(|a| {
                    let (kind, levels) = match &a.slsa_applies {
                        SlsaApplicability::No => ("no", Vec::new()),
                        SlsaApplicability::Partial(l) => ("partial", strings(l)),
                        SlsaApplicability::Yes(l) => ("yes", strings(l)),
                    };
                    ApplicabilityDoc {
                        stage_label: a.stage_label.clone(),
                        stage: a.stage.to_string(),
                        typical_threats: a.typical_threats.clone(),
                        slsa_applies: SlsaAppliesDoc {
                            kind: kind.into(),
                            levels,
                        },
                        stride_required: a.stride_required,
                    }
                })
                .collect(),
            aspects: c
                .aspects
                .iter()
                .map(|a| AspectDoc {
                    aspect: a.aspect.clone(),
                    slsa_coverage: a.slsa_coverage.clone(),
                    gap: a.gap.clone(),
                })
                .collect(),
            toolchain: c
                .toolchain
                .iter()
                .map(|t| ToolchainDoc {
                    threat_id: t.threat_id.to_string(),
                    objective: t.objective.clone(),
                    tools: t.tools_text.clone(),
                    stages: strings(&t.stages),
                })
                .collect(),
            incidents: c
                .incidents
                .iter()
                .map(|i| IncidentDoc {
                    stride: i.stride.to_string(),
                    incident: i.incident_name.clone(),
                    year: i.year,
                    summary: i.summary.clone(),
                })
                .collect(),
            heuristics: c
                .heuristics
                .iter()
                .map(|h| HeuristicDoc {
                    id: h.id.clone(),
                    kind: h.kind.as_str().to_string(),
                    pattern: h.pattern.clone(),
                    suggests: h.suggests.to_string(),
                    confidence: h.confidence.as_str().to_string(),
                    description: h.description.clone(),
                })
                .collect(),
        }
    }
}
