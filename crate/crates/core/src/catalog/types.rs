use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{
    AgentId, AssetId, ControlId, OwaspCategory, PipelineStage, SlsaLevel, SsdfPracticeId,
    StrideCategory, StrideSet, ThreatId, ThreatKey,
};

/// One row of the stage-wise threat/control traceability matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreatCatalogEntry {
    pub key: ThreatKey,
    /// In printed order.
    pub assets: Vec<AssetId>,
    pub agents: Vec<AgentId>,
    /// Sub-role annotations on listed agents, e.g. `TA2` as "DevOps Insider".
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub agent_notes: BTreeMap<AgentId, String>,
    pub stride: StrideSet,
    pub description: String,
    pub owasp: Vec<OwaspCategory>,
    pub controls: Vec<ControlId>,
    /// Empty means the row lists no SLSA level.
    pub slsa_levels: BTreeSet<SlsaLevel>,
    /// Deduplicated, first-occurrence order.
    pub ssdf: Vec<SsdfPracticeId>,
}

impl ThreatCatalogEntry {
    pub fn min_slsa_level(&self) -> Option<SlsaLevel> {
        self.slsa_levels.first().copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coverage {
    None,
    Partial,
    Full,
}

impl Coverage {
    pub fn as_str(self) -> &'static str {
        match self {
            Coverage::None => "none",
            Coverage::Partial => "partial",
            Coverage::Full => "full",
        }
    }

    pub fn parse(s: &str) -> Option<Coverage> {
        [Coverage::None, Coverage::Partial, Coverage::Full]
            .into_iter()
            .find(|c| c.as_str() == s)
    }
}

/// How far each SLSA level mitigates each STRIDE category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlsaStrideCoverage {
    pub(crate) cells: BTreeMap<(StrideCategory, SlsaLevel), Coverage>,
    pub(crate) gap_notes: BTreeMap<StrideCategory, String>,
}

impl SlsaStrideCoverage {
    /// Coverage at a level; `L0` provides none.
    pub fn get(&self, category: StrideCategory, level: SlsaLevel) -> Coverage {
        self.cells
            .get(&(category, level))
            .copied()
            .unwrap_or(Coverage::None)
    }

    pub fn gap_note(&self, category: StrideCategory) -> &str {
        self.gap_notes.get(&category).map_or("", String::as_str)
    }

    pub fn cells(&self) -> impl Iterator<Item = ((StrideCategory, SlsaLevel), Coverage)> + '_ {
        self.cells.iter().map(|(k, v)| (*k, *v))
    }

    /// `(category, lower, higher)` for every adjacent level pair where
    /// coverage drops.
    pub fn monotonicity_violations(&self) -> Vec<(StrideCategory, SlsaLevel, SlsaLevel)> {
        let mut out = Vec::new();
        for cat in StrideCategory::ALL {
            for pair in SlsaLevel::GRADED.windows(2) {
                if self.get(cat, pair[1]) < self.get(cat, pair[0]) {
                    out.push((cat, pair[0], pair[1]));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "levels", rename_all = "lowercase")]
pub enum SlsaApplicability {
    No,
    Partial(BTreeSet<SlsaLevel>),
    Yes(BTreeSet<SlsaLevel>),
}

impl fmt::Display for SlsaApplicability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (word, levels) = match self {
            SlsaApplicability::No => return f.write_str("No"),
            SlsaApplicability::Partial(l) => ("Partial", l),
            SlsaApplicability::Yes(l) => ("Yes", l),
        };
        match (levels.first(), levels.last()) {
            (Some(a), Some(b)) if a == b => write!(f, "{word} ({a})"),
            (Some(a), Some(b)) => write!(f, "{word} ({a}\u{2013}{b})"),
            _ => f.write_str(word),
        }
    }
}

/// One row of the per-stage SLSA/STRIDE applicability table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageApplicability {
    pub stage_label: String,
    /// The canonical stage this row is reported under.
    pub stage: PipelineStage,
    pub typical_threats: String,
    pub slsa_applies: SlsaApplicability,
    pub stride_required: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectGap {
    pub aspect: String,
    pub slsa_coverage: String,
    pub gap: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolchainEntry {
    pub threat_id: ThreatId,
    pub objective: String,
    pub tools_text: String,
    pub stages: Vec<PipelineStage>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidentAnnotation {
    pub stride: StrideCategory,
    pub incident_name: String,
    pub year: i32,
    pub summary: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Confidence {
    Low,
    Medium,
    High,
}

impl Confidence {
    pub fn as_str(self) -> &'static str {
        match self {
            Confidence::Low => "low",
            Confidence::Medium => "medium",
            Confidence::High => "high",
        }
    }

    pub fn parse(s: &str) -> Option<Confidence> {
        [Confidence::Low, Confidence::Medium, Confidence::High]
            .into_iter()
            .find(|c| c.as_str() == s)
    }
}

/// Detection strategy of an importer heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeuristicKind {
    /// `pattern` matched against every string value.
    SecretValue,
    /// `pattern` matched against variable names whose value is a literal.
    SecretAssignment,
    /// Action or image references without an immutable digest.
    UnpinnedReference,
    /// `pattern` matched against shell script lines.
    ScriptPattern,
    /// Push-triggered deployment without an environment gate.
    AutoDeployTrigger,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 5] = [
        HeuristicKind::SecretValue,
        HeuristicKind::SecretAssignment,
        HeuristicKind::UnpinnedReference,
        HeuristicKind::ScriptPattern,
        HeuristicKind::AutoDeployTrigger,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            HeuristicKind::SecretValue => "secret_value",
            HeuristicKind::SecretAssignment => "secret_assignment",
            HeuristicKind::UnpinnedReference => "unpinned_reference",
            HeuristicKind::ScriptPattern => "script_pattern",
            HeuristicKind::AutoDeployTrigger => "auto_deploy_trigger",
        }
    }

    pub fn needs_pattern(self) -> bool {
        matches!(
            self,
            HeuristicKind::SecretValue | HeuristicKind::SecretAssignment | HeuristicKind::ScriptPattern
        )
    }
}

/// An editorial workflow-import rule, tagged with the threat it suggests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndicatorHeuristic {
    pub id: String,
    pub kind: HeuristicKind,
    pub pattern: Option<String>,
    pub suggests: ThreatKey,
    pub confidence: Confidence,
    pub description: String,
}

/// Control descriptors with lookup by id, kept in catalog order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ControlRegistry {
    pub(crate) controls: Vec<crate::model::ControlDescriptor>,
    pub(crate) index: BTreeMap<ControlId, usize>,
}

impl ControlRegistry {
    pub fn get(&self, id: &ControlId) -> Option<&crate::model::ControlDescriptor> {
        self.index.get(id).map(|&i| &self.controls[i])
    }

    pub fn contains(&self, id: &ControlId) -> bool {
        self.index.contains_key(id)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, crate::model::ControlDescriptor> {
        self.controls.iter()
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &ControlId> {
        self.controls.iter().map(|c| &c.id)
    }
}
