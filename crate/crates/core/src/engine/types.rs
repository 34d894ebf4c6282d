use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::{Coverage, SlsaApplicability, ThreatCatalogEntry};
use crate::model::{AgentId, AssetId, ControlId, PipelineStage, SlsaLevel, StrideCategory, StrideSet, ThreatKey};

/// Schema tag of serialized audit reports.
pub const REPORT_VERSION: &str = "audit/1";

/// Human-readable statement of how priority scores are computed.
pub const PRIORITY_FORMULA: &str =
    "score = |stride| x |matched assets| for open findings, 0 when mitigated (tool heuristic, not a risk rating)";

/// A catalog entry instantiated against a model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreatFinding {
    pub entry_key: ThreatKey,
    pub matched_assets: BTreeSet<AssetId>,
    pub matched_agents: BTreeSet<AgentId>,
    pub stride: StrideSet,
    pub stage: PipelineStage,
}

/// Ordered from worst to best, so `a <= b` means `b` is at least as mitigated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MitigationStatus {
    Unmitigated,
    Partial,
    Mitigated,
}

impl MitigationStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MitigationStatus::Unmitigated => "Unmitigated",
            MitigationStatus::Partial => "Partial",
            MitigationStatus::Mitigated => "Mitigated",
        }
    }

    pub fn is_open(self) -> bool {
        self != MitigationStatus::Mitigated
    }
}

impl fmt::Display for MitigationStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exact fraction of satisfied mitigation units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoverageRatio {
    pub satisfied: u32,
    pub required: u32,
}

impl CoverageRatio {
    pub fn new(satisfied: u32, required: u32) -> Self {
        assert!(satisfied <= required, "ratio above one");
        CoverageRatio { satisfied, required }
    }

    /// Zero required units count as fully covered.
    pub fn as_f64(self) -> f64 {
        if self.required == 0 {
            1.0
        } else {
            f64::from(self.satisfied) / f64::from(self.required)
        }
    }

    fn normalized(self) -> (u64, u64) {
        if self.required == 0 {
            (1, 1)
        } else {
            (u64::from(self.satisfied), u64::from(self.required))
        }
    }
}

impl PartialOrd for CoverageRatio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Compares by value, so `1/2` and `2/4` are equal in order.
impl Ord for CoverageRatio {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = self.normalized();
        let (c, d) = other.normalized();
        (a * d).cmp(&(c * b))
    }
}

impl fmt::Display for CoverageRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.satisfied, self.required)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MitigationAssessment {
    pub finding: ThreatFinding,
    /// Snapshot of the matched catalog row, so reports render without the catalog.
    pub entry: ThreatCatalogEntry,
    /// In entry order.
    pub satisfied_controls: Vec<ControlId>,
    pub missing_controls: Vec<ControlId>,
    pub slsa_assist: bool,
    pub status: MitigationStatus,
    pub coverage_ratio: CoverageRatio,
}

impl MitigationAssessment {
    pub fn key(&self) -> ThreatKey {
        self.finding.entry_key
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlsaAssessment {
    pub attained: SlsaLevel,
    pub per_category: BTreeMap<StrideCategory, Coverage>,
    pub unaddressed: StrideSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageGap {
    pub stage_label: String,
    pub stage: PipelineStage,
    pub typical_threats: String,
    pub slsa_applies: SlsaApplicability,
    pub stride_required: bool,
    /// True when the row is not part of the catalog's applicability table.
    pub editorial: bool,
    pub open_findings: usize,
    pub stride_residual: StrideSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Priority {
    pub key: ThreatKey,
    pub score: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub version: String,
    pub model: String,
    pub catalog_version: String,
    pub stages: BTreeSet<PipelineStage>,
    pub findings: Vec<MitigationAssessment>,
    pub slsa: SlsaAssessment,
    pub stage_gaps: Vec<StageGap>,
    pub priorities: Vec<Priority>,
    pub priority_formula: String,
    /// Text of every control referenced by a finding.
    pub controls: BTreeMap<ControlId, String>,
}

impl AuditReport {
    pub fn count(&self, status: MitigationStatus) -> usize {
        self.findings.iter().filter(|f| f.status == status).count()
    }

    pub fn open_findings(&self) -> impl Iterator<Item = &MitigationAssessment> {
        self.findings.iter().filter(|f| f.status.is_open())
    }
}
