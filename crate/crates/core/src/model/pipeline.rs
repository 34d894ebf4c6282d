use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{AgentId, AssetId, ControlId, PipelineStage, SlsaCapability, SlsaLevel, ThreatKey};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssetRef {
    pub id: AssetId,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreatAgentRef {
    pub id: AgentId,
    pub name: String,
    pub description: String,
}

/// Name and description of a custom (`TAX-`) agent declared in a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentProfile {
    pub name: String,
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ControlType {
    Preventive,
    Detective,
    Corrective,
}

impl ControlType {
    pub fn as_str(self) -> &'static str {
        match self {
            ControlType::Preventive => "preventive",
            ControlType::Detective => "detective",
            ControlType::Corrective => "corrective",
        }
    }
}

/// Where a catalog value came from: transcribed from the source tables, or
/// assigned by the catalog maintainers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Transcribed,
    Editorial,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlDescriptor {
    pub id: ControlId,
    pub text: String,
    pub control_type: ControlType,
    /// Provenance of `control_type`.
    pub classification: Provenance,
    /// Entries that list this control, in catalog order. Derived at load.
    pub source_threats: Vec<ThreatKey>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DataFlow {
    pub from: String,
    pub to: String,
    pub label: String,
    pub crosses_boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrustBoundary {
    pub name: String,
    pub members: BTreeSet<String>,
    /// Nested boundaries may share members with other boundaries.
    pub nested: bool,
}

/// A validated, user-authored description of one CI/CD pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PipelineModel {
    pub name: String,
    pub stages: BTreeSet<PipelineStage>,
    pub assets: BTreeSet<AssetId>,
    pub agents: BTreeSet<AgentId>,
    /// Descriptions of `ASX-` assets declared inline by the model.
    pub custom_assets: BTreeMap<AssetId, String>,
    pub custom_agents: BTreeMap<AgentId, AgentProfile>,
    pub controls: BTreeSet<ControlId>,
    pub slsa_capabilities: BTreeSet<SlsaCapability>,
    pub flows: Vec<DataFlow>,
    pub boundaries: Vec<TrustBoundary>,
}

impl PipelineModel {
    /// An empty model with the given name; not valid until it has a stage.
    pub fn named(name: impl Into<String>) -> Self {
        PipelineModel {
            name: name.into(),
            stages: BTreeSet::new(),
            assets: BTreeSet::new(),
            agents: BTreeSet::new(),
            custom_assets: BTreeMap::new(),
            custom_agents: BTreeMap::new(),
            controls: BTreeSet::new(),
            slsa_capabilities: BTreeSet::new(),
            flows: Vec::new(),
            boundaries: Vec::new(),
        }
    }

    pub fn slsa_level(&self) -> SlsaLevel {
        super::slsa_level_from_capabilities(&self.slsa_capabilities)
    }

    /// Flow endpoints and boundary members, sorted.
    pub fn nodes(&self) -> BTreeSet<&str> {
        self.flows
            .iter()
            .flat_map(|f| [f.from.as_str(), f.to.as_str()])
            .chain(self.boundaries.iter().flat_map(|b| b.members.iter().map(String::as_str)))
            .collect()
    }
}
