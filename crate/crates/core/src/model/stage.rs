use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ParseError;

/// A pipeline stage.
///
/// The first four variants are canonical and are the only ones threat
/// entries and pipeline models may use. The remaining variants only appear
/// in toolchain recommendations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineStage {
    Source,
    Build,
    Deployment,
    Monitoring,
    ArtifactStorage,
    Runtime,
    AccessControl,
}

impl PipelineStage {
    pub const CANONICAL: [PipelineStage; 4] = [
        PipelineStage::Source,
        PipelineStage::Build,
        PipelineStage::Deployment,
        PipelineStage::Monitoring,
    ];

    pub const ALL: [PipelineStage; 7] = [
        PipelineStage::Source,
        PipelineStage::Build,
        PipelineStage::Deployment,
        PipelineStage::Monitoring,
        PipelineStage::ArtifactStorage,
        PipelineStage::Runtime,
        PipelineStage::AccessControl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PipelineStage::Source => "source",
            PipelineStage::Build => "build",
            PipelineStage::Deployment => "deployment",
            PipelineStage::Monitoring => "monitoring",
            PipelineStage::ArtifactStorage => "artifact-storage",
            PipelineStage::Runtime => "runtime",
            PipelineStage::AccessControl => "access-control",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PipelineStage::Source => "Source",
            PipelineStage::Build => "Build",
            PipelineStage::Deployment => "Deployment",
            PipelineStage::Monitoring => "Monitoring",
            PipelineStage::ArtifactStorage => "Artifact Storage",
            PipelineStage::Runtime => "Runtime",
            PipelineStage::AccessControl => "Access Control",
        }
    }

    pub fn is_canonical(self) -> bool {
        PipelineStage::CANONICAL.contains(&self)
    }

    /// Parses a canonical stage only, suggesting the nearest canonical name.
    pub fn parse_canonical(s: &str) -> Result<Self, ParseError> {
        match s.parse::<PipelineStage>() {
            Ok(stage) if stage.is_canonical() => Ok(stage),
            _ => Err(ParseError::unknown(
                "pipeline stage",
                s,
                &PipelineStage::CANONICAL.map(PipelineStage::as_str),
            )),
        }
    }
}

impl fmt::Display for PipelineStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PipelineStage {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PipelineStage::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| ParseError::unknown("pipeline stage", s, &PipelineStage::ALL.map(PipelineStage::as_str)))
    }
}
