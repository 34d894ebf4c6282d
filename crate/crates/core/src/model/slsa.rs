use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ParseError;

/// SLSA assurance level. `L0` is the explicit "no assurance" baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SlsaLevel {
    L0,
    L1,
    L2,
    L3,
    L4,
}

impl SlsaLevel {
    pub const ALL: [SlsaLevel; 5] = [
        SlsaLevel::L0,
        SlsaLevel::L1,
        SlsaLevel::L2,
        SlsaLevel::L3,
        SlsaLevel::L4,
    ];

    /// The four levels defined by SLSA itself (everything except `L0`).
    pub const GRADED: [SlsaLevel; 4] = [SlsaLevel::L1, SlsaLevel::L2, SlsaLevel::L3, SlsaLevel::L4];

    pub fn as_str(self) -> &'static str {
        match self {
            SlsaLevel::L0 => "L0",
            SlsaLevel::L1 => "L1",
            SlsaLevel::L2 => "L2",
            SlsaLevel::L3 => "L3",
            SlsaLevel::L4 => "L4",
        }
    }

    pub fn rank(self) -> u8 {
        self as u8
    }

    /// The capability that must be present to reach this level.
    pub fn required_capability(self) -> Option<SlsaCapability> {
        SlsaCapability::ALL.into_iter().find(|c| c.level() == self)
    }
}

impl fmt::Display for SlsaLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SlsaLevel {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SlsaLevel::ALL
            .into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ParseError::unknown("SLSA level", s, &SlsaLevel::ALL.map(SlsaLevel::as_str)))
    }
}

/// A build-system capability that unlocks one SLSA level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlsaCapability {
    ScriptedBuild,
    HostedBuildProvenance,
    HardenedBuildVerifiableProvenance,
    HermeticReproducible,
}

impl SlsaCapability {
    pub const ALL: [SlsaCapability; 4] = [
        SlsaCapability::ScriptedBuild,
        SlsaCapability::HostedBuildProvenance,
        SlsaCapability::HardenedBuildVerifiableProvenance,
        SlsaCapability::HermeticReproducible,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SlsaCapability::ScriptedBuild => "scripted_build",
            SlsaCapability::HostedBuildProvenance => "hosted_build_provenance",
            SlsaCapability::HardenedBuildVerifiableProvenance => {
                "hardened_build_verifiable_provenance"
            }
            SlsaCapability::HermeticReproducible => "hermetic_reproducible",
        }
    }

    pub fn level(self) -> SlsaLevel {
        match self {
            SlsaCapability::ScriptedBuild => SlsaLevel::L1,
            SlsaCapability::HostedBuildProvenance => SlsaLevel::L2,
            SlsaCapability::HardenedBuildVerifiableProvenance => SlsaLevel::L3,
            SlsaCapability::HermeticReproducible => SlsaLevel::L4,
        }
    }
}

impl fmt::Display for SlsaCapability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SlsaCapability {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SlsaCapability::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| {
                ParseError::unknown("SLSA capability", s, &SlsaCapability::ALL.map(SlsaCapability::as_str))
            })
    }
}

/// Highest level whose capabilities, and those of every level below it, are
/// all present.
pub fn slsa_level_from_capabilities(caps: &BTreeSet<SlsaCapability>) -> SlsaLevel {
    SlsaCapability::ALL
        .into_iter()
        .take_while(|c| caps.contains(c))
        .last()
        .map_or(SlsaLevel::L0, SlsaCapability::level)
}

/// True when the set is a prefix of the capability ladder (possibly empty).
pub fn capabilities_contiguous(caps: &BTreeSet<SlsaCapability>) -> bool {
    let attained = slsa_level_from_capabilities(caps).rank() as usize;
    caps.len() == attained
}
