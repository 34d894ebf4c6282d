use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ParseError;

/// One of the six STRIDE threat classes.
///
/// Declaration order is the checklist column order (S, T, R, I, D, E) and is
/// also the `Ord` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StrideCategory {
    Spoofing,
    Tampering,
    Repudiation,
    InformationDisclosure,
    DenialOfService,
    ElevationOfPrivilege,
}

pub type StrideSet = BTreeSet<StrideCategory>;

impl StrideCategory {
    pub const ALL: [StrideCategory; 6] = [
        StrideCategory::Spoofing,
        StrideCategory::Tampering,
        StrideCategory::Repudiation,
        StrideCategory::InformationDisclosure,
        StrideCategory::DenialOfService,
        StrideCategory::ElevationOfPrivilege,
    ];

    /// Canonical identifier, identical to the serde representation.
    pub fn as_str(self) -> &'static str {
        match self {
            StrideCategory::Spoofing => "Spoofing",
            StrideCategory::Tampering => "Tampering",
            StrideCategory::Repudiation => "Repudiation",
            StrideCategory::InformationDisclosure => "InformationDisclosure",
            StrideCategory::DenialOfService => "DenialOfService",
            StrideCategory::ElevationOfPrivilege => "ElevationOfPrivilege",
        }
    }

    /// Human-readable name with spaces.
    pub fn label(self) -> &'static str {
        match self {
            StrideCategory::Spoofing => "Spoofing",
            StrideCategory::Tampering => "Tampering",
            StrideCategory::Repudiation => "Repudiation",
            StrideCategory::InformationDisclosure => "Information Disclosure",
            StrideCategory::DenialOfService => "Denial of Service",
            StrideCategory::ElevationOfPrivilege => "Elevation of Privilege",
        }
    }

    pub fn letter(self) -> char {
        match self {
            StrideCategory::Spoofing => 'S',
            StrideCategory::Tampering => 'T',
            StrideCategory::Repudiation => 'R',
            StrideCategory::InformationDisclosure => 'I',
            StrideCategory::DenialOfService => 'D',
            StrideCategory::ElevationOfPrivilege => 'E',
        }
    }
}

impl fmt::Display for StrideCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrideCategory {
    type Err = ParseError;

    /// Accepts the canonical identifier, the spaced label, or the single
    /// letter, ignoring ASCII case.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let squashed: String = s
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '_' && *c != '-')
            .collect();
        StrideCategory::ALL
            .into_iter()
            .find(|c| {
                c.as_str().eq_ignore_ascii_case(&squashed)
                    || (squashed.len() == 1
                        && squashed.eq_ignore_ascii_case(&c.letter().to_string()))
            })
            .ok_or_else(|| {
                ParseError::unknown(
                    "STRIDE category",
                    s,
                    &StrideCategory::ALL.map(StrideCategory::as_str),
                )
            })
    }
}

/// Parses the six-character `Y`/`N` checklist (positions S, T, R, I, D, E).
pub fn parse_stride_flags(text: &str) -> Result<StrideSet, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    if chars.len() != 6 {
        return Err(ParseError::StrideLength(chars.len()));
    }
    let mut set = StrideSet::new();
    for (position, (ch, category)) in chars.iter().zip(StrideCategory::ALL).enumerate() {
        match ch {
            'Y' => {
                set.insert(category);
            }
            'N' => {}
            other => {
                return Err(ParseError::StrideChar {
                    position: position + 1,
                    category: category.as_str(),
                    found: *other,
                })
            }
        }
    }
    Ok(set)
}

/// Inverse of [`parse_stride_flags`].
pub fn format_stride_flags(set: &StrideSet) -> String {
    StrideCategory::ALL
        .iter()
        .map(|c| if set.contains(c) { 'Y' } else { 'N' })
        .collect()
}
