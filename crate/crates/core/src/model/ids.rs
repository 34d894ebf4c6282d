//! Identifier newtypes shared by the catalog, models and reports.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ParseError, PipelineStage};

/// Declares an id that is either a numbered built-in (`AS3`) or a custom
/// extension under a reserved prefix (`ASX-db`). Built-ins sort first, by
/// number.
macro_rules! extensible_id {
    ($name:ident, $builtin:literal, $custom:literal, $kind:literal) => {
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub enum $name {
            Builtin(u32),
            Custom(String),
        }

        impl $name {
            pub const BUILTIN_PREFIX: &'static str = $builtin;
            pub const CUSTOM_PREFIX: &'static str = $custom;

            pub fn is_custom(&self) -> bool {
                matches!(self, $name::Custom(_))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                match self {
                    $name::Builtin(n) => write!(f, "{}{}", $builtin, n),
                    $name::Custom(s) => write!(f, "{}{}", $custom, s),
                }
            }
        }

        impl FromStr for $name {
            type Err = ParseError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                if let Some(rest) = s.strip_prefix($custom) {
                    if !is_custom_suffix(rest) {
                        return Err(ParseError::malformed(
                            $kind,
                            s,
                            concat!("custom ids are '", $custom, "' followed by letters, digits, '-', '_' or '.'"),
                        ));
                    }
                    return Ok($name::Custom(rest.to_string()));
                }
                match s.strip_prefix($builtin).and_then(parse_ordinal) {
                    Some(n) => Ok($name::Builtin(n)),
                    None => Err(ParseError::malformed(
                        $kind,
                        s,
                        concat!("expected '", $builtin, "<n>' or '", $custom, "<name>'"),
                    )),
                }
            }
        }

        impl TryFrom<String> for $name {
            type Error = ParseError;
            fn try_from(s: String) -> Result<Self, Self::Error> {
                s.parse()
            }
        }

        impl From<$name> for String {
            fn from(id: $name) -> String {
                id.to_string()
            }
        }
    };
}

extensible_id!(AssetId, "AS", "ASX-", "asset id");
extensible_id!(AgentId, "TA", "TAX-", "threat agent id");

fn is_custom_suffix(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

/// Positive decimal without leading zeros.
fn parse_ordinal(s: &str) -> Option<u32> {
    if s.is_empty() || s.starts_with('0') || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok().filter(|n| *n > 0)
}

/// Threat identifier `T<n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ThreatId(pub u32);

impl fmt::Display for ThreatId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T{}", self.0)
    }
}

impl FromStr for ThreatId {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('T')
            .and_then(parse_ordinal)
            .map(ThreatId)
            .ok_or_else(|| ParseError::malformed("threat id", s, "expected 'T<n>'"))
    }
}

impl TryFrom<String> for ThreatId {
    type Error = ParseError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<ThreatId> for String {
    fn from(id: ThreatId) -> String {
        id.to_string()
    }
}

/// Composite key of a catalog entry. The same threat id may appear under
/// more than one stage.
///
/// Ordered by stage first, then threat number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThreatKey {
    pub threat_id: ThreatId,
    pub stage: PipelineStage,
}

impl ThreatKey {
    pub fn new(threat_id: u32, stage: PipelineStage) -> Self {
        ThreatKey {
            threat_id: ThreatId(threat_id),
            stage,
        }
    }
}

impl Ord for ThreatKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.stage, self.threat_id).cmp(&(other.stage, other.threat_id))
    }
}

impl PartialOrd for ThreatKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ThreatKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.threat_id, self.stage)
    }
}

impl FromStr for ThreatKey {
    type Err = ParseError;

    /// Parses `T1/source`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (id, stage) = s
            .split_once('/')
            .ok_or_else(|| ParseError::malformed("threat key", s, "expected '<threat>/<stage>'"))?;
        Ok(ThreatKey {
            threat_id: id.parse()?,
            stage: PipelineStage::parse_canonical(stage)?,
        })
    }
}

/// Stable control slug: lowercase ASCII alphanumerics joined by single hyphens.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ControlId(String);

impl ControlId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ControlId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for ControlId {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let well_formed = !s.is_empty()
            && s.split('-').all(|word| {
                !word.is_empty()
                    && word.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit())
            });
        if well_formed {
            Ok(ControlId(s.to_string()))
        } else {
            Err(ParseError::malformed(
                "control id",
                s,
                "expected lowercase alphanumeric words joined by single hyphens",
            ))
        }
    }
}

impl TryFrom<String> for ControlId {
    type Error = ParseError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<ControlId> for String {
    fn from(id: ControlId) -> String {
        id.0
    }
}

/// Derives the slug used as a control id from the control's bullet text.
pub fn slugify(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.is_empty() && !out.ends_with('-') {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

/// The four SSDF practice groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SsdfGroup {
    PO,
    PS,
    PW,
    RV,
}

impl SsdfGroup {
    pub const ALL: [SsdfGroup; 4] = [SsdfGroup::PO, SsdfGroup::PS, SsdfGroup::PW, SsdfGroup::RV];

    pub fn as_str(self) -> &'static str {
        match self {
            SsdfGroup::PO => "PO",
            SsdfGroup::PS => "PS",
            SsdfGroup::PW => "PW",
            SsdfGroup::RV => "RV",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SsdfGroup::PO => "Prepare the Organization",
            SsdfGroup::PS => "Protect the Software",
            SsdfGroup::PW => "Produce Well-Secured Software",
            SsdfGroup::RV => "Respond to Vulnerabilities",
        }
    }
}

/// SSDF practice or task id such as `PO.2.1`. Stored opaquely beyond the
/// group prefix.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SsdfPracticeId {
    group: SsdfGroup,
    numbers: Vec<u32>,
}

impl SsdfPracticeId {
    pub fn group(&self) -> SsdfGroup {
        self.group
    }
}

impl fmt::Display for SsdfPracticeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.group.as_str())?;
        for n in &self.numbers {
            write!(f, ".{n}")?;
        }
        Ok(())
    }
}

impl FromStr for SsdfPracticeId {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split('.');
        let prefix = parts.next().unwrap_or_default();
        let group = SsdfGroup::ALL
            .into_iter()
            .find(|g| g.as_str() == prefix)
            .ok_or_else(|| ParseError::malformed("SSDF practice id", s, "group must be PO, PS, PW or RV"))?;
        let numbers = parts
            .map(|p| {
                if !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()) {
                    p.parse::<u32>().ok()
                } else {
                    None
                }
            })
            .collect::<Option<Vec<_>>>()
            .filter(|n| (1..=2).contains(&n.len()))
            .ok_or_else(|| {
                ParseError::malformed("SSDF practice id", s, "expected <group>.<n> or <group>.<n>.<n>")
            })?;
        Ok(SsdfPracticeId { group, numbers })
    }
}

impl TryFrom<String> for SsdfPracticeId {
    type Error = ParseError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<SsdfPracticeId> for String {
    fn from(id: SsdfPracticeId) -> String {
        id.to_string()
    }
}

/// OWASP Top 10 code `A01`..`A10`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct OwaspCode(u8);

impl OwaspCode {
    pub fn new(n: u8) -> Option<Self> {
        (1..=10).contains(&n).then_some(OwaspCode(n))
    }

    pub fn number(self) -> u8 {
        self.0
    }
}

impl fmt::Display for OwaspCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A{:02}", self.0)
    }
}

impl FromStr for OwaspCode {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let digits = s.strip_prefix('A').filter(|d| d.len() == 2 && d.bytes().all(|b| b.is_ascii_digit()));
        digits
            .and_then(|d| d.parse::<u8>().ok())
            .and_then(OwaspCode::new)
            .ok_or_else(|| ParseError::malformed("OWASP code", s, "expected zero-padded A01..A10"))
    }
}

impl TryFrom<String> for OwaspCode {
    type Error = ParseError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<OwaspCode> for String {
    fn from(code: OwaspCode) -> String {
        code.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OwaspCategory {
    pub code: OwaspCode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl fmt::Display for OwaspCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.name {
            Some(name) => write!(f, "{} \u{2013} {}", self.code, name),
            None => write!(f, "{}", self.code),
        }
    }
}
