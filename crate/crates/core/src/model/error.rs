use thiserror::Error;

/// Failure to parse one of the vocabulary types from its string form.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("STRIDE checklist must have exactly 6 characters, found {0}")]
    StrideLength(usize),

    #[error("STRIDE checklist position {position} ({category}): expected 'Y' or 'N', found {found:?}")]
    StrideChar {
        /// 1-based.
        position: usize,
        category: &'static str,
        found: char,
    },

    #[error("unknown {kind} {value:?}{}", suggestion_suffix(.suggestion))]
    Unknown {
        kind: &'static str,
        value: String,
        suggestion: Option<&'static str>,
    },

    #[error("malformed {kind} {value:?}: {reason}")]
    Malformed {
        kind: &'static str,
        value: String,
        reason: &'static str,
    },
}

fn suggestion_suffix(suggestion: &Option<&'static str>) -> String {
    match suggestion {
        Some(s) => format!(" (did you mean {s:?}?)"),
        None => String::new(),
    }
}

impl ParseError {
    pub(crate) fn unknown(kind: &'static str, value: &str, candidates: &[&'static str]) -> Self {
        ParseError::Unknown {
            kind,
            value: value.to_string(),
            suggestion: suggest(value, candidates),
        }
    }

    pub(crate) fn malformed(kind: &'static str, value: &str, reason: &'static str) -> Self {
        ParseError::Malformed {
            kind,
            value: value.to_string(),
            reason,
        }
    }
}

/// Closest candidate by Jaro-Winkler similarity, if any is close enough.
pub(crate) fn suggest(value: &str, candidates: &[&'static str]) -> Option<&'static str> {
    let lowered = value.to_ascii_lowercase();
    candidates
        .iter()
        .map(|c| (strsim::jaro_winkler(&lowered, &c.to_ascii_lowercase()), *c))
        .filter(|(score, _)| *score >= 0.8)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c)
}
