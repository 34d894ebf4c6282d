//! Surface syntax handling: JSON or YAML text normalized to one JSON tree.

use std::path::Path;

use serde_json::Value;

use crate::diagnostic::{Diagnostic, DiagnosticKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    Json,
    Yaml,
    /// JSON if the first non-blank character opens an object or array,
    /// YAML otherwise.
    Auto,
}

impl SourceFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => SourceFormat::Json,
            Some("yml" | "yaml") => SourceFormat::Yaml,
            _ => SourceFormat::Auto,
        }
    }

    fn resolve(self, text: &str) -> SourceFormat {
        match self {
            SourceFormat::Auto => match text.trim_start().chars().next() {
                Some('{' | '[') => SourceFormat::Json,
                _ => SourceFormat::Yaml,
            },
            other => other,
        }
    }
}

/// Parses text into a JSON tree. Syntax errors carry line and column.
pub fn parse_tree(text: &str, format: SourceFormat) -> Result<Value, Diagnostic> {
    match format.resolve(text) {
        SourceFormat::Json => serde_json::from_str(text).map_err(|e| {
            let mut d = Diagnostic::error(DiagnosticKind::Syntax, "", format!("invalid JSON: {e}"));
            d.position = Some((e.line(), e.column()));
            d
        }),
        _ => serde_yaml::from_str::<Value>(text).map_err(|e| {
            let mut d = Diagnostic::error(DiagnosticKind::Syntax, "", format!("invalid YAML: {e}"));
            d.position = e.location().map(|l| (l.line(), l.column()));
            d
        }),
    }
}
