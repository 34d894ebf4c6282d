//! Path-addressed diagnostics shared by catalog and model validation.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiagnosticKind {
    Syntax,
    Schema,
    UnknownKey,
    Duplicate,
    UnresolvedId,
    DanglingReference,
    MissingCell,
    Invariant,
    Deduplicated,
    NonContiguous,
    Conflict,
}

impl DiagnosticKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticKind::Syntax => "syntax",
            DiagnosticKind::Schema => "schema",
            DiagnosticKind::UnknownKey => "unknown-key",
            DiagnosticKind::Duplicate => "duplicate",
            DiagnosticKind::UnresolvedId => "unresolved-id",
            DiagnosticKind::DanglingReference => "dangling-reference",
            DiagnosticKind::MissingCell => "missing-cell",
            DiagnosticKind::Invariant => "invariant",
            DiagnosticKind::Deduplicated => "deduplicated",
            DiagnosticKind::NonContiguous => "non-contiguous",
            DiagnosticKind::Conflict => "conflict",
        }
    }
}

/// One finding about an input document. `path` is a JSON pointer into the
/// normalized document tree (`""` is the root).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub path: String,
    pub message: String,
    /// 1-based line and column, only known for syntax errors.
    pub position: Option<(usize, usize)>,
}

impl Diagnostic {
    pub fn error(kind: DiagnosticKind, path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::new(Severity::Error, kind, path, message)
    }

    pub fn warning(kind: DiagnosticKind, path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::new(Severity::Warning, kind, path, message)
    }

    pub fn info(kind: DiagnosticKind, path: impl Into<String>, message: impl Into<String>) -> Self {
        Self::new(Severity::Info, kind, path, message)
    }

    fn new(
        severity: Severity,
        kind: DiagnosticKind,
        path: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Diagnostic {
            severity,
            kind,
            path: path.into(),
            message: message.into(),
            position: None,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.severity.as_str(), self.kind.as_str())?;
        match self.position {
            Some((line, column)) => write!(f, " at line {line}, column {column}")?,
            None => {
                let path = if self.path.is_empty() { "/" } else { &self.path };
                write!(f, " at {path}")?;
            }
        }
        write!(f, ": {}", self.message)
    }
}

/// An ordered collection of diagnostics. Order is validation traversal
/// order, which is deterministic for a given document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Diagnostics(Vec<Diagnostic>);

impl Diagnostics {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, d: Diagnostic) {
        self.0.push(d);
    }

    pub fn extend(&mut self, other: Diagnostics) {
        self.0.extend(other.0);
    }

    pub fn has_errors(&self) -> bool {
        self.0.iter().any(Diagnostic::is_error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter().filter(|d| d.is_error())
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Diagnostic> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<Diagnostic> {
        self.0
    }

    /// `Ok(value)` with the non-error diagnostics when nothing is an error.
    pub(crate) fn finish<T>(self, value: impl FnOnce() -> T) -> Result<Loaded<T>, Diagnostics> {
        if self.has_errors() {
            Err(self)
        } else {
            Ok(Loaded {
                value: value(),
                diagnostics: self,
            })
        }
    }
}

impl From<Diagnostic> for Diagnostics {
    fn from(d: Diagnostic) -> Self {
        Diagnostics(vec![d])
    }
}

impl<'a> IntoIterator for &'a Diagnostics {
    type Item = &'a Diagnostic;
    type IntoIter = std::slice::Iter<'a, Diagnostic>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

/// A successfully validated value plus any warnings or notes.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded<T> {
    pub value: T,
    pub diagnostics: Diagnostics,
}

/// Appends one reference token to a JSON pointer, escaping `~` and `/`.
pub fn pointer(base: &str, token: impl fmt::Display) -> String {
    let token = token.to_string().replace('~', "~0").replace('/', "~1");
    format!("{base}/{token}")
}
