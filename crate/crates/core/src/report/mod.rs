//! Renderers for audit reports and models. All output is deterministic:
//! equal inputs give byte-identical text.

mod dot;
mod json;
mod matrix;
mod plan;

pub use dot::render_dfd_dot;
pub use json::{parse_report_json, render_json, render_sarif, SARIF_VERSION};
pub use matrix::render_matrix;
pub use plan::{render_toolchain_plan, toolchain_plan, PlanItem};

use std::fmt;
use std::str::FromStr;

use crate::catalog::Catalog;
use crate::engine::AuditReport;
use crate::model::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    MatrixMd,
    Json,
    Sarif,
    Dot,
    Plan,
}

impl Format {
    pub const ALL: [Format; 5] = [Format::MatrixMd, Format::Json, Format::Sarif, Format::Dot, Format::Plan];

    pub fn as_str(self) -> &'static str {
        match self {
            Format::MatrixMd => "matrix-md",
            Format::Json => "json",
            Format::Sarif => "sarif",
            Format::Dot => "dot",
            Format::Plan => "plan",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Format {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Format::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| ParseError::unknown("output format", s, &Format::ALL.map(Format::as_str)))
    }
}

/// STRIDE cell markers in markdown tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Glyphs {
    /// `x` and `-`, stable in diffs.
    #[default]
    Ascii,
    /// Check mark and ballot X.
    Symbols,
}

impl Glyphs {
    pub fn mark(self, set: bool) -> &'static str {
        match (self, set) {
            (Glyphs::Ascii, true) => "x",
            (Glyphs::Ascii, false) => "-",
            (Glyphs::Symbols, true) => "\u{2713}",
            (Glyphs::Symbols, false) => "\u{2717}",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RenderOptions {
    pub format: Format,
    /// Keep mitigated rows in the matrix.
    pub include_mitigated: bool,
    pub glyphs: Glyphs,
    /// Separate control, SLSA and SSDF columns instead of one merged cell.
    pub split_columns: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            format: Format::MatrixMd,
            include_mitigated: true,
            glyphs: Glyphs::Ascii,
            split_columns: false,
        }
    }
}

/// Renders a report in any format except `dot`, which takes a model.
/// Returns `None` for `dot`.
pub fn render(report: &AuditReport, catalog: &Catalog, options: &RenderOptions) -> Option<String> {
    Some(match options.format {
        Format::MatrixMd => render_matrix(report, options),
        Format::Json => render_json(report),
        Format::Sarif => render_sarif(report),
        Format::Plan => render_toolchain_plan(report, catalog),
        Format::Dot => return None,
    })
}

/// Escapes a markdown table cell.
fn cell(text: &str) -> String {
    text.replace('|', "\\|").replace('\n', " ")
}
