//! `pta`: audit CI/CD pipeline models against a STRIDE threat catalog.
//!
//! Exit codes: 0 success, 1 audit gate tripped, 2 usage, parse or
//! validation error. Reports go to stdout, diagnostics to stderr.

use std::borrow::Cow;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pta_core::catalog::{builtin_catalog, load_catalog, Catalog};
use pta_core::diagnostic::Diagnostics;
use pta_core::engine::{full_audit, AuditReport, MitigationStatus};
use pta_core::ingest::{export_model, import_ci_workflow, parse_pipeline_model, Dialect};
use pta_core::model::{format_stride_flags, PipelineModel, PipelineStage, SlsaLevel, StrideCategory};
use pta_core::report::{render, render_dfd_dot, Format, Glyphs, RenderOptions};
use pta_core::source::SourceFormat;

const EXIT_GATE: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "pta", version, about = "Threat-model-as-code auditor for CI/CD pipelines")]
struct Cli {
    /// Catalog file (JSON or YAML), or `builtin`.
    #[arg(long, global = true, env = "PTA_CATALOG", default_value = "builtin")]
    catalog: String,

    /// Report format for `audit`.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::MatrixMd)]
    format: OutputFormat,

    /// Print errors only; suppress warnings and notes.
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Audit a pipeline model and render a report.
    Audit(AuditArgs),
    /// Inspect, validate or export a threat catalog.
    #[command(subcommand)]
    Catalog(CatalogCommand),
    /// Derive a partial model and risk indicators from a CI workflow file.
    Import(ImportArgs),
    /// Render the model's data flow diagram as Graphviz DOT.
    Dfd {
        /// Pipeline model (JSON or YAML).
        model: PathBuf,
    },
}

#[derive(Args, Debug)]
struct AuditArgs {
    /// Pipeline model (JSON or YAML).
    model: PathBuf,

    /// Lowest status that makes the audit exit with code 1.
    #[arg(long, value_enum, default_value_t = Gate::None)]
    gate: Gate,

    /// Leave mitigated threats out of the matrix.
    #[arg(long)]
    hide_mitigated: bool,

    /// STRIDE cell markers in the matrix.
    #[arg(long, value_enum, default_value_t = GlyphSet::Ascii)]
    glyphs: GlyphSet,

    /// Separate control, SLSA and SSDF columns in the matrix.
    #[arg(long)]
    split_columns: bool,
}

#[derive(Subcommand, Debug)]
enum CatalogCommand {
    /// Summarize the selected catalog.
    Show,
    /// Load a catalog file and report its diagnostics.
    Validate {
        /// Catalog file; defaults to the one selected by `--catalog`.
        path: Option<PathBuf>,
    },
    /// Write the selected catalog as canonical JSON.
    Export {
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ImportArgs {
    /// Workflow file (JSON or YAML).
    workflow: PathBuf,

    /// Workflow vocabulary.
    #[arg(long, default_value = "generic", value_parser = parse_dialect)]
    dialect: Dialect,

    /// Write the partial model here and print indicators to stdout.
    /// Without it the model goes to stdout and indicators to stderr.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    MatrixMd,
    Json,
    Sarif,
    Plan,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Format {
        match f {
            OutputFormat::MatrixMd => Format::MatrixMd,
            OutputFormat::Json => Format::Json,
            OutputFormat::Sarif => Format::Sarif,
            OutputFormat::Plan => Format::Plan,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Gate {
    None,
    Partial,
    Unmitigated,
}

impl Gate {
    fn trips(self, report: &AuditReport) -> bool {
        report.findings.iter().any(|a| match self {
            Gate::None => false,
            Gate::Partial => a.status != MitigationStatus::Mitigated,
            Gate::Unmitigated => a.status == MitigationStatus::Unmitigated,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GlyphSet {
    Ascii,
    Symbols,
}

impl From<GlyphSet> for Glyphs {
    fn from(g: GlyphSet) -> Glyphs {
        match g {
            GlyphSet::Ascii => Glyphs::Ascii,
            GlyphSet::Symbols => Glyphs::Symbols,
        }
    }
}

fn parse_dialect(s: &str) -> Result<Dialect, String> {
    s.parse::<Dialect>().map_err(|e| e.to_string())
}

struct Ctx {
    catalog_arg: String,
    format: OutputFormat,
    quiet: bool,
}

impl Ctx {
    fn warn(&self, diagnostics: &Diagnostics) {
        if !self.quiet && !diagnostics.is_empty() {
            eprintln!("{diagnostics}");
        }
    }

    fn catalog(&self) -> Result<Cow<'static, Catalog>> {
        if self.catalog_arg == "builtin" {
            return Ok(Cow::Borrowed(builtin_catalog()));
        }
        let path = Path::new(&self.catalog_arg);
        let loaded = read_catalog(path)?;
        self.warn(&loaded.diagnostics);
        Ok(Cow::Owned(loaded.value))
    }

    fn model(&self, path: &Path, catalog: &Catalog) -> Result<PipelineModel> {
        let text = read_text(path)?;
        let loaded = parse_pipeline_model(&text, SourceFormat::from_path(path), catalog)
            .with_context(|| format!("invalid model {}", path.display()))?;
        self.warn(&loaded.diagnostics);
        Ok(loaded.value)
    }
}

fn read_text(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    String::from_utf8(bytes).map_err(|_| anyhow!("{} is not UTF-8 text", path.display()))
}

fn read_catalog(path: &Path) -> Result<pta_core::diagnostic::Loaded<Catalog>> {
    let text = read_text(path)?;
    load_catalog(&text, SourceFormat::from_path(path)).with_context(|| format!("invalid catalog {}", path.display()))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn with_newline(mut text: String) -> String {
    if !text.ends_with('\n') {
        text.push('\n');
    }
    text
}

fn cmd_audit(ctx: &Ctx, args: &AuditArgs) -> Result<u8> {
    let catalog = ctx.catalog()?;
    let model = ctx.model(&args.model, &catalog)?;
    let report = full_audit(&model, &catalog).with_context(|| format!("invalid model {}", args.model.display()))?;
    let options = RenderOptions {
        format: ctx.format.into(),
        include_mitigated: !args.hide_mitigated,
        glyphs: args.glyphs.into(),
        split_columns: args.split_columns,
    };
    let text = render(&report, &catalog, &options).ok_or_else(|| anyhow!("format {} needs a model", options.format))?;
    print!("{}", with_newline(text));
    Ok(if args.gate.trips(&report) { EXIT_GATE } else { 0 })
}

fn summary_line(catalog: &Catalog) -> String {
    format!(
        "{} threats, {} assets, {} agents",
        catalog.entries.len(),
        catalog.assets.len(),
        catalog.agents.len()
    )
}

fn catalog_summary(catalog: &Catalog) -> String {
    let mut out = format!("catalog {}: {}, {} controls\n", catalog.version, summary_line(catalog), catalog.controls.len());
    for stage in PipelineStage::CANONICAL {
        let entries = catalog.threats_for(stage);
        out.push_str(&format!("\n{} ({} threats)\n", stage.label(), entries.len()));
        for e in entries {
            out.push_str(&format!(
                "  {:<4} {}  {} controls  {}\n",
                e.key.threat_id.to_string(),
                format_stride_flags(&e.stride),
                e.controls.len(),
                e.description
            ));
        }
    }
    out.push_str("\nSLSA coverage (L1 L2 L3 L4)\n");
    for category in StrideCategory::ALL {
        let cells: Vec<&str> = SlsaLevel::GRADED.iter().map(|l| catalog.coverage.get(category, *l).as_str()).collect();
        out.push_str(&format!("  {:<22} {}\n", category.to_string(), cells.join(" ")));
    }
    out
}

fn cmd_catalog(ctx: &Ctx, command: &CatalogCommand) -> Result<u8> {
    match command {
        CatalogCommand::Show => {
            let catalog = ctx.catalog()?;
            print!("{}", catalog_summary(&catalog));
        }
        CatalogCommand::Validate { path } => {
            let catalog = match path {
                Some(path) => {
                    let loaded = read_catalog(path)?;
                    ctx.warn(&loaded.diagnostics);
                    Cow::Owned(loaded.value)
                }
                None => ctx.catalog()?,
            };
            println!("valid: {}", summary_line(&catalog));
        }
        CatalogCommand::Export { out } => {
            let catalog = ctx.catalog()?;
            write_output(out.as_deref(), &with_newline(catalog.export_json()))?;
        }
    }
    Ok(0)
}

fn cmd_import(ctx: &Ctx, args: &ImportArgs) -> Result<u8> {
    let catalog = ctx.catalog()?;
    let text = read_text(&args.workflow)?;
    let imported = import_ci_workflow(&text, SourceFormat::from_path(&args.workflow), args.dialect, &catalog)
        .map_err(|d| anyhow!("{d}"))
        .with_context(|| format!("cannot import {}", args.workflow.display()))?;
    let lines: Vec<String> = imported
        .indicators
        .iter()
        .map(|f| {
            format!(
                "{}:{} {} [{}] suggests {} at {}: {}",
                args.workflow.display(),
                f.location.line.map(|l| l.to_string()).unwrap_or_else(|| "?".into()),
                f.indicator_id,
                f.confidence.as_str(),
                f.suggests_threat,
                f.location.path,
                f.evidence
            )
        })
        .collect();
    let model = with_newline(export_model(&imported.model));
    match &args.out {
        Some(path) => {
            write_output(Some(path), &model)?;
            for line in &lines {
                println!("{line}");
            }
            if !ctx.quiet {
                eprintln!("{} indicator(s); partial model written to {}", lines.len(), path.display());
            }
        }
        None => {
            print!("{model}");
            for line in &lines {
                eprintln!("{line}");
            }
        }
    }
    Ok(0)
}

fn cmd_dfd(ctx: &Ctx, model: &Path) -> Result<u8> {
    let catalog = ctx.catalog()?;
    let model = ctx.model(model, &catalog)?;
    print!("{}", with_newline(render_dfd_dot(&model)));
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    let ctx = Ctx {
        catalog_arg: cli.catalog,
        format: cli.format,
        quiet: cli.quiet,
    };
    match &cli.command {
        Command::Audit(args) => cmd_audit(&ctx, args),
        Command::Catalog(command) => cmd_catalog(&ctx, command),
        Command::Import(args) => cmd_import(&ctx, args),
        Command::Dfd { model } => cmd_dfd(&ctx, model),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            for cause in err.chain().skip(1) {
                eprintln!("{cause}");
            }
            ExitCode::from(EXIT_ERROR)
        }
    }
}
