//! Heuristic import of CI workflow files into a partial model plus
//! indicator findings. Advisory only.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::catalog::{Catalog, Confidence, HeuristicKind, IndicatorHeuristic};
use crate::diagnostic::{pointer, Diagnostic};
use crate::model::{AgentId, AssetId, ParseError, PipelineModel, PipelineStage, ThreatKey};
use crate::source::{parse_tree, SourceFormat};

/// Maximum characters of a script line kept as evidence.
const EVIDENCE_LIMIT: usize = 120;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dialect {
    /// Any `jobs`/`steps` shaped tree. Accepts GitHub, GitLab and
    /// Drone-style spellings of triggers, scripts and approval gates.
    #[default]
    Generic,
    /// GitHub Actions vocabulary only.
    GithubActions,
}

impl Dialect {
    pub fn as_str(self) -> &'static str {
        match self {
            Dialect::Generic => "generic",
            Dialect::GithubActions => "github-actions",
        }
    }

    fn trigger_keys(self) -> &'static [&'static str] {
        match self {
            Dialect::Generic => &["on", "triggers", "trigger", "workflow"],
            Dialect::GithubActions => &["on"],
        }
    }

    fn script_keys(self) -> &'static [&'static str] {
        match self {
            Dialect::Generic => &["run", "script", "commands", "before_script", "after_script"],
            Dialect::GithubActions => &["run"],
        }
    }

    fn env_keys(self) -> &'static [&'static str] {
        match self {
            Dialect::Generic => &["env", "environment_variables", "variables"],
            Dialect::GithubActions => &["env"],
        }
    }

    fn is_gated(self, job: &Map<String, Value>) -> bool {
        match self {
            Dialect::GithubActions => job.contains_key("environment"),
            Dialect::Generic => {
                job.contains_key("environment")
                    || job.contains_key("approval")
                    || job.get("when").and_then(Value::as_str) == Some("manual")
            }
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dialect {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "generic" => Ok(Dialect::Generic),
            "github-actions" | "github" => Ok(Dialect::GithubActions),
            _ => Err(ParseError::unknown("workflow dialect", s, &["generic", "github-actions"])),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Location {
    /// JSON pointer into the normalized workflow tree.
    pub path: String,
    /// 1-based line of the first textual occurrence, when found.
    pub line: Option<usize>,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line} ({})", self.path),
            None => f.write_str(&self.path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndicatorFinding {
    pub indicator_id: String,
    pub location: Location,
    /// Excerpt with any secret candidate masked.
    pub evidence: String,
    pub suggests_threat: ThreatKey,
    pub confidence: Confidence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkflowImport {
    /// Partial model; has no name and may have no stages.
    pub model: PipelineModel,
    pub indicators: Vec<IndicatorFinding>,
}

/// Masks all but the first and last two characters.
pub fn redact(secret: &str) -> String {
    let chars: Vec<char> = secret.chars().collect();
    if chars.len() <= 4 {
        return "*".repeat(chars.len());
    }
    let mut out: String = chars[..2].iter().collect();
    out.push_str(&"*".repeat(chars.len() - 4));
    out.extend(&chars[chars.len() - 2..]);
    out
}

fn deploy_label() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)deploy|release|rollout").expect("valid regex"))
}

fn pinned_sha() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"@[0-9a-f]{40}$").expect("valid regex"))
}

/// Parses a workflow file and runs the catalog's heuristics over it.
pub fn import_ci_workflow(text: &str, format: SourceFormat, dialect: Dialect, catalog: &Catalog) -> Result<WorkflowImport, Diagnostic> {
    let tree = parse_tree(text, format)?;
    Ok(import_ci_workflow_tree(&tree, text, dialect, catalog))
}

/// `text` is only used to attach line numbers.
pub fn import_ci_workflow_tree(tree: &Value, text: &str, dialect: Dialect, catalog: &Catalog) -> WorkflowImport {
    let mut scan = Scan {
        text,
        dialect,
        catalog,
        rules: catalog
            .heuristics
            .iter()
            .filter(|h| catalog.entry(h.suggests).is_some())
            .map(|h| (h, h.pattern.as_deref().map(|p| Regex::new(p).expect("validated at catalog load"))))
            .collect(),
        found: Vec::new(),
    };
    let jobs = jobs(tree, dialect);
    let model = infer_model(tree, &jobs, dialect);

    scan.strings(tree, "");
    for (path, job) in &jobs {
        scan.job(path, job);
    }
    if is_push_triggered(tree, dialect) {
        for (path, job) in &jobs {
            if is_deploy_job(path, job) && !dialect.is_gated(job) {
                scan.emit(HeuristicKind::AutoDeployTrigger, None, path, &format!("push trigger runs {}", job_label(path, job)), None);
            }
        }
    }

    let mut indicators = scan.found;
    indicators.sort_by(|a, b| {
        (a.location.line.unwrap_or(usize::MAX), &a.location.path, &a.indicator_id).cmp(&(
            b.location.line.unwrap_or(usize::MAX),
            &b.location.path,
            &b.indicator_id,
        ))
    });
    indicators.dedup();
    WorkflowImport { model, indicators }
}

/// `(path, job)` pairs from a `jobs` map or list.
fn jobs(tree: &Value, dialect: Dialect) -> Vec<(String, &Map<String, Value>)> {
    match (tree.get("jobs"), dialect) {
        (Some(Value::Object(map)), _) => map
            .iter()
            .filter_map(|(k, v)| Some((pointer("/jobs", k), v.as_object()?)))
            .collect(),
        (Some(Value::Array(list)), Dialect::Generic) => list
            .iter()
            .enumerate()
            .filter_map(|(i, v)| Some((pointer("/jobs", i), v.as_object()?)))
            .collect(),
        _ => Vec::new(),
    }
}

fn job_label(path: &str, job: &Map<String, Value>) -> String {
    let id = path.rsplit('/').next().unwrap_or(path);
    match job.get("name").and_then(Value::as_str) {
        Some(name) if name != id => format!("{id} ({name})"),
        _ => id.to_string(),
    }
}

fn is_deploy_job(path: &str, job: &Map<String, Value>) -> bool {
    deploy_label().is_match(&job_label(path, job))
}

fn is_push_triggered(tree: &Value, dialect: Dialect) -> bool {
    dialect.trigger_keys().iter().filter_map(|k| tree.get(*k)).any(|t| match t {
        Value::String(s) => s == "push",
        Value::Array(items) => items.iter().any(|i| i.as_str() == Some("push")),
        Value::Object(map) => map.contains_key("push"),
        _ => false,
    })
}

fn has_env(v: &Value, dialect: Dialect) -> bool {
    match v {
        Value::Object(map) => map
            .iter()
            .any(|(k, v)| (dialect.env_keys().contains(&k.as_str()) && v.is_object()) || has_env(v, dialect)),
        Value::Array(items) => items.iter().any(|v| has_env(v, dialect)),
        _ => false,
    }
}

fn infer_model(tree: &Value, jobs: &[(String, &Map<String, Value>)], dialect: Dialect) -> PipelineModel {
    let mut model = PipelineModel::named("");
    if jobs.is_empty() {
        return model;
    }
    if let Some(name) = tree.get("name").and_then(Value::as_str) {
        model.name = name.to_string();
    }
    model.stages.insert(PipelineStage::Source);
    for (path, job) in jobs {
        model.stages.insert(if is_deploy_job(path, job) {
            PipelineStage::Deployment
        } else {
            PipelineStage::Build
        });
    }
    model.assets.extend([AssetId::Builtin(2), AssetId::Builtin(3)]);
    if has_env(tree, dialect) {
        model.assets.insert(AssetId::Builtin(4));
    }
    model.agents.extend([AgentId::Builtin(1), AgentId::Builtin(2)]);
    model
}

struct Scan<'a> {
    text: &'a str,
    dialect: Dialect,
    catalog: &'a Catalog,
    rules: Vec<(&'a IndicatorHeuristic, Option<Regex>)>,
    found: Vec<IndicatorFinding>,
}

impl<'a> Scan<'a> {
    fn line_of(&self, needle: &str) -> Option<usize> {
        let needle = needle.trim();
        if needle.is_empty() {
            return None;
        }
        self.text.lines().position(|l| l.contains(needle)).map(|i| i + 1)
    }

    fn rules_of(&self, kind: HeuristicKind) -> Vec<(&'a IndicatorHeuristic, Option<Regex>)> {
        self.rules
            .iter()
            .filter(|(h, _)| h.kind == kind)
            .map(|(h, re)| (*h, re.clone()))
            .collect()
    }

    fn emit(&mut self, kind: HeuristicKind, rule: Option<&'a IndicatorHeuristic>, path: &str, evidence: &str, needle: Option<&str>) {
        let rules = match rule {
            Some(r) => vec![r],
            None => self.rules_of(kind).into_iter().map(|(h, _)| h).collect(),
        };
        for h in rules {
            if self.catalog.entry(h.suggests).is_none() {
                continue;
            }
            let line = self.line_of(needle.unwrap_or(evidence));
            self.found.push(IndicatorFinding {
                indicator_id: h.id.clone(),
                location: Location {
                    path: path.to_string(),
                    line,
                },
                evidence: evidence.to_string(),
                suggests_threat: h.suggests,
                confidence: h.confidence,
            });
        }
    }

    /// Masks every secret-value match inside `text`.
    fn mask(&self, text: &str) -> String {
        let mut out = text.to_string();
        for (_, re) in self.rules_of(HeuristicKind::SecretValue) {
            let Some(re) = re else { continue };
            out = re.replace_all(&out, |c: &regex::Captures| redact(&c[0])).into_owned();
        }
        out
    }

    fn secret_matches(&self, s: &str) -> Vec<(&'a IndicatorHeuristic, String)> {
        let mut out = Vec::new();
        for (h, re) in self.rules_of(HeuristicKind::SecretValue) {
            if let Some(re) = re {
                out.extend(re.find_iter(s).map(|m| (h, m.as_str().to_string())));
            }
        }
        out
    }

    /// Secret values anywhere, and credential-named literal assignments.
    fn strings(&mut self, v: &Value, path: &str) {
        match v {
            Value::String(s) => {
                for (h, m) in self.secret_matches(s) {
                    let first_line = m.lines().next().unwrap_or_default().to_string();
                    self.emit(HeuristicKind::SecretValue, Some(h), path, &redact(&m), Some(&first_line));
                }
            }
            Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    self.strings(item, &pointer(path, i));
                }
            }
            Value::Object(map) => {
                for (k, child) in map {
                    let child_path = pointer(path, k);
                    if self.dialect.env_keys().contains(&k.as_str()) || k == "with" {
                        if let Value::Object(vars) = child {
                            self.assignments(vars, &child_path);
                        }
                    }
                    self.strings(child, &child_path);
                }
            }
            _ => {}
        }
    }

    fn assignments(&mut self, vars: &Map<String, Value>, path: &str) {
        for (name, value) in vars {
            let Some(literal) = value.as_str() else { continue };
            let literal = literal.trim();
            if literal.is_empty() || literal.contains("${{") || literal.starts_with('$') {
                continue;
            }
            if !self.secret_matches(literal).is_empty() {
                continue;
            }
            for (h, re) in self.rules_of(HeuristicKind::SecretAssignment) {
                if re.as_ref().is_some_and(|re| re.is_match(name)) {
                    let evidence = format!("{name}: {}", redact(literal));
                    self.emit(HeuristicKind::SecretAssignment, Some(h), &pointer(path, name), &evidence, Some(name));
                }
            }
        }
    }

    fn job(&mut self, path: &str, job: &Map<String, Value>) {
        self.image_refs(job, path);
        for key in self.dialect.script_keys() {
            if let Some(script) = job.get(*key) {
                self.script(script, &pointer(path, key));
            }
        }
        let Some(Value::Array(steps)) = job.get("steps") else { return };
        for (i, step) in steps.iter().enumerate() {
            let step_path = pointer(&pointer(path, "steps"), i);
            let Some(step) = step.as_object() else { continue };
            if let Some(uses) = step.get("uses").and_then(Value::as_str) {
                if !is_pinned_action(uses) {
                    self.unpinned(&pointer(&step_path, "uses"), uses);
                }
            }
            self.image_refs(step, &step_path);
            for key in self.dialect.script_keys() {
                if let Some(script) = step.get(*key) {
                    self.script(script, &pointer(&step_path, key));
                }
            }
        }
    }

    fn image_refs(&mut self, obj: &Map<String, Value>, path: &str) {
        let mut refs: Vec<(String, &str)> = Vec::new();
        if let Some(image) = obj.get("image") {
            match image {
                Value::String(s) => refs.push((pointer(path, "image"), s)),
                Value::Object(m) => {
                    if let Some(s) = m.get("name").and_then(Value::as_str) {
                        refs.push((pointer(&pointer(path, "image"), "name"), s));
                    }
                }
                _ => {}
            }
        }
        match obj.get("container") {
            Some(Value::String(s)) => refs.push((pointer(path, "container"), s)),
            Some(Value::Object(m)) => {
                if let Some(s) = m.get("image").and_then(Value::as_str) {
                    refs.push((pointer(&pointer(path, "container"), "image"), s));
                }
            }
            _ => {}
        }
        if let Some(Value::Object(services)) = obj.get("services") {
            for (name, svc) in services {
                let image = svc.as_str().or_else(|| svc.get("image").and_then(Value::as_str));
                if let Some(s) = image {
                    refs.push((pointer(&pointer(path, "services"), name), s));
                }
            }
        }
        for (p, image) in refs {
            if !image.contains("@sha256:") && !image.contains("${{") {
                self.unpinned(&p, image);
            }
        }
    }

    fn unpinned(&mut self, path: &str, reference: &str) {
        let evidence = self.mask(reference);
        self.emit(HeuristicKind::UnpinnedReference, None, path, &evidence, Some(reference));
    }

    fn script(&mut self, script: &Value, path: &str) {
        match script {
            Value::String(s) => {
                for line in s.lines() {
                    self.script_line(line, path);
                }
            }
            Value::Array(items) => {
                for (i, item) in items.iter().enumerate() {
                    if let Some(s) = item.as_str() {
                        for line in s.lines() {
                            self.script_line(line, &pointer(path, i));
                        }
                    }
                }
            }
            _ => {}
        }
    }

    fn script_line(&mut self, line: &str, path: &str) {
        let line = line.trim();
        for (h, re) in self.rules_of(HeuristicKind::ScriptPattern) {
            if re.as_ref().is_some_and(|re| re.is_match(line)) {
                let mut evidence = self.mask(line);
                if evidence.chars().count() > EVIDENCE_LIMIT {
                    evidence = evidence.chars().take(EVIDENCE_LIMIT).collect::<String>() + "...";
                }
                self.emit(HeuristicKind::ScriptPattern, Some(h), path, &evidence, Some(line));
            }
        }
    }
}

/// Local actions, digest-pinned images and full commit SHAs count as pinned.
fn is_pinned_action(uses: &str) -> bool {
    uses.starts_with("./") || uses.contains("@sha256:") || pinned_sha().is_match(uses)
}
