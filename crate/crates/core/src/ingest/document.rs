//! Pipeline model documents: parsing, validation and canonical export.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde_json::{json, Map, Value};

use crate::catalog::Catalog;
use crate::diagnostic::{pointer, Diagnostic, DiagnosticKind, Diagnostics, Loaded};
use crate::model::{
    capabilities_contiguous, AgentId, AgentProfile, AssetId, ControlId, DataFlow, ParseError,
    PipelineModel, PipelineStage, SlsaCapability, TrustBoundary,
};
use crate::source::{parse_tree, SourceFormat};

const TOP_KEYS: [&str; 8] = [
    "name",
    "stages",
    "assets",
    "agents",
    "controls",
    "slsa_capabilities",
    "flows",
    "boundaries",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Full,
    /// Name optional, stages may be empty.
    Partial,
}

/// Parses and validates a complete pipeline model.
pub fn parse_pipeline_model(text: &str, format: SourceFormat, catalog: &Catalog) -> Result<Loaded<PipelineModel>, Diagnostics> {
    let tree = parse_tree(text, format)?;
    parse_pipeline_model_tree(&tree, catalog)
}

pub fn parse_pipeline_model_tree(tree: &Value, catalog: &Catalog) -> Result<Loaded<PipelineModel>, Diagnostics> {
    Reader::new(Mode::Full).read(tree, catalog)
}

/// Parses a model fragment, such as importer output, which may lack a name
/// and stages.
pub fn parse_partial_model(text: &str, format: SourceFormat, catalog: &Catalog) -> Result<Loaded<PipelineModel>, Diagnostics> {
    let tree = parse_tree(text, format)?;
    parse_partial_model_tree(&tree, catalog)
}

pub fn parse_partial_model_tree(tree: &Value, catalog: &Catalog) -> Result<Loaded<PipelineModel>, Diagnostics> {
    Reader::new(Mode::Partial).read(tree, catalog)
}

/// Re-checks an in-memory model against a catalog. Paths index the model's
/// sorted sets.
pub fn validate_model(model: &PipelineModel, catalog: &Catalog) -> Diagnostics {
    let mut paths = DocPaths::default();
    for (i, a) in model.assets.iter().enumerate() {
        paths.assets.push((pointer("/assets", i), a.clone()));
    }
    for (i, a) in model.agents.iter().enumerate() {
        paths.agents.push((pointer("/agents", i), a.clone()));
    }
    for (i, c) in model.controls.iter().enumerate() {
        paths.controls.push((pointer("/controls", i), c.clone()));
    }
    let mut diags = Diagnostics::new();
    semantic_checks(model, catalog, &paths, Mode::Full, &mut diags);
    diags
}

/// Canonical export: sorted keys, sets in sorted order, custom ids with
/// their definitions. Parsing the output yields an equal model.
pub fn export_model(model: &PipelineModel) -> String {
    let mut out = serde_json::to_string_pretty(&model_to_tree(model)).expect("model serializes");
    out.push('\n');
    out
}

pub fn model_to_tree(model: &PipelineModel) -> Value {
    let assets: Vec<Value> = model
        .assets
        .iter()
        .map(|a| match model.custom_assets.get(a) {
            Some(d) => json!({"id": a.to_string(), "description": d}),
            None => json!(a.to_string()),
        })
        .collect();
    let agents: Vec<Value> = model
        .agents
        .iter()
        .map(|a| match model.custom_agents.get(a) {
            Some(p) => json!({"id": a.to_string(), "name": p.name, "description": p.description}),
            None => json!(a.to_string()),
        })
        .collect();
    let flows: Vec<Value> = model
        .flows
        .iter()
        .map(|f| json!({"from": f.from, "to": f.to, "label": f.label, "crosses_boundary": f.crosses_boundary}))
        .collect();
    let boundaries: Vec<Value> = model
        .boundaries
        .iter()
        .map(|b| json!({"name": b.name, "members": b.members, "nested": b.nested}))
        .collect();
    let mut doc = json!({
        "stages": model.stages.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
        "assets": assets,
        "agents": agents,
        "controls": model.controls.iter().map(ControlId::as_str).collect::<Vec<_>>(),
        "slsa_capabilities": model.slsa_capabilities.iter().map(|c| c.as_str()).collect::<Vec<_>>(),
        "flows": flows,
        "boundaries": boundaries,
    });
    if !model.name.is_empty() {
        doc["name"] = json!(model.name);
    }
    doc
}

/// Document paths of each referenced id, for diagnostics.
#[derive(Default)]
struct DocPaths {
    assets: Vec<(String, AssetId)>,
    agents: Vec<(String, AgentId)>,
    controls: Vec<(String, ControlId)>,
}

struct Reader {
    mode: Mode,
    diags: Diagnostics,
    paths: DocPaths,
}

impl Reader {
    fn new(mode: Mode) -> Self {
        Reader {
            mode,
            diags: Diagnostics::new(),
            paths: DocPaths::default(),
        }
    }

    fn error(&mut self, kind: DiagnosticKind, path: String, message: impl Into<String>) {
        self.diags.push(Diagnostic::error(kind, path, message));
    }

    fn object<'a>(&mut self, v: &'a Value, path: &str, allowed: &[&'static str]) -> Option<&'a Map<String, Value>> {
        let Some(map) = v.as_object() else {
            self.error(DiagnosticKind::Schema, path.to_string(), format!("expected an object, found {}", type_name(v)));
            return None;
        };
        for key in map.keys() {
            if !allowed.contains(&key.as_str()) {
                let hint = crate::model::suggest(key, allowed)
                    .map(|s| format!(" (did you mean {s:?}?)"))
                    .unwrap_or_default();
                self.error(
                    DiagnosticKind::UnknownKey,
                    pointer(path, key),
                    format!("unknown key {key:?}{hint}; expected one of: {}", allowed.join(", ")),
                );
            }
        }
        Some(map)
    }

    fn string<'a>(&mut self, v: &'a Value, path: &str) -> Option<&'a str> {
        let s = v.as_str();
        if s.is_none() {
            self.error(DiagnosticKind::Schema, path.to_string(), format!("expected a string, found {}", type_name(v)));
        }
        s
    }

    fn required_string(&mut self, map: &Map<String, Value>, path: &str, key: &str) -> Option<String> {
        match map.get(key) {
            Some(v) => self.string(v, &pointer(path, key)).map(str::to_string),
            None => {
                self.error(DiagnosticKind::Schema, path.to_string(), format!("missing required key {key:?}"));
                None
            }
        }
    }

    fn bool_or_false(&mut self, map: &Map<String, Value>, path: &str, key: &str) -> bool {
        match map.get(key) {
            None => false,
            Some(Value::Bool(b)) => *b,
            Some(v) => {
                self.error(DiagnosticKind::Schema, pointer(path, key), format!("expected a boolean, found {}", type_name(v)));
                false
            }
        }
    }

    fn array<'a>(&mut self, v: Option<&'a Value>, path: &str) -> &'a [Value] {
        match v {
            None => &[],
            Some(Value::Array(a)) => a,
            Some(other) => {
                self.error(DiagnosticKind::Schema, path.to_string(), format!("expected an array, found {}", type_name(other)));
                &[]
            }
        }
    }

    fn parsed<T: FromStr<Err = ParseError>>(&mut self, v: &Value, path: &str) -> Option<T> {
        let s = self.string(v, path)?;
        match s.parse::<T>() {
            Ok(t) => Some(t),
            Err(e) => {
                self.error(DiagnosticKind::Schema, path.to_string(), e.to_string());
                None
            }
        }
    }

    fn insert_unique<T: Ord + std::fmt::Display>(&mut self, set: &mut BTreeSet<T>, item: T, path: String) -> bool {
        if set.contains(&item) {
            self.diags.push(Diagnostic::warning(DiagnosticKind::Duplicate, path, format!("{item} listed more than once")));
            false
        } else {
            set.insert(item);
            true
        }
    }

    fn read(mut self, tree: &Value, catalog: &Catalog) -> Result<Loaded<PipelineModel>, Diagnostics> {
        let mut model = PipelineModel::named("");
        let Some(root) = self.object(tree, "", &TOP_KEYS) else {
            return Err(self.diags);
        };

        match (root.get("name"), self.mode) {
            (Some(v), _) => {
                if let Some(s) = self.string(v, "/name") {
                    model.name = s.to_string();
                }
            }
            (None, Mode::Full) => self.error(DiagnosticKind::Schema, String::new(), "missing required key \"name\""),
            (None, Mode::Partial) => {}
        }
        if root.get("stages").is_none() && self.mode == Mode::Full {
            self.error(DiagnosticKind::Schema, String::new(), "missing required key \"stages\"");
        }

        for (i, v) in self.array(root.get("stages"), "/stages").iter().enumerate() {
            let path = pointer("/stages", i);
            let Some(s) = self.string(v, &path) else { continue };
            match PipelineStage::parse_canonical(s) {
                Ok(stage) => {
                    self.insert_unique(&mut model.stages, stage, path);
                }
                Err(e) => self.error(DiagnosticKind::Schema, path, e.to_string()),
            }
        }

        for (i, v) in self.array(root.get("assets"), "/assets").iter().enumerate() {
            let path = pointer("/assets", i);
            let (id, def) = match v {
                Value::Object(_) => {
                    let Some(map) = self.object(v, &path, &["id", "description"]) else { continue };
                    let id = map.get("id").and_then(|id| self.parsed::<AssetId>(id, &pointer(&path, "id")));
                    let desc = self.required_string(map, &path, "description");
                    if map.get("id").is_none() {
                        self.error(DiagnosticKind::Schema, path.clone(), "missing required key \"id\"");
                    }
                    (id, desc)
                }
                _ => (self.parsed::<AssetId>(v, &path), None),
            };
            let Some(id) = id else { continue };
            if let Some(desc) = def {
                if !id.is_custom() {
                    self.error(DiagnosticKind::Schema, path.clone(), format!("built-in asset {id} cannot be redefined; use an ASX- id"));
                    continue;
                }
                if model.custom_assets.get(&id).is_some_and(|d| *d != desc) {
                    self.error(DiagnosticKind::Conflict, path.clone(), format!("asset {id} defined twice with different descriptions"));
                    continue;
                }
                model.custom_assets.insert(id.clone(), desc);
            }
            if self.insert_unique(&mut model.assets, id.clone(), path.clone()) {
                self.paths.assets.push((path, id));
            }
        }

        for (i, v) in self.array(root.get("agents"), "/agents").iter().enumerate() {
            let path = pointer("/agents", i);
            let (id, def) = match v {
                Value::Object(_) => {
                    let Some(map) = self.object(v, &path, &["id", "name", "description"]) else { continue };
                    let id = map.get("id").and_then(|id| self.parsed::<AgentId>(id, &pointer(&path, "id")));
                    if map.get("id").is_none() {
                        self.error(DiagnosticKind::Schema, path.clone(), "missing required key \"id\"");
                    }
                    let name = self.required_string(map, &path, "name");
                    let description = match map.get("description") {
                        Some(d) => self.string(d, &pointer(&path, "description")).unwrap_or_default().to_string(),
                        None => String::new(),
                    };
                    (id, name.map(|name| AgentProfile { name, description }))
                }
                _ => (self.parsed::<AgentId>(v, &path), None),
            };
            let Some(id) = id else { continue };
            if let Some(profile) = def {
                if !id.is_custom() {
                    self.error(DiagnosticKind::Schema, path.clone(), format!("built-in agent {id} cannot be redefined; use a TAX- id"));
                    continue;
                }
                if model.custom_agents.get(&id).is_some_and(|p| *p != profile) {
                    self.error(DiagnosticKind::Conflict, path.clone(), format!("agent {id} defined twice with different profiles"));
                    continue;
                }
                model.custom_agents.insert(id.clone(), profile);
            }
            if self.insert_unique(&mut model.agents, id.clone(), path.clone()) {
                self.paths.agents.push((path, id));
            }
        }

        for (i, v) in self.array(root.get("controls"), "/controls").iter().enumerate() {
            let path = pointer("/controls", i);
            let Some(id) = self.parsed::<ControlId>(v, &path) else { continue };
            if self.insert_unique(&mut model.controls, id.clone(), path.clone()) {
                self.paths.controls.push((path, id));
            }
        }

        for (i, v) in self.array(root.get("slsa_capabilities"), "/slsa_capabilities").iter().enumerate() {
            let path = pointer("/slsa_capabilities", i);
            if let Some(c) = self.parsed::<SlsaCapability>(v, &path) {
                self.insert_unique(&mut model.slsa_capabilities, c, path);
            }
        }

        for (i, v) in self.array(root.get("flows"), "/flows").iter().enumerate() {
            let path = pointer("/flows", i);
            let Some(map) = self.object(v, &path, &["from", "to", "label", "crosses_boundary"]) else { continue };
            let from = self.required_string(map, &path, "from");
            let to = self.required_string(map, &path, "to");
            let label = match map.get("label") {
                Some(l) => self.string(l, &pointer(&path, "label")).unwrap_or_default().to_string(),
                None => String::new(),
            };
            let crosses_boundary = self.bool_or_false(map, &path, "crosses_boundary");
            if let (Some(from), Some(to)) = (from, to) {
                model.flows.push(DataFlow {
                    from,
                    to,
                    label,
                    crosses_boundary,
                });
            }
        }

        for (i, v) in self.array(root.get("boundaries"), "/boundaries").iter().enumerate() {
            let path = pointer("/boundaries", i);
            let Some(map) = self.object(v, &path, &["name", "members", "nested"]) else { continue };
            let name = self.required_string(map, &path, "name");
            let members_path = pointer(&path, "members");
            let mut members = BTreeSet::new();
            for (j, m) in self.array(map.get("members"), &members_path).iter().enumerate() {
                let p = pointer(&members_path, j);
                if let Some(s) = self.string(m, &p) {
                    self.insert_unique(&mut members, s.to_string(), p);
                }
            }
            let nested = self.bool_or_false(map, &path, "nested");
            if let Some(name) = name {
                model.boundaries.push(TrustBoundary { name, members, nested });
            }
        }

        if !self.diags.has_errors() {
            semantic_checks(&model, catalog, &self.paths, self.mode, &mut self.diags);
        }
        self.diags.finish(|| model)
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn nearest_control<'a>(id: &ControlId, catalog: &'a Catalog) -> Option<&'a ControlId> {
    catalog
        .controls
        .ids()
        .map(|c| (strsim::jaro_winkler(c.as_str(), id.as_str()), c))
        .filter(|(score, _)| *score >= 0.85)
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, c)| c)
}

fn semantic_checks(model: &PipelineModel, catalog: &Catalog, paths: &DocPaths, mode: Mode, diags: &mut Diagnostics) {
    if mode == Mode::Full {
        if model.name.trim().is_empty() {
            diags.push(Diagnostic::error(DiagnosticKind::Schema, "/name", "model name must not be empty"));
        }
        if model.stages.is_empty() {
            diags.push(Diagnostic::error(DiagnosticKind::Invariant, "/stages", "model must declare at least one stage"));
        }
    }
    for stage in &model.stages {
        if !stage.is_canonical() {
            diags.push(Diagnostic::error(DiagnosticKind::Schema, "/stages", format!("{stage} is not a pipeline model stage")));
        }
    }
    let builtin_assets: Vec<String> = catalog.assets.iter().map(|a| a.id.to_string()).collect();
    for (path, id) in &paths.assets {
        let known = catalog.asset(id).is_some() || model.custom_assets.contains_key(id);
        if !known {
            let hint = if id.is_custom() {
                "custom assets must be declared as {id, description}".to_string()
            } else {
                format!("catalog assets are {}", range_text(&builtin_assets))
            };
            diags.push(Diagnostic::error(DiagnosticKind::UnresolvedId, path.clone(), format!("unknown asset {id}; {hint}")));
        }
    }
    let builtin_agents: Vec<String> = catalog.agents.iter().map(|a| a.id.to_string()).collect();
    for (path, id) in &paths.agents {
        let known = catalog.agent(id).is_some() || model.custom_agents.contains_key(id);
        if !known {
            let hint = if id.is_custom() {
                "custom agents must be declared as {id, name, description}".to_string()
            } else {
                format!("catalog agents are {}", range_text(&builtin_agents))
            };
            diags.push(Diagnostic::error(DiagnosticKind::UnresolvedId, path.clone(), format!("unknown agent {id}; {hint}")));
        }
    }
    for (path, id) in &paths.controls {
        if !catalog.controls.contains(id) {
            let hint = nearest_control(id, catalog)
                .map(|c| format!(" (did you mean {:?}?)", c.as_str()))
                .unwrap_or_default();
            diags.push(Diagnostic::error(
                DiagnosticKind::UnresolvedId,
                path.clone(),
                format!("unknown control {:?}{hint}", id.as_str()),
            ));
        }
    }
    if !capabilities_contiguous(&model.slsa_capabilities) {
        diags.push(Diagnostic::warning(
            DiagnosticKind::NonContiguous,
            "/slsa_capabilities",
            format!(
                "capabilities skip a level; attained level is {} (highest contiguous prefix)",
                model.slsa_level()
            ),
        ));
    }
    for (i, f) in model.flows.iter().enumerate() {
        let path = pointer("/flows", i);
        if f.from.is_empty() || f.to.is_empty() {
            diags.push(Diagnostic::error(DiagnosticKind::Schema, path.clone(), "flow endpoints must not be empty"));
        }
        if f.from == f.to {
            diags.push(Diagnostic::error(DiagnosticKind::Invariant, path, format!("flow from {:?} to itself", f.from)));
        }
    }
    let mut names = BTreeMap::new();
    for (j, b) in model.boundaries.iter().enumerate() {
        let path = pointer("/boundaries", j);
        if let Some(first) = names.insert(b.name.as_str(), j) {
            diags.push(Diagnostic::error(
                DiagnosticKind::Duplicate,
                pointer(&path, "name"),
                format!("boundary {:?} already defined at /boundaries/{first}", b.name),
            ));
        }
        for (i, a) in model.boundaries[..j].iter().enumerate() {
            if a.nested || b.nested {
                continue;
            }
            let shared: Vec<&str> = a.members.intersection(&b.members).map(String::as_str).collect();
            if !shared.is_empty() {
                diags.push(Diagnostic::error(
                    DiagnosticKind::Conflict,
                    pointer(&path, "members"),
                    format!(
                        "boundary {:?} shares {} with /boundaries/{i} ({:?}); mark one as nested",
                        b.name,
                        shared.join(", "),
                        a.name
                    ),
                ));
            }
        }
    }
}

fn range_text(ids: &[String]) -> String {
    match (ids.first(), ids.last()) {
        (Some(a), Some(b)) if ids.len() > 2 => format!("{a}..{b}"),
        _ => ids.join(", "),
    }
}
