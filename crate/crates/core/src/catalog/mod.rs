//! The threat knowledge base: entries, controls, coverage and supporting
//! tables, loadable from JSON or YAML and embedded as a built-in default.

mod document;
mod load;
mod types;

use std::sync::OnceLock;

use thiserror::Error;

pub use document::CatalogDocument;
pub use load::{load_catalog, load_catalog_tree};
pub use types::*;

use crate::model::{
    AgentId, AssetId, AssetRef, ControlDescriptor, PipelineStage, ThreatAgentRef, ThreatId,
    ThreatKey,
};
use crate::source::SourceFormat;

const BUILTIN_JSON: &str = include_str!("../../data/catalog.json");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("no catalog entry {0}")]
    NotFound(ThreatKey),
}

/// A validated catalog. Immutable once loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    pub version: String,
    pub assets: Vec<AssetRef>,
    pub agents: Vec<ThreatAgentRef>,
    pub controls: ControlRegistry,
    /// In table order: by stage, then by printed row.
    pub entries: Vec<ThreatCatalogEntry>,
    pub coverage: SlsaStrideCoverage,
    pub applicability: Vec<StageApplicability>,
    pub aspects: Vec<AspectGap>,
    pub toolchain: Vec<ToolchainEntry>,
    pub incidents: Vec<IncidentAnnotation>,
    pub heuristics: Vec<IndicatorHeuristic>,
}

/// The embedded catalog, validated on first use.
pub fn builtin_catalog() -> &'static Catalog {
    static BUILTIN: OnceLock<Catalog> = OnceLock::new();
    BUILTIN.get_or_init(|| match load_catalog(BUILTIN_JSON, SourceFormat::Json) {
        Ok(loaded) => loaded.value,
        Err(diags) => panic!("embedded catalog is invalid:\n{diags}"),
    })
}

/// Raw text of the embedded catalog data file.
pub fn builtin_catalog_source() -> &'static str {
    BUILTIN_JSON
}

impl Catalog {
    pub fn entry(&self, key: ThreatKey) -> Option<&ThreatCatalogEntry> {
        self.entries.iter().find(|e| e.key == key)
    }

    /// Entries at `stage`, in table order.
    pub fn threats_for(&self, stage: PipelineStage) -> Vec<&ThreatCatalogEntry> {
        self.entries.iter().filter(|e| e.key.stage == stage).collect()
    }

    /// Control descriptors of an entry, in listed order.
    pub fn controls_for_threat(&self, key: ThreatKey) -> Result<Vec<&ControlDescriptor>, CatalogError> {
        let entry = self.entry(key).ok_or(CatalogError::NotFound(key))?;
        Ok(entry.controls.iter().filter_map(|id| self.controls.get(id)).collect())
    }

    /// Toolchain rows for a threat id, in table order.
    pub fn toolchain_for(&self, threat_id: ThreatId) -> Vec<&ToolchainEntry> {
        self.toolchain.iter().filter(|t| t.threat_id == threat_id).collect()
    }

    pub fn asset(&self, id: &AssetId) -> Option<&AssetRef> {
        self.assets.iter().find(|a| &a.id == id)
    }

    pub fn agent(&self, id: &AgentId) -> Option<&ThreatAgentRef> {
        self.agents.iter().find(|a| &a.id == id)
    }

    pub fn applicability_for(&self, stage: PipelineStage) -> Vec<&StageApplicability> {
        self.applicability.iter().filter(|a| a.stage == stage).collect()
    }

    pub fn to_document(&self) -> CatalogDocument {
        CatalogDocument::from(self)
    }

    /// Pretty-printed JSON that loads back to an equal catalog.
    pub fn export_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(&self.to_document()).expect("catalog serializes");
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostic::DiagnosticKind;
    use crate::model::{slugify, SlsaLevel, StrideCategory::*};
    use std::collections::BTreeSet;

    fn key(id: u32, stage: PipelineStage) -> ThreatKey {
        ThreatKey::new(id, stage)
    }

    #[test]
    fn counts() {
        let c = builtin_catalog();
        assert_eq!(c.assets.len(), 11);
        assert_eq!(c.agents.len(), 7);
        assert_eq!(c.entries.len(), 15);
        let per_stage: Vec<usize> = PipelineStage::CANONICAL.iter().map(|s| c.threats_for(*s).len()).collect();
        assert_eq!(per_stage, [4, 7, 3, 1]);
        assert_eq!(c.applicability.len(), 4);
        assert_eq!(c.aspects.len(), 6);
    }

    #[test]
    fn stage_order() {
        let c = builtin_catalog();
        let ids = |s| c.threats_for(s).iter().map(|e| e.key.threat_id.0).collect::<Vec<_>>();
        assert_eq!(ids(PipelineStage::Source), [1, 5, 4, 11]);
        assert_eq!(ids(PipelineStage::Build), [3, 14, 9, 2, 8, 7, 12]);
        assert_eq!(ids(PipelineStage::Deployment), [10, 13, 14]);
        assert_eq!(ids(PipelineStage::Monitoring), [6]);
    }

    #[test]
    fn stride_rows() {
        let c = builtin_catalog();
        let t1 = c.entry(key(1, PipelineStage::Source)).unwrap();
        assert_eq!(t1.stride, BTreeSet::from([Spoofing, InformationDisclosure, ElevationOfPrivilege]));
        let t14 = c.entry(key(14, PipelineStage::Build)).unwrap();
        assert_eq!(
            t14.stride,
            BTreeSet::from([Tampering, Repudiation, InformationDisclosure, DenialOfService, ElevationOfPrivilege])
        );
        let union: BTreeSet<_> = c.entries.iter().flat_map(|e| e.stride.iter().copied()).collect();
        assert_eq!(union.len(), 6);
    }

    #[test]
    fn slsa_level_rows() {
        use PipelineStage::*;
        use SlsaLevel::*;
        let c = builtin_catalog();
        let with: Vec<(ThreatKey, Vec<SlsaLevel>)> = c
            .entries
            .iter()
            .filter(|e| !e.slsa_levels.is_empty())
            .map(|e| (e.key, e.slsa_levels.iter().copied().collect()))
            .collect();
        assert_eq!(
            with,
            vec![
                (key(5, Source), vec![L3, L4]),
                (key(3, Build), vec![L4]),
                (key(14, Build), vec![L2, L3]),
                (key(7, Build), vec![L4]),
                (key(12, Build), vec![L3, L4]),
                (key(10, Deployment), vec![L4]),
            ]
        );
    }

    #[test]
    fn coverage_cells() {
        let c = builtin_catalog();
        assert_eq!(c.coverage.get(DenialOfService, SlsaLevel::L4), Coverage::None);
        assert_eq!(c.coverage.get(Spoofing, SlsaLevel::L4), Coverage::Partial);
        assert_eq!(c.coverage.get(Tampering, SlsaLevel::L0), Coverage::None);
        assert_eq!(c.coverage.cells().count(), 24);
    }

    #[test]
    fn control_queries() {
        let c = builtin_catalog();
        let t1 = c.controls_for_threat(key(1, PipelineStage::Source)).unwrap();
        assert_eq!(t1.len(), 4);
        assert!(t1[0].text.starts_with("MFA"));
        let t13 = c.controls_for_threat(key(13, PipelineStage::Deployment)).unwrap();
        assert_eq!(t13.len(), 3);
        assert!(t13.iter().any(|d| d.text.contains("drift detection")));
        assert_eq!(
            c.controls_for_threat(key(99, PipelineStage::Source)),
            Err(CatalogError::NotFound(key(99, PipelineStage::Source)))
        );
    }

    #[test]
    fn control_ids_are_slugs_and_referenced() {
        let c = builtin_catalog();
        for d in c.controls.iter() {
            assert_eq!(d.id.as_str(), slugify(&d.text));
            assert!(!d.source_threats.is_empty(), "{}", d.id);
        }
    }

    #[test]
    fn ssdf_dedup_is_reported() {
        let loaded = load_catalog(BUILTIN_JSON, SourceFormat::Json).unwrap();
        assert!(loaded.diagnostics.iter().any(|d| d.kind == DiagnosticKind::Deduplicated));
        let t14 = loaded.value.entry(key(14, PipelineStage::Build)).unwrap();
        let unique: BTreeSet<_> = t14.ssdf.iter().collect();
        assert_eq!(unique.len(), t14.ssdf.len());
    }

    #[test]
    fn toolchain_rows() {
        let c = builtin_catalog();
        assert_eq!(c.toolchain_for(ThreatId(9)).len(), 4);
        assert_eq!(c.toolchain_for(ThreatId(14)).len(), 4);
        for id in 1..=14 {
            assert!(!c.toolchain_for(ThreatId(id)).is_empty(), "T{id}");
        }
    }

    #[test]
    fn export_round_trip() {
        let c = builtin_catalog();
        let again = load_catalog(&c.export_json(), SourceFormat::Json).unwrap().value;
        assert_eq!(&again, c);
    }

    fn builtin_tree() -> serde_json::Value {
        serde_json::from_str(BUILTIN_JSON).unwrap()
    }

    #[test]
    fn dangling_control() {
        let mut tree = builtin_tree();
        tree["entries"][2]["controls"][0] = "nonexistent-control".into();
        let err = load_catalog_tree(tree).unwrap_err();
        let d = err.errors().find(|d| d.kind == DiagnosticKind::DanglingReference).unwrap();
        assert_eq!(d.path, "/entries/2/controls/0");
        assert!(d.message.contains("nonexistent-control"));
    }

    #[test]
    fn missing_coverage_cell() {
        let mut tree = builtin_tree();
        let row = tree["coverage"]
            .as_array_mut()
            .unwrap()
            .iter_mut()
            .find(|r| r["stride"] == "DenialOfService")
            .unwrap();
        row["cells"].as_object_mut().unwrap().remove("L2");
        let err = load_catalog_tree(tree).unwrap_err();
        assert!(err.errors().any(|d| d.kind == DiagnosticKind::MissingCell && d.path.ends_with("/cells/L2")));
    }

    #[test]
    fn unknown_key_has_path() {
        let mut tree = builtin_tree();
        tree["entries"][0]["colour"] = "red".into();
        let err = load_catalog_tree(tree).unwrap_err();
        let d = err.iter().next().unwrap();
        assert_eq!(d.kind, DiagnosticKind::UnknownKey);
        assert_eq!(d.path, "/entries/0/colour");
    }

    #[test]
    fn duplicate_key() {
        let mut tree = builtin_tree();
        let first = tree["entries"][0].clone();
        tree["entries"].as_array_mut().unwrap().push(first);
        let err = load_catalog_tree(tree).unwrap_err();
        assert!(err.errors().any(|d| d.kind == DiagnosticKind::Duplicate && d.path == "/entries/15"));
    }

    #[test]
    fn unreferenced_control() {
        let mut tree = builtin_tree();
        tree["controls"].as_array_mut().unwrap().push(serde_json::json!({
            "id": "orphan-control", "text": "Orphan control", "control_type": "detective", "classification": "editorial"
        }));
        let err = load_catalog_tree(tree).unwrap_err();
        assert!(err.errors().any(|d| d.message.contains("orphan-control")));
    }

    #[test]
    fn yaml_surface_loads_equal() {
        let yaml = serde_yaml::to_string(&builtin_tree()).unwrap();
        let c = load_catalog(&yaml, SourceFormat::Yaml).unwrap().value;
        assert_eq!(&c, builtin_catalog());
    }
}
