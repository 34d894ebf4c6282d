//! Model builders and brute-force oracles shared by the property and
//! acceptance suites.

#![allow(dead_code)]

use std::collections::BTreeSet;

use pta_core::catalog::{builtin_catalog, Catalog};
use pta_core::model::{AgentId, AssetId, ControlId, PipelineModel, PipelineStage, SlsaCapability, ThreatKey};
use rand::Rng;

pub const ASSETS: u32 = 11;
pub const AGENTS: u32 = 7;

pub fn bits<T: Copy>(items: &[T], mask: u64) -> Vec<T> {
    items.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, t)| *t).collect()
}

pub fn control_ids(catalog: &Catalog) -> Vec<ControlId> {
    catalog.controls.ids().cloned().collect()
}

/// Model over the built-in id space from bit masks.
pub fn model_from_masks(assets: u64, agents: u64, stages: u64, controls: &[bool], caps: u64) -> PipelineModel {
    let mut m = PipelineModel::named("random");
    m.assets = (1..=ASSETS).filter(|n| assets & (1 << (n - 1)) != 0).map(AssetId::Builtin).collect();
    m.agents = (1..=AGENTS).filter(|n| agents & (1 << (n - 1)) != 0).map(AgentId::Builtin).collect();
    m.stages = bits(&PipelineStage::CANONICAL, stages).into_iter().collect();
    m.controls = control_ids(builtin_catalog())
        .into_iter()
        .zip(controls)
        .filter(|(_, on)| **on)
        .map(|(c, _)| c)
        .collect();
    m.slsa_capabilities = bits(&SlsaCapability::ALL, caps).into_iter().collect();
    m
}

pub fn random_model(rng: &mut impl Rng) -> PipelineModel {
    let n = builtin_catalog().controls.len();
    let density: f64 = rng.gen();
    let controls: Vec<bool> = (0..n).map(|_| rng.gen_bool(density)).collect();
    model_from_masks(
        rng.gen_range(0..1 << ASSETS),
        rng.gen_range(0..1 << AGENTS),
        rng.gen_range(1..1 << 4),
        &controls,
        rng.gen_range(0..16),
    )
}

/// Adds a random subset of the remaining controls and capabilities.
pub fn random_superset(rng: &mut impl Rng, base: &PipelineModel) -> PipelineModel {
    let mut m = base.clone();
    for c in control_ids(builtin_catalog()) {
        if rng.gen_bool(0.3) {
            m.controls.insert(c);
        }
    }
    for c in SlsaCapability::ALL {
        if rng.gen_bool(0.2) {
            m.slsa_capabilities.insert(c);
        }
    }
    m
}

/// Brute-force matching over string forms of ids.
pub fn oracle_matches(model: &PipelineModel, catalog: &Catalog) -> BTreeSet<ThreatKey> {
    let assets: BTreeSet<String> = model.assets.iter().map(ToString::to_string).collect();
    let agents: BTreeSet<String> = model.agents.iter().map(ToString::to_string).collect();
    let stages: BTreeSet<&str> = model.stages.iter().map(|s| s.as_str()).collect();
    let mut out = BTreeSet::new();
    for e in &catalog.entries {
        let stage_ok = stages.contains(e.key.stage.as_str());
        let asset_ok = e.assets.iter().any(|a| assets.contains(&a.to_string()));
        let agent_ok = e.agents.iter().any(|a| agents.contains(&a.to_string()));
        if stage_ok && asset_ok && agent_ok {
            out.insert(e.key);
        }
    }
    out
}
