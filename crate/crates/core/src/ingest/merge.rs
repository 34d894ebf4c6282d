use thiserror::Error;

use crate::model::{AgentId, AssetId, PipelineModel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MergeError {
    #[error("custom asset {0} is defined differently in base and overlay")]
    ConflictingAsset(AssetId),
    #[error("custom agent {0} is defined differently in base and overlay")]
    ConflictingAgent(AgentId),
    #[error("trust boundary {0:?} is defined differently in base and overlay")]
    ConflictingBoundary(String),
}

/// Set union of `overlay` into `base`. Flows are appended; the name comes
/// from `base`.
pub fn merge_models(base: &PipelineModel, overlay: &PipelineModel) -> Result<PipelineModel, MergeError> {
    let mut out = base.clone();
    for (id, desc) in &overlay.custom_assets {
        match out.custom_assets.get(id) {
            Some(existing) if existing != desc => return Err(MergeError::ConflictingAsset(id.clone())),
            _ => {
                out.custom_assets.insert(id.clone(), desc.clone());
            }
        }
    }
    for (id, profile) in &overlay.custom_agents {
        match out.custom_agents.get(id) {
            Some(existing) if existing != profile => return Err(MergeError::ConflictingAgent(id.clone())),
            _ => {
                out.custom_agents.insert(id.clone(), profile.clone());
            }
        }
    }
    for b in &overlay.boundaries {
        match out.boundaries.iter().find(|x| x.name == b.name) {
            Some(existing) if existing != b => return Err(MergeError::ConflictingBoundary(b.name.clone())),
            Some(_) => {}
            None => out.boundaries.push(b.clone()),
        }
    }
    out.stages.extend(overlay.stages.iter().copied());
    out.assets.extend(overlay.assets.iter().cloned());
    out.agents.extend(overlay.agents.iter().cloned());
    out.controls.extend(overlay.controls.iter().cloned());
    out.slsa_capabilities.extend(overlay.slsa_capabilities.iter().copied());
    out.flows.extend(overlay.flows.iter().cloned());
    Ok(out)
}
