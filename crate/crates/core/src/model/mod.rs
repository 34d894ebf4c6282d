//! Shared vocabulary: STRIDE, SLSA, SSDF, OWASP, stages, ids and the
//! user-authored [`PipelineModel`].

mod error;
mod ids;
mod pipeline;
mod slsa;
mod stage;
mod stride;

pub use error::ParseError;
pub(crate) use error::suggest;
pub use ids::{
    slugify, AgentId, AssetId, ControlId, OwaspCategory, OwaspCode, SsdfGroup, SsdfPracticeId,
    ThreatId, ThreatKey,
};
pub use pipeline::{
    AgentProfile, AssetRef, ControlDescriptor, ControlType, DataFlow, PipelineModel, Provenance,
    ThreatAgentRef, TrustBoundary,
};
pub use slsa::{capabilities_contiguous, slsa_level_from_capabilities, SlsaCapability, SlsaLevel};
pub use stage::PipelineStage;
pub use stride::{format_stride_flags, parse_stride_flags, StrideCategory, StrideSet};
