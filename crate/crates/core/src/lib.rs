//! Threat-model-as-code auditing for CI/CD pipelines.
//!
//! A [`model::PipelineModel`] is matched against a [`catalog::Catalog`] of
//! stage-keyed threats by the [`engine`], and the resulting
//! [`engine::AuditReport`] is rendered by [`report`].

pub mod catalog;
pub mod diagnostic;
pub mod engine;
pub mod ingest;
pub mod model;
pub mod report;
pub mod source;
