//! Reading user-authored pipeline models and importing CI workflows.

mod document;
mod import;
mod merge;

pub use document::{
    export_model, model_to_tree, parse_partial_model, parse_partial_model_tree, parse_pipeline_model,
    parse_pipeline_model_tree, validate_model,
};
pub use import::{import_ci_workflow, import_ci_workflow_tree, redact, Dialect, IndicatorFinding, Location, WorkflowImport};
pub use merge::{merge_models, MergeError};

#[cfg(test)]
mod tests;
