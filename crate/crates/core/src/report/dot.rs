use std::collections::BTreeSet;
use std::fmt::Write;

use crate::model::PipelineModel;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz digraph of the model's data flows. Trust boundaries become
/// clusters; crossing flows are drawn dashed and red.
pub fn render_dfd_dot(model: &PipelineModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(&model.name));
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  node [shape=box];");
    let mut placed = BTreeSet::new();
    for (i, b) in model.boundaries.iter().enumerate() {
        let _ = writeln!(out, "  subgraph {} {{", quote(&format!("cluster_{i}")));
        let _ = writeln!(out, "    label={};", quote(&b.name));
        let _ = writeln!(out, "    style=dashed;");
        for m in &b.members {
            if placed.insert(m.as_str()) {
                let _ = writeln!(out, "    {};", quote(m));
            }
        }
        let _ = writeln!(out, "  }}");
    }
    for node in model.nodes() {
        if !placed.contains(node) {
            let _ = writeln!(out, "  {};", quote(node));
        }
    }
    for f in &model.flows {
        let style = if f.crosses_boundary { ", style=dashed, color=red" } else { "" };
        let _ = writeln!(out, "  {} -> {} [label={}{style}];", quote(&f.from), quote(&f.to), quote(&f.label));
    }
    out.push_str("}\n");
    out
}
