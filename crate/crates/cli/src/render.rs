//! Text and JSON rendering shared by the subcommands.

use std::fmt::Write as _;

use cabs_core::abstraction::AbstractionReport;
use cabs_core::graph::{Admg, NodeId, NodeSet};
use serde_json::{json, Value};

pub const DEFAULT_WITNESSES: usize = 10;

/// Result of a subcommand: the verdict plus both renderings.
pub struct Outcome {
    pub passed: bool,
    pub text: String,
    pub json: Value,
}

impl Outcome {
    pub fn ok(text: String, json: Value) -> Self {
        Outcome {
            passed: true,
            text,
            json,
        }
    }
}

/// Residuals: scientific notation, three significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.2e}")
}

/// Probabilities: at most twelve decimals, trailing zeros dropped.
pub fn prob(x: f64) -> String {
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0');
    s.strip_suffix('.').unwrap_or(s).to_owned()
}

pub fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn join(nodes: &NodeSet) -> String {
    nodes.iter().map(NodeId::as_str).collect::<Vec<_>>().join(",")
}

pub fn names(nodes: &NodeSet) -> Value {
    Value::from(nodes.iter().map(|n| n.as_str().to_owned()).collect::<Vec<_>>())
}

pub fn graph_text(out: &mut String, g: &Admg) {
    let nodes: Vec<&str> = g.nodes().iter().map(NodeId::as_str).collect();
    let _ = writeln!(out, "nodes: {}", nodes.join(", "));
    let edges: Vec<String> = g.edge_set().iter().map(|(a, b)| format!("{a} -> {b}")).collect();
    let _ = writeln!(out, "edges: {}", edges.join(", "));
    if g.bidirected_count() > 0 {
        let bi: Vec<String> = g.bidirected_set().iter().map(|(a, b)| format!("{a} <-> {b}")).collect();
        let _ = writeln!(out, "bidirected: {}", bi.join(", "));
    }
}

pub fn graph_json(g: &Admg) -> Value {
    let pair = |(a, b): &(NodeId, NodeId)| json!([a.as_str(), b.as_str()]);
    json!({
        "nodes": g.nodes().iter().map(NodeId::as_str).collect::<Vec<_>>(),
        "edges": g.edge_set().iter().map(pair).collect::<Vec<_>>(),
        "bidirected": g.bidirected_set().iter().map(pair).collect::<Vec<_>>(),
    })
}

pub fn report_text(out: &mut String, r: &AbstractionReport, limit: Option<usize>) {
    let _ = writeln!(out, "{}: {}", r.check, verdict(r.passed));
    let _ = writeln!(
        out,
        "  max residual {} (tolerance {}), {} squares, {} entries skipped",
        sci(r.max_residual()),
        sci(r.tolerance),
        r.squares.len(),
        r.skipped
    );
    for s in &r.squares {
        let skipped = if s.skipped > 0 {
            format!(", {} skipped", s.skipped)
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "  {}: {} ({} entries{skipped})",
            s.square,
            sci(s.residual),
            s.checked
        );
    }
    if r.witnesses.is_empty() {
        return;
    }
    let shown = limit.unwrap_or(r.witnesses.len()).min(r.witnesses.len());
    let _ = writeln!(out, "  witnesses ({shown} of {}):", r.witnesses.len());
    for w in &r.witnesses[..shown] {
        let _ = writeln!(
            out,
            "    {} at [{}] -> [{}]: {} vs {} (difference {})",
            w.square,
            w.input,
            w.output,
            sci(w.lhs),
            sci(w.rhs),
            sci(w.difference())
        );
    }
}

pub fn report_json(r: &AbstractionReport, limit: Option<usize>) -> Value {
    let shown = limit.unwrap_or(r.witnesses.len()).min(r.witnesses.len());
    json!({
        "check": r.check,
        "passed": r.passed,
        "tolerance": r.tolerance,
        "max_residual": r.max_residual(),
        "skipped": r.skipped,
        "squares": r.squares,
        "witness_count": r.witnesses.len(),
        "witnesses": r.witnesses[..shown],
    })
}
