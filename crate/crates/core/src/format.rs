//! JSON model and abstraction files.
//!
//! Both carry `"format_version": 1`. Probabilities are decimal literals.
//! Serialisation uses a fixed key order, so `parse` followed by `to_json`
//! reproduces a canonical file byte for byte.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{EpsilonFamily, TauFamily};
use crate::engine::{
    assignment_count, decode_assignment, encode_assignment, CausalModel, Domain, FiniteMap, Kernel, ModelBuilder,
    Variable,
};
use crate::graph::{latent_projection, Admg, ClusterMap, Dag, NodeId, NodeSet};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported format_version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

impl FormatError {
    fn invalid(path: impl Into<String>, message: impl ToString) -> Self {
        FormatError::Invalid {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        let message = e.to_string();
        let message = match message.rfind(" at line ") {
            Some(i) => message[..i].to_owned(),
            None => message,
        };
        FormatError::Syntax {
            line: e.line(),
            column: e.column(),
            message,
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub name: String,
    pub values: Vec<String>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub latent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub node: String,
    pub parents: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// A causal model, a DAG with latents, or an ADMG.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format_version: u32,
    pub nodes: Vec<NodeSpec>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bidirected: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernels: Option<Vec<KernelSpec>>,
}

fn check_version(v: u32) -> Result<(), FormatError> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(FormatError::Version(v))
    }
}

impl ModelFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let f: ModelFile = serde_json::from_str(text)?;
        check_version(f.format_version)?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serialises");
        s.push('\n');
        s
    }

    pub fn from_model(m: &CausalModel) -> Self {
        let nodes = m
            .variables()
            .iter()
            .map(|v| NodeSpec {
                name: v.name.to_string(),
                values: v.domain.values().to_vec(),
                latent: m.latent().contains(&v.name),
            })
            .collect();
        let edges = m.graph().edges().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        let kernels = m
            .mechanisms()
            .iter()
            .map(|k| KernelSpec {
                node: k.outputs()[0].name.to_string(),
                parents: k.inputs().iter().map(|v| v.name.to_string()).collect(),
                rows: (0..k.rows()).map(|r| k.row(r).to_vec()).collect(),
            })
            .collect();
        ModelFile {
            format_version: FORMAT_VERSION,
            nodes,
            edges,
            bidirected: Vec::new(),
            kernels: Some(kernels),
        }
    }

    /// An ADMG file; nodes get a placeholder binary domain.
    pub fn from_admg(g: &Admg) -> Self {
        ModelFile {
            format_version: FORMAT_VERSION,
            nodes: g
                .nodes()
                .iter()
                .map(|n| NodeSpec {
                    name: n.to_string(),
                    values: vec!["0".into(), "1".into()],
                    latent: false,
                })
                .collect(),
            edges: g
                .directed()
                .edges()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
            bidirected: g.bidirected().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
            kernels: None,
        }
    }

    /// The directed part with its latent nodes.
    pub fn to_dag(&self) -> Result<(Dag, NodeSet), FormatError> {
        let names: Vec<&str> = self.nodes.iter().map(|n| n.name.as_str()).collect();
        let dag = Dag::new(names, self.edges.iter().map(|(a, b)| (a.as_str(), b.as_str())))
            .map_err(|e| FormatError::invalid("edges", e))?;
        let latent = self
            .nodes
            .iter()
            .filter(|n| n.latent)
            .map(|n| NodeId::new(n.name.as_str()))
            .collect();
        Ok((dag, latent))
    }

    /// The graph over the observed nodes: latents are projected out and
    /// listed bidirected edges are added.
    pub fn to_admg(&self) -> Result<Admg, FormatError> {
        let (dag, latent) = self.to_dag()?;
        let observed: NodeSet = dag.nodes().iter().filter(|n| !latent.contains(*n)).cloned().collect();
        let projected = latent_projection(&dag, &observed).map_err(|e| FormatError::invalid("nodes", e))?;
        let mut bi = projected.bidirected_set();
        for (i, (a, b)) in self.bidirected.iter().enumerate() {
            let (a, b) = (NodeId::new(a.as_str()), NodeId::new(b.as_str()));
            let pair =
                if projected.nodes().iter().position(|n| *n == a) <= projected.nodes().iter().position(|n| *n == b) {
                    (a, b)
                } else {
                    (b, a)
                };
            if !bi.insert(pair) {
                return Err(FormatError::invalid(
                    format!("bidirected[{i}]"),
                    "duplicate bidirected edge",
                ));
            }
        }
        let directed: Vec<(NodeId, NodeId)> = projected
            .directed()
            .edges()
            .map(|(a, b)| (a.clone(), b.clone()))
            .collect();
        Admg::new(projected.nodes().to_vec(), directed, bi).map_err(|e| FormatError::invalid("bidirected", e))
    }

    pub fn to_model(&self) -> Result<CausalModel, FormatError> {
        if !self.bidirected.is_empty() {
            return Err(FormatError::invalid(
                "bidirected",
                "a causal model needs explicit latent nodes instead of bidirected edges",
            ));
        }
        let kernels = self
            .kernels
            .as_ref()
            .ok_or_else(|| FormatError::invalid("kernels", "missing; the file describes a graph only"))?;
        let (dag, _) = self.to_dag()?;
        let mut b = ModelBuilder::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let d = Domain::new(n.values.iter().cloned())
                .map_err(|e| FormatError::invalid(format!("nodes[{i}].values"), e))?;
            b = if n.latent {
                b.latent(n.name.as_str(), d)
            } else {
                b.node(n.name.as_str(), d)
            };
        }
        for (a, c) in &self.edges {
            b = b.edge(a.as_str(), c.as_str());
        }
        for (i, k) in kernels.iter().enumerate() {
            let Some(idx) = dag.index_of(&k.node) else {
                return Err(FormatError::invalid(
                    format!("kernels[{i}].node"),
                    format!("unknown node `{}`", k.node),
                ));
            };
            let declared = dag.parent_list(dag.node(idx).as_str()).expect("known node");
            let listed: Vec<NodeId> = k.parents.iter().map(|p| NodeId::new(p.as_str())).collect();
            if listed != declared {
                let show = |v: &[NodeId]| v.iter().map(NodeId::as_str).collect::<Vec<_>>().join(",");
                return Err(FormatError::invalid(
                    format!("kernels[{i}].parents"),
                    format!(
                        "shape mismatch: parents of `{}` must be listed as [{}] (declared order), found [{}]",
                        k.node,
                        show(&declared),
                        show(&listed)
                    ),
                ));
            }
            b = b.kernel(k.node.as_str(), k.rows.clone());
        }
        b.build().map_err(|e| FormatError::invalid("kernels", e))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSpec {
    pub high: String,
    pub low: Vec<String>,
}

/// τ component as explicit `[low value tuple, high value]` entries; the
/// tuple follows the order of the cluster's `low` list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauSpec {
    pub high: String,
    pub entries: Vec<(Vec<String>, String)>,
}

/// ε component: one row per high value (in high domain order), columns
/// over cluster assignments in the order of the cluster's `low` list,
/// rightmost fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonSpec {
    pub high: String,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbstractionFile {
    pub format_version: u32,
    pub clusters: Vec<ClusterSpec>,
    #[serde(default)]
    pub removed: Vec<String>,
    pub tau: Vec<TauSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Vec<EpsilonSpec>>,
}

/// A parsed abstraction resolved against domains.
#[derive(Clone, Debug, PartialEq)]
pub struct Abstraction {
    pub cluster_map: ClusterMap,
    pub tau: TauFamily,
    pub epsilon: Option<EpsilonFamily>,
}

impl AbstractionFile {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let f: AbstractionFile = serde_json::from_str(text)?;
        check_version(f.format_version)?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plain data serialises");
        s.push('\n');
        s
    }

    /// Writes τ entries for every cluster assignment in mixed-radix order.
    pub fn from_parts(cm: &ClusterMap, tau: &TauFamily, eps: Option<&EpsilonFamily>) -> Result<Self, FormatError> {
        let mut clusters = Vec::new();
        let mut taus = Vec::new();
        for h in cm.high_nodes() {
            let comp = tau
                .component(h.as_str())
                .ok_or_else(|| FormatError::invalid("tau", format!("no component for `{h}`")))?;
            clusters.push(ClusterSpec {
                high: h.to_string(),
                low: comp.inputs().iter().map(|v| v.name.to_string()).collect(),
            });
            let out = &comp.outputs()[0].domain;
            let entries = (0..comp.input_count())
                .map(|i| {
                    let values = decode_assignment(comp.inputs(), i);
                    let labels = comp
                        .inputs()
                        .iter()
                        .zip(values)
                        .map(|(v, x)| v.domain.label(x).to_owned())
                        .collect();
                    (labels, out.label(comp.apply(i)).to_owned())
                })
                .collect();
            taus.push(TauSpec {
                high: h.to_string(),
                entries,
            });
        }
        let epsilon = match eps {
            None => None,
            Some(e) => {
                let mut specs = Vec::new();
                for h in cm.high_nodes() {
                    let k = e
                        .component(h.as_str())
                        .ok_or_else(|| FormatError::invalid("epsilon", format!("no component for `{h}`")))?;
                    specs.push(EpsilonSpec {
                        high: h.to_string(),
                        rows: (0..k.rows()).map(|r| k.row(r).to_vec()).collect(),
                    });
                }
                Some(specs)
            }
        };
        Ok(AbstractionFile {
            format_version: FORMAT_VERSION,
            clusters,
            removed: cm.removed().iter().map(|n| n.to_string()).collect(),
            tau: taus,
            epsilon,
        })
    }

    /// Builds the cluster map, τ and ε.
    ///
    /// With models, domains and low node order come from them and every
    /// label is checked. Without, low domains are the values in order of
    /// first appearance in the τ entries and high domains likewise.
    pub fn resolve(&self, low: Option<&CausalModel>, high: Option<&CausalModel>) -> Result<Abstraction, FormatError> {
        let mut low_order: Vec<NodeId> = match low {
            Some(m) => m.graph().nodes().to_vec(),
            None => Vec::new(),
        };
        if low.is_none() {
            for n in self.clusters.iter().flat_map(|c| &c.low).chain(&self.removed) {
                let id = NodeId::new(n.as_str());
                if !low_order.contains(&id) {
                    low_order.push(id);
                }
            }
        }
        let clusters: Vec<(NodeId, Vec<NodeId>)> = self
            .clusters
            .iter()
            .map(|c| {
                (
                    NodeId::new(c.high.as_str()),
                    c.low.iter().map(|n| NodeId::new(n.as_str())).collect(),
                )
            })
            .collect();
        let removed = self.removed.iter().map(|n| NodeId::new(n.as_str())).collect();
        let cm = ClusterMap::from_clusters(&low_order, clusters, removed)
            .map_err(|e| FormatError::invalid("clusters", e))?;

        let mut by_high: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, t) in self.tau.iter().enumerate() {
            if by_high.insert(t.high.as_str(), i).is_some() {
                return Err(FormatError::invalid(
                    format!("tau[{i}].high"),
                    format!("duplicate component `{}`", t.high),
                ));
            }
        }
        let mut maps = Vec::new();
        let mut listed_vars = BTreeMap::new();
        for (ci, c) in self.clusters.iter().enumerate() {
            let ti = *by_high
                .get(c.high.as_str())
                .ok_or_else(|| FormatError::invalid("tau", format!("no component for `{}`", c.high)))?;
            let (map, listed) = self.resolve_tau(ci, ti, low, high)?;
            listed_vars.insert(c.high.clone(), listed);
            maps.push(map);
        }
        if let Some((name, i)) = by_high
            .iter()
            .find(|(h, _)| !self.clusters.iter().any(|c| c.high == **h))
        {
            return Err(FormatError::invalid(
                format!("tau[{i}].high"),
                format!("`{name}` is not a cluster"),
            ));
        }
        let tau = TauFamily::new(maps).map_err(|e| FormatError::invalid("tau", e))?;

        let epsilon = match &self.epsilon {
            None => None,
            Some(specs) => {
                let mut kernels = Vec::new();
                for (i, e) in specs.iter().enumerate() {
                    let path = format!("epsilon[{i}]");
                    let comp = tau
                        .component(&e.high)
                        .ok_or_else(|| FormatError::invalid(&path, format!("`{}` is not a cluster", e.high)))?;
                    let listed: &Vec<Variable> = &listed_vars[&e.high];
                    let k = Kernel::from_rows(comp.outputs().to_vec(), listed.clone(), e.rows.clone())
                        .map_err(|err| FormatError::invalid(&path, err))?;
                    let order: Vec<NodeId> = comp.inputs().iter().map(|v| v.name.clone()).collect();
                    let out: Vec<NodeId> = comp.outputs().iter().map(|v| v.name.clone()).collect();
                    kernels.push(
                        k.reorder(&out, &order)
                            .map_err(|err| FormatError::invalid(&path, err))?,
                    );
                }
                Some(EpsilonFamily::new(kernels).map_err(|e| FormatError::invalid("epsilon", e))?)
            }
        };
        Ok(Abstraction {
            cluster_map: cm,
            tau,
            epsilon,
        })
    }

    /// Returns the component with inputs in low declared order, and the
    /// cluster variables in the order listed in the file.
    fn resolve_tau(
        &self,
        ci: usize,
        ti: usize,
        low: Option<&CausalModel>,
        high: Option<&CausalModel>,
    ) -> Result<(FiniteMap, Vec<Variable>), FormatError> {
        let c = &self.clusters[ci];
        let t = &self.tau[ti];
        let path = |j: usize| format!("tau[{ti}].entries[{j}]");
        for (j, (tuple, _)) in t.entries.iter().enumerate() {
            if tuple.len() != c.low.len() {
                return Err(FormatError::invalid(
                    path(j),
                    format!("expected {} low values, found {}", c.low.len(), tuple.len()),
                ));
            }
        }
        let listed: Vec<Variable> = match low {
            Some(m) => c
                .low
                .iter()
                .map(|n| m.variable(n).cloned())
                .collect::<Result<_, _>>()
                .map_err(|e| FormatError::invalid(format!("clusters[{ci}].low"), e))?,
            None => {
                let mut vars = Vec::new();
                for (k, n) in c.low.iter().enumerate() {
                    let mut seen: Vec<String> = Vec::new();
                    for (tuple, _) in &t.entries {
                        if !seen.contains(&tuple[k]) {
                            seen.push(tuple[k].clone());
                        }
                    }
                    let d = Domain::new(seen).map_err(|e| FormatError::invalid(format!("tau[{ti}]"), e))?;
                    vars.push(Variable::new(n.as_str(), d));
                }
                vars
            }
        };
        let out = match high {
            Some(m) => m
                .variable(&c.high)
                .cloned()
                .map_err(|e| FormatError::invalid(format!("clusters[{ci}].high"), e))?,
            None => {
                let mut seen: Vec<String> = Vec::new();
                for (_, y) in &t.entries {
                    if !seen.contains(y) {
                        seen.push(y.clone());
                    }
                }
                Variable::new(
                    c.high.as_str(),
                    Domain::new(seen).map_err(|e| FormatError::invalid(format!("tau[{ti}]"), e))?,
                )
            }
        };
        let n = assignment_count(&listed);
        let mut image: Vec<Option<usize>> = vec![None; n];
        for (j, (tuple, y)) in t.entries.iter().enumerate() {
            let mut values = Vec::with_capacity(tuple.len());
            for (v, label) in listed.iter().zip(tuple) {
                let x = v.domain.index_of(label).ok_or_else(|| {
                    FormatError::invalid(path(j), format!("`{label}` is not a value of `{}`", v.name))
                })?;
                values.push(x);
            }
            let yi = out
                .domain
                .index_of(y)
                .ok_or_else(|| FormatError::invalid(path(j), format!("`{y}` is not a value of `{}`", out.name)))?;
            let i = encode_assignment(&listed, &values);
            if image[i].replace(yi).is_some() {
                return Err(FormatError::invalid(path(j), "low tuple listed twice"));
            }
        }
        let map = FiniteMap::from_partial(listed.clone(), vec![out.clone()], image).map_err(|e| {
            FormatError::invalid(
                format!("tau[{ti}]"),
                format!("{e}; every low tuple needs exactly one entry"),
            )
        })?;
        if !map.is_surjective() {
            return Err(FormatError::invalid(
                format!("tau[{ti}]"),
                format!("some value of `{}` is never reached", out.name),
            ));
        }
        // Reorder inputs to low declared order.
        let order: Vec<Variable> = match low {
            Some(m) => m.variables().iter().filter(|v| listed.contains(v)).cloned().collect(),
            None => {
                let mut v = listed.clone();
                let pos = |n: &NodeId| {
                    self.clusters
                        .iter()
                        .flat_map(|c| &c.low)
                        .chain(&self.removed)
                        .position(|x| x.as_str() == n.as_str())
                };
                v.sort_by_key(|x| pos(&x.name));
                v
            }
        };
        let names: Vec<NodeId> = order.iter().map(|v| v.name.clone()).collect();
        let proj = crate::engine::Projection::new(&listed, &names).map_err(|e| FormatError::invalid("tau", e))?;
        let radix = crate::engine::Radix::of(&listed);
        let mut reordered = vec![0usize; n];
        for i in 0..n {
            reordered[proj.index(&radix.decode(i))] = map.apply(i);
        }
        let map = FiniteMap::new(order, vec![out], reordered).map_err(|e| FormatError::invalid("tau", e))?;
        Ok((map, listed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const AB: &str = r#"{
  "format_version": 1,
  "nodes": [
    { "name": "A", "values": ["0", "1"] },
    { "name": "B", "values": ["0", "1"] }
  ],
  "edges": [["A", "B"]],
  "kernels": [
    { "node": "A", "parents": [], "rows": [[0.7, 0.3]] },
    { "node": "B", "parents": ["A"], "rows": [[0.8, 0.2], [0.1, 0.9]] }
  ]
}"#;

    #[test]
    fn model_round_trip() {
        let f = ModelFile::parse(AB).unwrap();
        let m = f.to_model().unwrap();
        let again = ModelFile::from_model(&m);
        assert_eq!(again, f);
        let text = again.to_json();
        assert_eq!(ModelFile::parse(&text).unwrap().to_json(), text);
    }

    #[test]
    fn version_and_syntax() {
        let bad = AB.replace("\"format_version\": 1", "\"format_version\": 2");
        assert_eq!(ModelFile::parse(&bad).unwrap_err(), FormatError::Version(2));
        match ModelFile::parse("{\n  \"format_version\": 1,\n  \"nodes\": [,]\n}").unwrap_err() {
            FormatError::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_row_located() {
        let bad = AB.replace("[0.1, 0.9]", "[0.1, 0.8]");
        let err = ModelFile::parse(&bad).unwrap().to_model().unwrap_err();
        assert!(err.to_string().contains("sums to"), "{err}");
    }

    #[test]
    fn admg_file() {
        let text = r#"{"format_version": 1,
            "nodes": [{"name": "U", "values": ["0"], "latent": true},
                      {"name": "A", "values": ["0"]}, {"name": "B", "values": ["0"]}, {"name": "C", "values": ["0"]}],
            "edges": [["U", "A"], ["U", "B"], ["A", "B"]],
            "bidirected": [["C", "B"]]}"#;
        let g = ModelFile::parse(text).unwrap().to_admg().unwrap();
        assert!(g.has_edge("A", "B"));
        assert!(g.has_bidirected("A", "B"));
        assert!(g.has_bidirected("B", "C"));
    }

    #[test]
    fn abstraction_round_trip() {
        let m = ModelFile::parse(AB).unwrap().to_model().unwrap();
        let text = r#"{"format_version": 1,
            "clusters": [{"high": "AB", "low": ["B", "A"]}],
            "tau": [{"high": "AB", "entries": [[["0","0"],"x"], [["0","1"],"y"], [["1","0"],"y"], [["1","1"],"y"]]}]}"#;
        let f = AbstractionFile::parse(text).unwrap();
        let a = f.resolve(Some(&m), None).unwrap();
        let comp = a.tau.component("AB").unwrap();
        // Inputs are (A, B); (A=1, B=0) was listed as ("0", "1") -> y.
        assert_eq!(comp.inputs()[0].name.as_str(), "A");
        assert_eq!(comp.apply(2), 1);
        assert_eq!(comp.apply(0), 0);
        let out = AbstractionFile::from_parts(&a.cluster_map, &a.tau, None).unwrap();
        let back = out.resolve(Some(&m), None).unwrap();
        assert_eq!(back, a);
        assert_eq!(AbstractionFile::parse(&out.to_json()).unwrap(), out);
    }

    #[test]
    fn missing_tau_entry() {
        let m = ModelFile::parse(AB).unwrap().to_model().unwrap();
        let text = r#"{"format_version": 1,
            "clusters": [{"high": "A", "low": ["A"]}, {"high": "B", "low": ["B"]}],
            "tau": [{"high": "A", "entries": [[["0"],"0"], [["1"],"1"]]},
                    {"high": "B", "entries": [[["0"],"0"]]}]}"#;
        let err = AbstractionFile::parse(text)
            .unwrap()
            .resolve(Some(&m), None)
            .unwrap_err();
        assert!(err.to_string().starts_with("tau[1]"), "{err}");
    }
}
