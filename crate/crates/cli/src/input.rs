//! Reading model and abstraction files and parsing flag values.

use std::fmt;
use std::path::Path;

use cabs_core::engine::CausalModel;
use cabs_core::format::{Abstraction, AbstractionFile, ModelFile};
use cabs_core::graph::{Admg, ClusterMap, Dag, NodeId, NodeSet};

/// Anything wrong with the input: unreadable or malformed files, bad flags,
/// inputs that violate a precondition. Maps to exit status 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub type Result<T> = std::result::Result<T, InputError>;

pub fn at(path: &Path, e: impl fmt::Display) -> InputError {
    InputError(format!("{}: {e}", path.display()))
}

pub fn err(e: impl fmt::Display) -> InputError {
    InputError(e.to_string())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| at(path, format!("cannot read file: {e}")))
}

pub fn model_file(path: &Path) -> Result<ModelFile> {
    ModelFile::parse(&read(path)?).map_err(|e| at(path, e))
}

pub fn model(path: &Path) -> Result<CausalModel> {
    model_file(path)?.to_model().map_err(|e| at(path, e))
}

pub fn dag(path: &Path) -> Result<(Dag, NodeSet)> {
    model_file(path)?.to_dag().map_err(|e| at(path, e))
}

pub fn admg(path: &Path) -> Result<Admg> {
    model_file(path)?.to_admg().map_err(|e| at(path, e))
}

pub fn abstraction_file(path: &Path) -> Result<AbstractionFile> {
    AbstractionFile::parse(&read(path)?).map_err(|e| at(path, e))
}

pub fn abstraction(path: &Path, low: Option<&CausalModel>, high: Option<&CausalModel>) -> Result<Abstraction> {
    abstraction_file(path)?.resolve(low, high).map_err(|e| at(path, e))
}

/// The cluster map of an abstraction file, ignoring τ and ε. Nodes in
/// `implicit_removed` that the file does not mention count as removed.
pub fn cluster_map(path: &Path, low_nodes: &[NodeId], implicit_removed: &NodeSet) -> Result<ClusterMap> {
    let file = abstraction_file(path)?;
    let clusters = file
        .clusters
        .iter()
        .map(|c| {
            (
                NodeId::new(c.high.as_str()),
                c.low.iter().map(|n| NodeId::new(n.as_str())).collect(),
            )
        })
        .collect();
    let mentioned: NodeSet = file
        .clusters
        .iter()
        .flat_map(|c| &c.low)
        .chain(&file.removed)
        .map(|n| NodeId::new(n.as_str()))
        .collect();
    let mut removed: Vec<NodeId> = file.removed.iter().map(|n| NodeId::new(n.as_str())).collect();
    removed.extend(implicit_removed.iter().filter(|n| !mentioned.contains(*n)).cloned());
    ClusterMap::from_clusters(low_nodes, clusters, removed).map_err(|e| at(path, e))
}

/// `A,B,C` into a node set; empty items are ignored.
pub fn parse_nodes(s: &str) -> std::result::Result<NodeSet, String> {
    Ok(s.split(',')
        .map(str::trim)
        .filter(|n| !n.is_empty())
        .map(NodeId::new)
        .collect())
}

/// `A=a,B=b` into `(node, label)` pairs.
pub fn parse_assignments(s: &str) -> std::result::Result<Vec<(NodeId, String)>, String> {
    let mut out: Vec<(NodeId, String)> = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| format!("expected NODE=VALUE, found `{item}`"))?;
        let name = NodeId::new(name.trim());
        if out.iter().any(|(n, _)| *n == name) {
            return Err(format!("`{name}` is assigned twice"));
        }
        out.push((name, value.trim().to_owned()));
    }
    Ok(out)
}
