//! DAGs, ADMGs and the graph-level operations used by the abstraction checks.
//!
//! Graph values are immutable after construction. Every operation that
//! changes structure (merging, deleting, surgery, projection) returns a new
//! graph. Node order is the order in which nodes were declared and is used
//! for every deterministic tie-break in the crate.

mod admg;
mod cluster;
mod dag;
mod dsep;
mod projection;

use std::borrow::Borrow;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use admg::Admg;
pub use cluster::{
    abstract_graph, validate_cluster_map, BlockedRemoval, ClusterMap, ClusterMapError, ClusterMapFailure,
    GraphAbstraction, GraphOp, ValidatedClusterMap,
};
pub use dag::Dag;
pub use projection::latent_projection;

/// Label of a node. Compared by exact string equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(label: impl Into<String>) -> Self {
        NodeId(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

impl From<&NodeId> for NodeId {
    fn from(n: &NodeId) -> Self {
        n.clone()
    }
}

impl Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Ordered set of node labels.
pub type NodeSet = BTreeSet<NodeId>;

/// Builds a [`NodeSet`] from anything label-like.
pub fn node_set<I, S>(items: I) -> NodeSet
where
    I: IntoIterator<Item = S>,
    S: Into<NodeId>,
{
    items.into_iter().map(Into::into).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("node labels must be nonempty")]
    EmptyLabel,
    #[error("node `{0}` declared twice")]
    DuplicateNode(NodeId),
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("self-loop on `{0}`")]
    SelfLoop(NodeId),
    #[error("duplicate edge `{0}` -> `{1}`")]
    DuplicateEdge(NodeId, NodeId),
    #[error("duplicate bidirected edge `{0}` <-> `{1}`")]
    DuplicateBidirected(NodeId, NodeId),
    #[error("directed cycle through {}", join(.0))]
    Cycle(Vec<NodeId>),
    #[error("merging `{a}` and `{b}` creates the directed cycle {}", join(.cycle))]
    MergeCreatesCycle { a: NodeId, b: NodeId, cycle: Vec<NodeId> },
    #[error("cannot merge `{0}` with itself")]
    SelfMerge(NodeId),
    #[error("merged name `{0}` is already used by another node")]
    NameCollision(NodeId),
    #[error("`{node}` is a confounder (children {}) and cannot be deleted", join(.children))]
    IsConfounder { node: NodeId, children: Vec<NodeId> },
    #[error("node `{0}` appears in more than one of the separation sets")]
    OverlappingSets(NodeId),
}

pub(crate) fn join(nodes: &[NodeId]) -> String {
    let parts: Vec<&str> = nodes.iter().map(NodeId::as_str).collect();
    parts.join(", ")
}

/// Rejects node sets that share a member.
pub(crate) fn check_disjoint(sets: &[&NodeSet]) -> Result<(), GraphError> {
    let mut seen = NodeSet::new();
    for set in sets {
        for n in *set {
            if !seen.insert(n.clone()) {
                return Err(GraphError::OverlappingSets(n.clone()));
            }
        }
    }
    Ok(())
}
