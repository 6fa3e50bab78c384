//! Cluster maps between a low-level and a high-level graph, and the search
//! for a merge/delete sequence that turns one into the other.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use super::{join, Dag, GraphError, NodeId, NodeSet};

/// Above this many undeleted removed nodes the exhaustive fallback is skipped.
const EXHAUSTIVE_REMOVED_LIMIT: usize = 8;

/// Partial surjection from low-level nodes onto high-level nodes. Low nodes
/// without an image are removed by the abstraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterMap {
    low_nodes: Vec<NodeId>,
    high_nodes: Vec<NodeId>,
    assignment: BTreeMap<NodeId, Option<NodeId>>,
    clusters: BTreeMap<NodeId, Vec<NodeId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClusterMapError {
    #[error("cluster map mentions unknown low-level node `{0}`")]
    UnknownLowNode(NodeId),
    #[error("low-level node `{0}` is neither clustered nor removed")]
    UnassignedLowNode(NodeId),
    #[error("low-level node `{0}` is assigned twice")]
    DuplicateAssignment(NodeId),
    #[error("cluster map targets unknown high-level node `{0}`")]
    UnknownHighNode(NodeId),
    #[error("high-level node `{0}` has an empty cluster (map is not surjective)")]
    EmptyCluster(NodeId),
    #[error("cluster map low nodes [{}] do not match the graph nodes [{}]", join(.map), join(.graph))]
    LowNodesMismatch { map: Vec<NodeId>, graph: Vec<NodeId> },
    #[error("cluster map high nodes [{}] do not match the graph nodes [{}]", join(.map), join(.graph))]
    HighNodesMismatch { map: Vec<NodeId>, graph: Vec<NodeId> },
    #[error("high-level name `{0}` clashes with a low-level node outside its cluster")]
    NameCollision(NodeId),
    #[error("no merge/delete sequence realises the cluster map: {0}")]
    Infeasible(Box<ClusterMapFailure>),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

impl ClusterMap {
    /// Builds a map from an explicit assignment; `None` marks a removed node.
    pub fn new<A>(low_nodes: Vec<NodeId>, high_nodes: Vec<NodeId>, assignment: A) -> Result<Self, ClusterMapError>
    where
        A: IntoIterator<Item = (NodeId, Option<NodeId>)>,
    {
        let low_set: NodeSet = low_nodes.iter().cloned().collect();
        let high_set: NodeSet = high_nodes.iter().cloned().collect();
        if let Some(dup) = first_duplicate(&low_nodes) {
            return Err(GraphError::DuplicateNode(dup).into());
        }
        if let Some(dup) = first_duplicate(&high_nodes) {
            return Err(GraphError::DuplicateNode(dup).into());
        }
        let mut map = BTreeMap::new();
        for (low, high) in assignment {
            if !low_set.contains(&low) {
                return Err(ClusterMapError::UnknownLowNode(low));
            }
            if let Some(h) = &high {
                if !high_set.contains(h) {
                    return Err(ClusterMapError::UnknownHighNode(h.clone()));
                }
            }
            if map.insert(low.clone(), high).is_some() {
                return Err(ClusterMapError::DuplicateAssignment(low));
            }
        }
        let mut clusters: BTreeMap<NodeId, Vec<NodeId>> = high_nodes.iter().map(|h| (h.clone(), Vec::new())).collect();
        for low in &low_nodes {
            match map.get(low) {
                None => return Err(ClusterMapError::UnassignedLowNode(low.clone())),
                Some(Some(h)) => clusters.get_mut(h).expect("checked").push(low.clone()),
                Some(None) => {}
            }
        }
        if let Some((h, _)) = clusters.iter().find(|(_, members)| members.is_empty()) {
            return Err(ClusterMapError::EmptyCluster(h.clone()));
        }
        Ok(ClusterMap {
            low_nodes,
            high_nodes,
            assignment: map,
            clusters,
        })
    }

    /// Builds a map from `(high node, members)` pairs plus the removed list.
    /// High node order is the order of `clusters`.
    pub fn from_clusters(
        low_nodes: &[NodeId],
        clusters: Vec<(NodeId, Vec<NodeId>)>,
        removed: Vec<NodeId>,
    ) -> Result<Self, ClusterMapError> {
        let high_nodes: Vec<NodeId> = clusters.iter().map(|(h, _)| h.clone()).collect();
        let mut assignment = Vec::new();
        for (h, members) in clusters {
            assignment.extend(members.into_iter().map(|m| (m, Some(h.clone()))));
        }
        assignment.extend(removed.into_iter().map(|r| (r, None)));
        Self::new(low_nodes.to_vec(), high_nodes, assignment)
    }

    pub fn identity(nodes: &[NodeId]) -> Self {
        Self::new(
            nodes.to_vec(),
            nodes.to_vec(),
            nodes.iter().map(|n| (n.clone(), Some(n.clone()))),
        )
        .expect("identity map is well formed")
    }

    pub fn low_nodes(&self) -> &[NodeId] {
        &self.low_nodes
    }

    pub fn high_nodes(&self) -> &[NodeId] {
        &self.high_nodes
    }

    /// The high node `low` is clustered into, or `None` if removed/unknown.
    pub fn image(&self, low: &str) -> Option<&NodeId> {
        self.assignment.get(low).and_then(Option::as_ref)
    }

    /// Members of the cluster of `high`, in low-level declaration order.
    pub fn cluster(&self, high: &str) -> Option<&[NodeId]> {
        self.clusters.get(high).map(Vec::as_slice)
    }

    pub fn removed(&self) -> Vec<NodeId> {
        self.low_nodes
            .iter()
            .filter(|n| matches!(self.assignment.get(*n), Some(None)))
            .cloned()
            .collect()
    }

    /// Union of the clusters of `high`.
    pub fn expand(&self, high: &NodeSet) -> Result<NodeSet, ClusterMapError> {
        let mut out = NodeSet::new();
        for h in high {
            let members = self
                .cluster(h.as_str())
                .ok_or_else(|| ClusterMapError::UnknownHighNode(h.clone()))?;
            out.extend(members.iter().cloned());
        }
        Ok(out)
    }

    pub(crate) fn check_low(&self, low: &Dag) -> Result<(), ClusterMapError> {
        let mine: NodeSet = self.low_nodes.iter().cloned().collect();
        let theirs: NodeSet = low.nodes().iter().cloned().collect();
        if mine != theirs {
            return Err(ClusterMapError::LowNodesMismatch {
                map: self.low_nodes.clone(),
                graph: low.nodes().to_vec(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_high(&self, high: &Dag) -> Result<(), ClusterMapError> {
        let mine: NodeSet = self.high_nodes.iter().cloned().collect();
        let theirs: NodeSet = high.nodes().iter().cloned().collect();
        if mine != theirs {
            return Err(ClusterMapError::HighNodesMismatch {
                map: self.high_nodes.clone(),
                graph: high.nodes().to_vec(),
            });
        }
        Ok(())
    }
}

fn first_duplicate(nodes: &[NodeId]) -> Option<NodeId> {
    let mut seen = BTreeSet::new();
    nodes.iter().find(|n| !seen.insert(*n)).cloned()
}

/// One graphical-abstraction step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphOp {
    Merge { a: NodeId, b: NodeId, merged: NodeId },
    Delete { node: NodeId },
}

impl GraphOp {
    pub fn apply(&self, g: &Dag) -> Result<Dag, GraphError> {
        match self {
            GraphOp::Merge { a, b, merged } => g.merge_nodes(a.as_str(), b.as_str(), merged.as_str()),
            GraphOp::Delete { node } => g.delete_node(node.as_str()),
        }
    }
}

impl fmt::Display for GraphOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphOp::Merge { a, b, merged } => write!(f, "merge({a}, {b}) -> {merged}"),
            GraphOp::Delete { node } => write!(f, "delete({node})"),
        }
    }
}

/// A removed node that could not be deleted because it feeds several nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockedRemoval {
    pub node: NodeId,
    pub children: Vec<NodeId>,
}

/// Why a cluster map does not describe a graphical abstraction.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClusterMapFailure {
    /// Cluster parts that could not be merged without creating a cycle,
    /// with the cycle reported for the first attempted pair.
    pub cyclic_merges: Vec<(NodeId, Vec<NodeId>)>,
    pub blocked_removals: Vec<BlockedRemoval>,
    /// Edges of the high graph missing from the abstracted low graph.
    pub missing_edges: Vec<(NodeId, NodeId)>,
    /// Edges of the abstracted low graph absent from the high graph.
    pub extra_edges: Vec<(NodeId, NodeId)>,
}

impl fmt::Display for ClusterMapFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (high, cycle) in &self.cyclic_merges {
            parts.push(format!("merging cluster `{high}` creates cycle {}", join(cycle)));
        }
        for b in &self.blocked_removals {
            parts.push(format!(
                "removed node `{}` is a confounder of {}",
                b.node,
                join(&b.children)
            ));
        }
        for (a, b) in &self.missing_edges {
            parts.push(format!("edge {a} -> {b} missing"));
        }
        for (a, b) in &self.extra_edges {
            parts.push(format!("unexpected edge {a} -> {b}"));
        }
        f.write_str(&parts.join("; "))
    }
}

/// Result of abstracting a low graph along a cluster map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphAbstraction {
    /// Operations in application order. A merge completing a cluster
    /// carries its high name.
    pub ops: Vec<GraphOp>,
    /// Final relabelling of singleton clusters to their high names.
    pub renaming: BTreeMap<NodeId, NodeId>,
    /// The abstracted graph, labelled by high-level names.
    pub graph: Dag,
}

impl GraphAbstraction {
    /// Replays the witness on `low`.
    pub fn replay(&self, low: &Dag) -> Result<Dag, GraphError> {
        let mut g = low.clone();
        for op in &self.ops {
            g = op.apply(&g)?;
        }
        g.rename(&self.renaming)
    }
}

#[derive(Clone)]
struct State {
    g: Dag,
    /// Current node labels that still make up each cluster.
    parts: BTreeMap<NodeId, Vec<NodeId>>,
    removed: Vec<NodeId>,
}

impl State {
    fn done(&self) -> bool {
        self.removed.is_empty() && self.parts.values().all(|p| p.len() == 1)
    }

    fn moves(&self) -> Vec<GraphOp> {
        let mut out = Vec::new();
        for (high, parts) in &self.parts {
            for (i, a) in parts.iter().enumerate() {
                for b in &parts[i + 1..] {
                    let merged = if parts.len() == 2 {
                        high.clone()
                    } else {
                        self.fresh_name(high)
                    };
                    out.push(GraphOp::Merge {
                        a: a.clone(),
                        b: b.clone(),
                        merged,
                    });
                }
            }
        }
        out.extend(self.removed.iter().map(|r| GraphOp::Delete { node: r.clone() }));
        out
    }

    /// Label for a partial merge inside cluster `high`.
    fn fresh_name(&self, high: &NodeId) -> NodeId {
        (1..)
            .map(|k| NodeId::new(format!("{high}~{k}")))
            .find(|n| !self.g.contains(n.as_str()) && !self.parts.contains_key(n))
            .expect("unbounded")
    }

    fn apply(&self, op: &GraphOp) -> Result<State, GraphError> {
        let g = op.apply(&self.g)?;
        let mut next = State {
            g,
            parts: self.parts.clone(),
            removed: self.removed.clone(),
        };
        match op {
            GraphOp::Merge { a, b, merged } => {
                let parts = next
                    .parts
                    .values_mut()
                    .find(|p| p.contains(a))
                    .expect("merge within a cluster");
                parts.retain(|p| p != a && p != b);
                parts.push(merged.clone());
                let g = &next.g;
                parts.sort_by_key(|p| g.index_of(p.as_str()));
            }
            GraphOp::Delete { node } => next.removed.retain(|r| r != node),
        }
        Ok(next)
    }

    fn key(&self) -> StateKey {
        let mut nodes = self.g.nodes().to_vec();
        nodes.sort();
        (nodes, self.g.edge_set())
    }
}

/// Abstracts `low` along `cm`: merges every cluster into one node named by
/// its high label and deletes every removed node.
///
/// Operations are applied greedily; if the greedy pass stalls with few
/// removed nodes left, every remaining operation order is tried. Partial
/// merges inside a cluster get temporary `high~k` labels.
pub fn abstract_graph(low: &Dag, cm: &ClusterMap) -> Result<GraphAbstraction, ClusterMapError> {
    cm.check_low(low)?;
    for (high, members) in &cm.clusters {
        if members.len() > 1 && low.contains(high.as_str()) && !members.contains(high) {
            return Err(ClusterMapError::NameCollision(high.clone()));
        }
    }

    let mut state = State {
        g: low.clone(),
        parts: cm.clusters.clone(),
        removed: cm.removed(),
    };
    let mut ops = Vec::new();
    greedy(&mut state, &mut ops);

    if !state.done() {
        if state.removed.len() > EXHAUSTIVE_REMOVED_LIMIT {
            return Err(infeasible(&state));
        }
        let mut visited = HashSet::new();
        let mut tail = Vec::new();
        if !search(&state, &mut tail, &mut visited) {
            return Err(infeasible(&state));
        }
        for op in tail {
            state = state.apply(&op).expect("search replays its own moves");
            ops.push(op);
        }
    }

    let renaming: BTreeMap<NodeId, NodeId> = state
        .parts
        .iter()
        .filter(|(high, parts)| parts[0] != **high)
        .map(|(high, parts)| (parts[0].clone(), high.clone()))
        .collect();
    let graph = state.g.rename(&renaming)?;
    Ok(GraphAbstraction { ops, renaming, graph })
}

fn greedy(state: &mut State, ops: &mut Vec<GraphOp>) {
    loop {
        // Merges first, then deletions, until neither applies.
        let merge = first_applicable(state, |op| matches!(op, GraphOp::Merge { .. }));
        let step = merge.or_else(|| first_applicable(state, |op| matches!(op, GraphOp::Delete { .. })));
        match step {
            Some((op, next)) => {
                *state = next;
                ops.push(op);
            }
            None => return,
        }
    }
}

fn first_applicable(state: &State, kind: impl Fn(&GraphOp) -> bool) -> Option<(GraphOp, State)> {
    state
        .moves()
        .into_iter()
        .filter(|op| kind(op))
        .find_map(|op| state.apply(&op).ok().map(|next| (op, next)))
}

/// Sorted node list and edge set of a search state.
type StateKey = (Vec<NodeId>, BTreeSet<(NodeId, NodeId)>);

fn search(state: &State, path: &mut Vec<GraphOp>, visited: &mut HashSet<StateKey>) -> bool {
    if state.done() {
        return true;
    }
    if !visited.insert(state.key()) {
        return false;
    }
    for op in state.moves() {
        if let Ok(next) = state.apply(&op) {
            path.push(op);
            if search(&next, path, visited) {
                return true;
            }
            path.pop();
        }
    }
    false
}

fn infeasible(state: &State) -> ClusterMapError {
    let mut failure = ClusterMapFailure::default();
    for (high, parts) in &state.parts {
        if parts.len() < 2 {
            continue;
        }
        if let Err(GraphError::MergeCreatesCycle { cycle, .. }) =
            state.g.merge_nodes(parts[0].as_str(), parts[1].as_str(), high.as_str())
        {
            failure.cyclic_merges.push((high.clone(), cycle));
        }
    }
    for r in &state.removed {
        if let Err(GraphError::IsConfounder { node, children }) = state.g.delete_node(r.as_str()) {
            failure.blocked_removals.push(BlockedRemoval { node, children });
        }
    }
    ClusterMapError::Infeasible(Box::new(failure))
}

/// A cluster map checked against both graphs, with its witness.
#[derive(Debug, Clone)]
pub struct ValidatedClusterMap {
    map: ClusterMap,
    abstraction: GraphAbstraction,
    high: Dag,
}

impl ValidatedClusterMap {
    /// Validates `cm` against `low` alone, taking the abstracted graph as
    /// the high graph.
    pub fn derive(low: &Dag, cm: &ClusterMap) -> Result<Self, ClusterMapError> {
        let abstraction = abstract_graph(low, cm)?;
        Ok(ValidatedClusterMap {
            map: cm.clone(),
            high: abstraction.graph.clone(),
            abstraction,
        })
    }

    pub fn map(&self) -> &ClusterMap {
        &self.map
    }

    pub fn witness(&self) -> &[GraphOp] {
        &self.abstraction.ops
    }

    pub fn abstraction(&self) -> &GraphAbstraction {
        &self.abstraction
    }

    /// The high graph the map was validated against.
    pub fn high_graph(&self) -> &Dag {
        &self.high
    }
}

impl std::ops::Deref for ValidatedClusterMap {
    type Target = ClusterMap;

    fn deref(&self) -> &ClusterMap {
        &self.map
    }
}

/// Checks that `high` is the graphical abstraction of `low` described by
/// `cm` and returns the witnessing operation sequence.
pub fn validate_cluster_map(low: &Dag, high: &Dag, cm: &ClusterMap) -> Result<ValidatedClusterMap, ClusterMapError> {
    cm.check_high(high)?;
    let abstraction = abstract_graph(low, cm)?;
    let got = abstraction.graph.edge_set();
    let want = high.edge_set();
    if got != want {
        let failure = ClusterMapFailure {
            missing_edges: want.difference(&got).cloned().collect(),
            extra_edges: got.difference(&want).cloned().collect(),
            ..Default::default()
        };
        return Err(ClusterMapError::Infeasible(Box::new(failure)));
    }
    Ok(ValidatedClusterMap {
        map: cm.clone(),
        abstraction,
        high: high.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[&str]) -> Vec<NodeId> {
        v.iter().map(|s| NodeId::new(*s)).collect()
    }

    fn chain() -> Dag {
        Dag::new(["A", "B", "C"], [("A", "B"), ("B", "C")]).unwrap()
    }

    #[test]
    fn whole_chain_into_one_node() {
        let low = chain();
        let high = Dag::new(["ABC"], Vec::<(&str, &str)>::new()).unwrap();
        let cm =
            ClusterMap::from_clusters(low.nodes(), vec![(NodeId::new("ABC"), ids(&["A", "B", "C"]))], vec![]).unwrap();
        let v = validate_cluster_map(&low, &high, &cm).unwrap();
        assert_eq!(
            v.witness(),
            &[
                GraphOp::Merge {
                    a: "A".into(),
                    b: "B".into(),
                    merged: "ABC~1".into()
                },
                GraphOp::Merge {
                    a: "ABC~1".into(),
                    b: "C".into(),
                    merged: "ABC".into()
                },
            ]
        );
        assert!(v.abstraction().replay(&low).unwrap().same_structure(&high));
    }

    #[test]
    fn confounder_cannot_be_removed() {
        let low = Dag::new(["U", "A", "B"], [("U", "A"), ("U", "B"), ("A", "B")]).unwrap();
        let high = Dag::new(["A", "B"], [("A", "B")]).unwrap();
        let cm = ClusterMap::from_clusters(
            low.nodes(),
            vec![("A".into(), ids(&["A"])), ("B".into(), ids(&["B"]))],
            ids(&["U"]),
        )
        .unwrap();
        let err = validate_cluster_map(&low, &high, &cm).unwrap_err();
        let ClusterMapError::Infeasible(f) = err else {
            panic!("{err:?}")
        };
        assert_eq!(f.blocked_removals[0].node, NodeId::new("U"));
    }

    #[test]
    fn single_deletion() {
        let low = chain();
        let high = Dag::new(["A", "C"], [("A", "C")]).unwrap();
        let cm = ClusterMap::from_clusters(
            low.nodes(),
            vec![("A".into(), ids(&["A"])), ("C".into(), ids(&["C"]))],
            ids(&["B"]),
        )
        .unwrap();
        let v = validate_cluster_map(&low, &high, &cm).unwrap();
        assert_eq!(v.witness(), &[GraphOp::Delete { node: "B".into() }]);
    }

    #[test]
    fn deletion_before_merge_avoids_cycle() {
        // Merging A and B first would close A -> X -> B into a cycle.
        let low = Dag::new(["A", "X", "B"], [("A", "X"), ("X", "B")]).unwrap();
        let high = Dag::new(["AB"], Vec::<(&str, &str)>::new()).unwrap();
        let cm = ClusterMap::from_clusters(low.nodes(), vec![("AB".into(), ids(&["A", "B"]))], ids(&["X"])).unwrap();
        let v = validate_cluster_map(&low, &high, &cm).unwrap();
        assert_eq!(v.witness()[0], GraphOp::Delete { node: "X".into() });
    }

    #[test]
    fn cluster_cycle_is_reported() {
        // A -> M -> B with A, B clustered and M kept forms a cluster-level cycle.
        let low = Dag::new(["A", "M", "B"], [("A", "M"), ("M", "B")]).unwrap();
        let cm = ClusterMap::from_clusters(
            low.nodes(),
            vec![("AB".into(), ids(&["A", "B"])), ("M".into(), ids(&["M"]))],
            vec![],
        )
        .unwrap();
        let err = abstract_graph(&low, &cm).unwrap_err();
        let ClusterMapError::Infeasible(f) = err else { panic!() };
        assert_eq!(f.cyclic_merges.len(), 1);
    }

    #[test]
    fn wrong_high_graph_lists_edges() {
        let low = chain();
        let high = Dag::new(["A", "C"], Vec::<(&str, &str)>::new()).unwrap();
        let cm = ClusterMap::from_clusters(
            low.nodes(),
            vec![("A".into(), ids(&["A"])), ("C".into(), ids(&["C"]))],
            ids(&["B"]),
        )
        .unwrap();
        let ClusterMapError::Infeasible(f) = validate_cluster_map(&low, &high, &cm).unwrap_err() else {
            panic!()
        };
        assert_eq!(f.extra_edges, vec![("A".into(), "C".into())]);
    }

    #[test]
    fn renamed_singletons() {
        let low = Dag::new(["A", "B"], [("A", "B")]).unwrap();
        let high = Dag::new(["X", "Y"], [("X", "Y")]).unwrap();
        let cm = ClusterMap::from_clusters(
            low.nodes(),
            vec![("X".into(), ids(&["A"])), ("Y".into(), ids(&["B"]))],
            vec![],
        )
        .unwrap();
        let v = validate_cluster_map(&low, &high, &cm).unwrap();
        assert!(v.witness().is_empty());
        assert_eq!(v.abstraction().renaming.len(), 2);
    }

    #[test]
    fn malformed_maps() {
        let nodes = ids(&["A", "B"]);
        assert_eq!(
            ClusterMap::new(nodes.clone(), ids(&["H"]), [("A".into(), Some("H".into()))]).unwrap_err(),
            ClusterMapError::UnassignedLowNode("B".into())
        );
        assert_eq!(
            ClusterMap::new(
                nodes.clone(),
                ids(&["H", "K"]),
                [("A".into(), Some("H".into())), ("B".into(), Some("H".into()))]
            )
            .unwrap_err(),
            ClusterMapError::EmptyCluster("K".into())
        );
        assert!(matches!(
            ClusterMap::new(nodes, ids(&["H"]), [("A".into(), Some("Q".into()))]),
            Err(ClusterMapError::UnknownHighNode(_))
        ));
        let low = Dag::new(["A", "B", "C"], Vec::<(&str, &str)>::new()).unwrap();
        let cm = ClusterMap::from_clusters(
            low.nodes(),
            vec![("C".into(), ids(&["A", "B"])), ("D".into(), ids(&["C"]))],
            vec![],
        )
        .unwrap();
        assert_eq!(
            abstract_graph(&low, &cm).unwrap_err(),
            ClusterMapError::NameCollision("C".into())
        );
    }

    #[test]
    fn cluster_needing_two_partial_merges() {
        // R feeds both C and D; it becomes deletable only after C and D
        // merge, and the whole cluster can only merge after R is gone.
        let low = Dag::new(
            ["A", "B", "C", "D", "R"],
            [("A", "C"), ("A", "D"), ("A", "R"), ("B", "R"), ("R", "C"), ("R", "D")],
        )
        .unwrap();
        let cm = ClusterMap::from_clusters(low.nodes(), vec![("H".into(), ids(&["A", "B", "C", "D"]))], ids(&["R"]))
            .unwrap();
        let v = ValidatedClusterMap::derive(&low, &cm).unwrap();
        assert_eq!(v.high_graph().nodes(), ids(&["H"]).as_slice());
        assert!(v.abstraction().replay(&low).unwrap().same_structure(v.high_graph()));
    }
}
