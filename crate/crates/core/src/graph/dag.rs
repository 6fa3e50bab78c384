use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};

use super::{dsep, GraphError, NodeId, NodeSet};

/// Directed acyclic graph over named nodes.
///
/// Parent and child lists are kept sorted by declaration index, so every
/// traversal is deterministic.
#[derive(Debug, Clone)]
pub struct Dag {
    nodes: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl PartialEq for Dag {
    /// Same declared node order and same edge set.
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.parents == other.parents
    }
}

impl Eq for Dag {}

impl Dag {
    /// Builds a DAG, rejecting unknown endpoints, self-loops, duplicate edges
    /// and directed cycles.
    pub fn new<N, E, S>(nodes: N, edges: E) -> Result<Self, GraphError>
    where
        N: IntoIterator<Item = S>,
        S: Into<NodeId>,
        E: IntoIterator<Item = (S, S)>,
    {
        let nodes: Vec<NodeId> = nodes.into_iter().map(Into::into).collect();
        let edges: Vec<(NodeId, NodeId)> = edges.into_iter().map(|(a, b)| (a.into(), b.into())).collect();
        Self::from_parts(nodes, &edges)
    }

    pub(crate) fn from_parts(nodes: Vec<NodeId>, edges: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if n.as_str().is_empty() {
                return Err(GraphError::EmptyLabel);
            }
            if index.insert(n.clone(), i).is_some() {
                return Err(GraphError::DuplicateNode(n.clone()));
            }
        }
        let lookup = |n: &NodeId| index.get(n).copied().ok_or_else(|| GraphError::UnknownNode(n.clone()));
        let mut parents = vec![Vec::new(); nodes.len()];
        let mut children = vec![Vec::new(); nodes.len()];
        let mut seen = BTreeSet::new();
        for (a, b) in edges {
            let (ia, ib) = (lookup(a)?, lookup(b)?);
            if ia == ib {
                return Err(GraphError::SelfLoop(a.clone()));
            }
            if !seen.insert((ia, ib)) {
                return Err(GraphError::DuplicateEdge(a.clone(), b.clone()));
            }
            parents[ib].push(ia);
            children[ia].push(ib);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }
        let topo = match kahn(&parents, &children) {
            Some(order) => order,
            None => {
                let cycle = find_cycle(&children).into_iter().map(|i| nodes[i].clone()).collect();
                return Err(GraphError::Cycle(cycle));
            }
        };
        Ok(Dag {
            nodes,
            index,
            parents,
            children,
            topo,
        })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, n: &str) -> bool {
        self.index.contains_key(n)
    }

    pub fn index_of(&self, n: &str) -> Option<usize> {
        self.index.get(n).copied()
    }

    pub(crate) fn require(&self, n: &str) -> Result<usize, GraphError> {
        self.index_of(n).ok_or_else(|| GraphError::UnknownNode(NodeId::new(n)))
    }

    pub(crate) fn require_set(&self, set: &NodeSet) -> Result<Vec<usize>, GraphError> {
        set.iter().map(|n| self.require(n.as_str())).collect()
    }

    pub fn node(&self, i: usize) -> &NodeId {
        &self.nodes[i]
    }

    /// Edges in (parent index, child index) order.
    pub fn edges(&self) -> impl Iterator<Item = (&NodeId, &NodeId)> + '_ {
        self.edge_indices().map(move |(a, b)| (&self.nodes[a], &self.nodes[b]))
    }

    pub(crate) fn edge_indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.children
            .iter()
            .enumerate()
            .flat_map(|(a, cs)| cs.iter().map(move |&b| (a, b)))
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(ia), Some(ib)) => self.children[ia].binary_search(&ib).is_ok(),
            _ => false,
        }
    }

    pub(crate) fn parent_indices(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub(crate) fn child_indices(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    /// Parents of `n` in declaration order.
    pub fn parent_list(&self, n: &str) -> Result<Vec<NodeId>, GraphError> {
        let i = self.require(n)?;
        Ok(self.names(&self.parents[i]))
    }

    pub fn parents(&self, n: &str) -> Result<NodeSet, GraphError> {
        let i = self.require(n)?;
        Ok(self.name_set(self.parents[i].iter().copied()))
    }

    pub fn children(&self, n: &str) -> Result<NodeSet, GraphError> {
        let i = self.require(n)?;
        Ok(self.name_set(self.children[i].iter().copied()))
    }

    /// Strict ancestors of `n`.
    pub fn ancestors(&self, n: &str) -> Result<NodeSet, GraphError> {
        let i = self.require(n)?;
        let reach = self.closure(&[i], &self.parents);
        Ok(self.name_set((0..self.len()).filter(|&j| j != i && reach[j])))
    }

    /// Strict descendants of `n`.
    pub fn descendants(&self, n: &str) -> Result<NodeSet, GraphError> {
        let i = self.require(n)?;
        let reach = self.closure(&[i], &self.children);
        Ok(self.name_set((0..self.len()).filter(|&j| j != i && reach[j])))
    }

    /// Membership mask of the seeds together with all their ancestors.
    pub(crate) fn ancestor_mask(&self, seeds: &[usize]) -> Vec<bool> {
        self.closure(seeds, &self.parents)
    }

    fn closure(&self, seeds: &[usize], adjacency: &[Vec<usize>]) -> Vec<bool> {
        let mut mark = vec![false; self.len()];
        let mut stack: Vec<usize> = seeds.to_vec();
        while let Some(v) = stack.pop() {
            if mark[v] {
                continue;
            }
            mark[v] = true;
            stack.extend(adjacency[v].iter().copied().filter(|&u| !mark[u]));
        }
        mark
    }

    /// Linear order with every edge pointing forward. Among the available
    /// roots at each step the earliest-declared node is taken.
    pub fn topological_order(&self) -> Vec<NodeId> {
        self.names(&self.topo)
    }

    pub(crate) fn topo_indices(&self) -> &[usize] {
        &self.topo
    }

    /// Merges `a` and `b` into a single node named `merged`.
    ///
    /// The merged node takes the declaration slot of whichever of `a`, `b`
    /// was declared first. Edges between `a` and `b` disappear; parallel
    /// edges collapse.
    pub fn merge_nodes(&self, a: &str, b: &str, merged: &str) -> Result<Dag, GraphError> {
        let ia = self.require(a)?;
        let ib = self.require(b)?;
        if ia == ib {
            return Err(GraphError::SelfMerge(self.nodes[ia].clone()));
        }
        if merged.is_empty() {
            return Err(GraphError::EmptyLabel);
        }
        if let Some(j) = self.index_of(merged) {
            if j != ia && j != ib {
                return Err(GraphError::NameCollision(NodeId::new(merged)));
            }
        }
        let merged = NodeId::new(merged);
        let slot = ia.min(ib);
        let name_of = |i: usize| {
            if i == ia || i == ib {
                merged.clone()
            } else {
                self.nodes[i].clone()
            }
        };
        let nodes: Vec<NodeId> = (0..self.len())
            .filter(|&i| i != ia.max(ib))
            .map(|i| {
                if i == slot {
                    merged.clone()
                } else {
                    self.nodes[i].clone()
                }
            })
            .collect();
        let edges: BTreeSet<(NodeId, NodeId)> = self
            .edge_indices()
            .filter(|&(p, c)| !((p == ia || p == ib) && (c == ia || c == ib)))
            .map(|(p, c)| (name_of(p), name_of(c)))
            .collect();
        let edges: Vec<_> = edges.into_iter().collect();
        Dag::from_parts(nodes, &edges).map_err(|e| match e {
            GraphError::Cycle(cycle) => GraphError::MergeCreatesCycle {
                a: self.nodes[ia].clone(),
                b: self.nodes[ib].clone(),
                cycle,
            },
            other => other,
        })
    }

    /// Deletes `a`, connecting each of its parents to its (single) child.
    pub fn delete_node(&self, a: &str) -> Result<Dag, GraphError> {
        let ia = self.require(a)?;
        if self.children[ia].len() >= 2 {
            return Err(GraphError::IsConfounder {
                node: self.nodes[ia].clone(),
                children: self.names(&self.children[ia]),
            });
        }
        let mut edges: BTreeSet<(usize, usize)> = self.edge_indices().filter(|&(p, c)| p != ia && c != ia).collect();
        for &p in &self.parents[ia] {
            for &c in &self.children[ia] {
                edges.insert((p, c));
            }
        }
        let nodes: Vec<NodeId> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != ia)
            .map(|(_, n)| n.clone())
            .collect();
        let edges: Vec<_> = edges
            .into_iter()
            .map(|(p, c)| (self.nodes[p].clone(), self.nodes[c].clone()))
            .collect();
        Dag::from_parts(nodes, &edges)
    }

    /// Relabels nodes; labels absent from `mapping` are kept.
    pub fn rename(&self, mapping: &BTreeMap<NodeId, NodeId>) -> Result<Dag, GraphError> {
        let label = |n: &NodeId| mapping.get(n).cloned().unwrap_or_else(|| n.clone());
        let nodes: Vec<NodeId> = self.nodes.iter().map(label).collect();
        let edges: Vec<_> = self
            .edge_indices()
            .map(|(p, c)| (nodes[p].clone(), nodes[c].clone()))
            .collect();
        Dag::from_parts(nodes, &edges)
    }

    /// Equal node sets and equal edge sets, ignoring declaration order.
    pub fn same_structure(&self, other: &Dag) -> bool {
        let mine: NodeSet = self.nodes.iter().cloned().collect();
        let theirs: NodeSet = other.nodes.iter().cloned().collect();
        mine == theirs && self.edge_set() == other.edge_set()
    }

    pub fn edge_set(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.edges().map(|(a, b)| (a.clone(), b.clone())).collect()
    }

    /// Whether every path between `x` and `y` is blocked by `z`.
    pub fn d_separated(&self, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> Result<bool, GraphError> {
        super::check_disjoint(&[x, y, z])?;
        let xs = self.require_set(x)?;
        let ys = self.require_set(y)?;
        let zs = self.require_set(z)?;
        Ok(dsep::separated(self, &xs, &ys, &zs))
    }

    pub(crate) fn names(&self, idx: &[usize]) -> Vec<NodeId> {
        idx.iter().map(|&i| self.nodes[i].clone()).collect()
    }

    pub(crate) fn name_set(&self, idx: impl Iterator<Item = usize>) -> NodeSet {
        idx.map(|i| self.nodes[i].clone()).collect()
    }
}

fn kahn(parents: &[Vec<usize>], children: &[Vec<usize>]) -> Option<Vec<usize>> {
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<usize>> = indegree
        .iter()
        .enumerate()
        .filter(|&(_, &d)| d == 0)
        .map(|(i, _)| Reverse(i))
        .collect();
    let mut order = Vec::with_capacity(parents.len());
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    (order.len() == parents.len()).then_some(order)
}

/// Some directed cycle, as a node sequence. Only called on cyclic input.
fn find_cycle(children: &[Vec<usize>]) -> Vec<usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let n = children.len();
    let mut mark = vec![Mark::New; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Open;
        while let Some(&(v, next)) = stack.last() {
            if next == children[v].len() {
                mark[v] = Mark::Done;
                stack.pop();
                continue;
            }
            stack.last_mut().expect("nonempty").1 += 1;
            let c = children[v][next];
            match mark[c] {
                Mark::New => {
                    mark[c] = Mark::Open;
                    parent[c] = v;
                    stack.push((c, 0));
                }
                Mark::Open => {
                    // Back edge v -> c closes c -> ... -> v.
                    let mut cycle = vec![v];
                    let mut u = v;
                    while u != c {
                        u = parent[u];
                        cycle.push(u);
                    }
                    cycle.reverse();
                    return cycle;
                }
                Mark::Done => {}
            }
        }
    }
    Vec::new()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::node_set;

    fn chain() -> Dag {
        Dag::new(["A", "B", "C"], [("A", "B"), ("B", "C")]).unwrap()
    }

    #[test]
    fn topological_orders() {
        assert_eq!(chain().topological_order(), node_set_vec(&["A", "B", "C"]));
        let single = Dag::new(["X"], Vec::<(&str, &str)>::new()).unwrap();
        assert_eq!(single.topological_order(), node_set_vec(&["X"]));
        let diamond = Dag::new(["A", "B", "C", "D"], [("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")]).unwrap();
        assert_eq!(diamond.topological_order(), node_set_vec(&["A", "B", "C", "D"]));
        // Declaration order wins over label order.
        let g = Dag::new(["Z", "Y", "X"], [("Y", "X")]).unwrap();
        assert_eq!(g.topological_order(), node_set_vec(&["Z", "Y", "X"]));
    }

    fn node_set_vec(v: &[&str]) -> Vec<NodeId> {
        v.iter().map(|s| NodeId::new(*s)).collect()
    }

    #[test]
    fn neighbourhoods() {
        let g = chain();
        assert_eq!(g.parents("B").unwrap(), node_set(["A"]));
        assert!(g.parents("A").unwrap().is_empty());
        assert_eq!(g.ancestors("C").unwrap(), node_set(["A", "B"]));
        assert_eq!(g.descendants("A").unwrap(), node_set(["B", "C"]));
        assert_eq!(g.children("C").unwrap(), NodeSet::new());
        assert_eq!(g.parents("Q").unwrap_err(), GraphError::UnknownNode(NodeId::new("Q")));
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            Dag::new(["A", "B"], [("A", "B"), ("B", "A")]),
            Err(GraphError::Cycle(_))
        ));
        assert_eq!(
            Dag::new(["A"], [("A", "A")]).unwrap_err(),
            GraphError::SelfLoop(NodeId::new("A"))
        );
        assert_eq!(
            Dag::new(["A", "B"], [("A", "B"), ("A", "B")]).unwrap_err(),
            GraphError::DuplicateEdge(NodeId::new("A"), NodeId::new("B"))
        );
        assert_eq!(
            Dag::new(["A", "A"], Vec::<(&str, &str)>::new()).unwrap_err(),
            GraphError::DuplicateNode(NodeId::new("A"))
        );
        assert_eq!(
            Dag::new(["A"], [("A", "B")]).unwrap_err(),
            GraphError::UnknownNode(NodeId::new("B"))
        );
    }

    #[test]
    fn cycle_report_is_a_cycle() {
        let err = Dag::new(["A", "B", "C", "D"], [("A", "B"), ("B", "C"), ("C", "B"), ("C", "D")]).unwrap_err();
        let GraphError::Cycle(cycle) = err else { panic!() };
        assert_eq!(cycle.len(), 2);
        assert!(cycle.contains(&NodeId::new("B")) && cycle.contains(&NodeId::new("C")));
    }

    #[test]
    fn merges() {
        let g = chain();
        let m = g.merge_nodes("B", "C", "BC").unwrap();
        assert_eq!(m, Dag::new(["A", "BC"], [("A", "BC")]).unwrap());

        let err = g.merge_nodes("A", "C", "AC").unwrap_err();
        assert!(matches!(err, GraphError::MergeCreatesCycle { .. }));

        let ab = Dag::new(["A", "B"], [("A", "B")]).unwrap();
        let m = ab.merge_nodes("A", "B", "AB").unwrap();
        assert_eq!(m.nodes(), &[NodeId::new("AB")]);
        assert_eq!(m.edge_count(), 0);

        assert_eq!(
            g.merge_nodes("A", "B", "C").unwrap_err(),
            GraphError::NameCollision(NodeId::new("C"))
        );
        assert!(g.merge_nodes("A", "B", "A").is_ok());
    }

    #[test]
    fn deletions() {
        let g = chain();
        assert_eq!(g.delete_node("B").unwrap(), Dag::new(["A", "C"], [("A", "C")]).unwrap());
        assert_eq!(g.delete_node("C").unwrap(), Dag::new(["A", "B"], [("A", "B")]).unwrap());
        let confounded = Dag::new(["U", "A", "B"], [("U", "A"), ("U", "B"), ("A", "B")]).unwrap();
        assert!(matches!(
            confounded.delete_node("U"),
            Err(GraphError::IsConfounder { .. })
        ));
        // Parent->child edge already present is not duplicated.
        let tri = Dag::new(["A", "B", "C"], [("A", "B"), ("B", "C"), ("A", "C")]).unwrap();
        assert_eq!(tri.delete_node("B").unwrap().edge_count(), 1);
    }

    #[test]
    fn rename_and_structure() {
        let g = chain();
        let mapping = [(NodeId::new("A"), NodeId::new("X"))].into_iter().collect();
        let r = g.rename(&mapping).unwrap();
        assert!(r.has_edge("X", "B"));
        let shuffled = Dag::new(["C", "B", "X"], [("B", "C"), ("X", "B")]).unwrap();
        assert!(r.same_structure(&shuffled));
        assert_ne!(r, shuffled);
    }
}
