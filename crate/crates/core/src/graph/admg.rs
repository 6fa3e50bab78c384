use std::collections::BTreeSet;

use super::{check_disjoint, dsep, Dag, GraphError, NodeId, NodeSet};

/// Acyclic directed mixed graph: a DAG plus bidirected edges standing for
/// unobserved common causes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Admg {
    directed: Dag,
    /// Pairs `(i, j)` with `i < j` by declaration index.
    bidirected: BTreeSet<(usize, usize)>,
}

impl Admg {
    pub fn new<N, E, B, S>(nodes: N, directed: E, bidirected: B) -> Result<Self, GraphError>
    where
        N: IntoIterator<Item = S>,
        S: Into<NodeId>,
        E: IntoIterator<Item = (S, S)>,
        B: IntoIterator<Item = (S, S)>,
    {
        let dag = Dag::new(nodes, directed)?;
        let pairs: Vec<(NodeId, NodeId)> = bidirected.into_iter().map(|(a, b)| (a.into(), b.into())).collect();
        Self::from_parts(dag, &pairs)
    }

    pub(crate) fn from_parts(directed: Dag, pairs: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        let mut bidirected = BTreeSet::new();
        for (a, b) in pairs {
            let ia = directed.require(a.as_str())?;
            let ib = directed.require(b.as_str())?;
            if ia == ib {
                return Err(GraphError::SelfLoop(a.clone()));
            }
            if !bidirected.insert((ia.min(ib), ia.max(ib))) {
                return Err(GraphError::DuplicateBidirected(a.clone(), b.clone()));
            }
        }
        Ok(Admg { directed, bidirected })
    }

    pub fn from_dag(dag: Dag) -> Self {
        Admg {
            directed: dag,
            bidirected: BTreeSet::new(),
        }
    }

    pub fn nodes(&self) -> &[NodeId] {
        self.directed.nodes()
    }

    /// The directed part.
    pub fn directed(&self) -> &Dag {
        &self.directed
    }

    pub fn bidirected(&self) -> impl Iterator<Item = (&NodeId, &NodeId)> + '_ {
        self.bidirected
            .iter()
            .map(move |&(a, b)| (self.directed.node(a), self.directed.node(b)))
    }

    pub fn bidirected_count(&self) -> usize {
        self.bidirected.len()
    }

    pub fn has_bidirected(&self, a: &str, b: &str) -> bool {
        match (self.directed.index_of(a), self.directed.index_of(b)) {
            (Some(ia), Some(ib)) => self.bidirected.contains(&(ia.min(ib), ia.max(ib))),
            _ => false,
        }
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        self.directed.has_edge(a, b)
    }

    pub fn edge_set(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.directed.edge_set()
    }

    pub fn bidirected_set(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.bidirected()
            .map(|(a, b)| {
                if a <= b {
                    (a.clone(), b.clone())
                } else {
                    (b.clone(), a.clone())
                }
            })
            .collect()
    }

    /// Equal node sets and equal directed/bidirected edge sets.
    pub fn same_structure(&self, other: &Admg) -> bool {
        self.directed.same_structure(&other.directed) && self.bidirected_set() == other.bidirected_set()
    }

    /// Replaces each bidirected edge `A <-> B` by a fresh latent root with
    /// edges into `A` and `B`. Returns the DAG and the set of latent labels.
    pub fn canonical_dag(&self) -> (Dag, NodeSet) {
        let mut nodes: Vec<NodeId> = self.nodes().to_vec();
        let mut taken: BTreeSet<NodeId> = nodes.iter().cloned().collect();
        let mut edges: Vec<(NodeId, NodeId)> = self.directed.edges().map(|(a, b)| (a.clone(), b.clone())).collect();
        let mut latents = NodeSet::new();
        for (a, b) in self.bidirected() {
            let mut label = format!("U[{a},{b}]");
            while taken.contains(label.as_str()) {
                label.push('\'');
            }
            let u = NodeId::new(label);
            taken.insert(u.clone());
            latents.insert(u.clone());
            nodes.push(u.clone());
            edges.push((u.clone(), a.clone()));
            edges.push((u, b.clone()));
        }
        let dag = Dag::from_parts(nodes, &edges).expect("adding latent roots keeps the graph acyclic");
        (dag, latents)
    }

    /// d-separation, reading each bidirected edge as a latent common cause
    /// that is never conditioned on.
    pub fn d_separated(&self, x: &NodeSet, y: &NodeSet, z: &NodeSet) -> Result<bool, GraphError> {
        check_disjoint(&[x, y, z])?;
        for set in [x, y, z] {
            self.directed.require_set(set)?;
        }
        if self.bidirected.is_empty() {
            return self.directed.d_separated(x, y, z);
        }
        let (canonical, _) = self.canonical_dag();
        let xs = canonical.require_set(x)?;
        let ys = canonical.require_set(y)?;
        let zs = canonical.require_set(z)?;
        Ok(dsep::separated(&canonical, &xs, &ys, &zs))
    }

    /// Removes every edge with an arrowhead at a node of `x`: directed edges
    /// into `x` and bidirected edges touching `x`.
    pub fn surgery_remove_incoming(&self, x: &NodeSet) -> Result<Admg, GraphError> {
        let xs = self.mask(x)?;
        let edges: Vec<(NodeId, NodeId)> = self
            .directed
            .edge_indices()
            .filter(|&(_, c)| !xs[c])
            .map(|(p, c)| (self.directed.node(p).clone(), self.directed.node(c).clone()))
            .collect();
        let bidirected = self
            .bidirected
            .iter()
            .copied()
            .filter(|&(a, b)| !xs[a] && !xs[b])
            .collect();
        Ok(Admg {
            directed: Dag::from_parts(self.nodes().to_vec(), &edges)?,
            bidirected,
        })
    }

    /// Removes directed edges leaving `z`; bidirected edges stay.
    pub fn surgery_remove_outgoing(&self, z: &NodeSet) -> Result<Admg, GraphError> {
        let zs = self.mask(z)?;
        let edges: Vec<(NodeId, NodeId)> = self
            .directed
            .edge_indices()
            .filter(|&(p, _)| !zs[p])
            .map(|(p, c)| (self.directed.node(p).clone(), self.directed.node(c).clone()))
            .collect();
        Ok(Admg {
            directed: Dag::from_parts(self.nodes().to_vec(), &edges)?,
            bidirected: self.bidirected.clone(),
        })
    }

    /// Members of `z` that are not directed ancestors of any node of `w`.
    /// A node counts as its own ancestor.
    pub fn non_ancestors_in(&self, z: &NodeSet, w: &NodeSet) -> Result<NodeSet, GraphError> {
        let ws = self.directed.require_set(w)?;
        self.directed.require_set(z)?;
        let anc = self.directed.ancestor_mask(&ws);
        Ok(z.iter()
            .filter(|n| !anc[self.directed.index_of(n.as_str()).expect("checked")])
            .cloned()
            .collect())
    }

    fn mask(&self, set: &NodeSet) -> Result<Vec<bool>, GraphError> {
        let mut mask = vec![false; self.directed.len()];
        for i in self.directed.require_set(set)? {
            mask[i] = true;
        }
        Ok(mask)
    }
}
