//! Interventional query signatures.
//!
//! A query `(do_set, outcome_set)` stands for the unique restricted
//! morphism with that signature, so no term representation is kept.

use std::fmt;

use thiserror::Error;

use crate::engine::{interventional_with, CausalModel, EngineError, Kernel};
use crate::exec::Exec;
use crate::graph::{ClusterMapError, Dag, NodeId, NodeSet, ValidatedClusterMap};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Query {
    do_set: NodeSet,
    outcome: NodeSet,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QueryError {
    #[error("`{0}` is both intervened on and an outcome")]
    Overlap(NodeId),
    #[error("query mentions `{0}`, which is not a node of the graph")]
    UnknownNode(NodeId),
    #[error(transparent)]
    ClusterMap(#[from] ClusterMapError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl Query {
    pub fn new(do_set: NodeSet, outcome: NodeSet) -> Result<Self, QueryError> {
        if let Some(n) = do_set.intersection(&outcome).next() {
            return Err(QueryError::Overlap(n.clone()));
        }
        Ok(Query { do_set, outcome })
    }

    pub fn do_set(&self) -> &NodeSet {
        &self.do_set
    }

    pub fn outcome(&self) -> &NodeSet {
        &self.outcome
    }

    pub fn is_observational(&self) -> bool {
        self.do_set.is_empty()
    }

    /// Rejects queries mentioning nodes outside `g`.
    pub fn check(&self, g: &Dag) -> Result<(), QueryError> {
        match self
            .do_set
            .iter()
            .chain(&self.outcome)
            .find(|n| !g.contains(n.as_str()))
        {
            Some(n) => Err(QueryError::UnknownNode(n.clone())),
            None => Ok(()),
        }
    }

    /// The kernel this query denotes in `m`.
    pub fn evaluate(&self, m: &CausalModel) -> Result<Kernel, QueryError> {
        self.evaluate_with(m, Exec::default())
    }

    pub fn evaluate_with(&self, m: &CausalModel, exec: Exec) -> Result<Kernel, QueryError> {
        self.check(m.graph())?;
        Ok(interventional_with(m, &self.do_set, &self.outcome, exec)?)
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |s: &NodeSet| s.iter().map(NodeId::as_str).collect::<Vec<_>>().join(",");
        write!(f, "p({} | do({}))", show(&self.outcome), show(&self.do_set))
    }
}

/// All `3^n` signatures over the nodes of `g`.
///
/// Queries are listed by base-3 counting over the declared node order
/// (digit 0 = unused, 1 = intervened, 2 = outcome), last node fastest.
pub fn enumerate_queries(g: &Dag) -> Vec<Query> {
    let n = g.len();
    let total = 3usize.pow(n as u32);
    (0..total)
        .map(|mut code| {
            let mut digits = vec![0; n];
            for d in digits.iter_mut().rev() {
                *d = code % 3;
                code /= 3;
            }
            let pick = |k| {
                digits
                    .iter()
                    .enumerate()
                    .filter(|&(_, &d)| d == k)
                    .map(|(i, _)| g.node(i).clone())
                    .collect()
            };
            Query {
                do_set: pick(1),
                outcome: pick(2),
            }
        })
        .collect()
}

/// Image of a high-level query under the cluster map.
///
/// Each high node is replaced by its cluster; removed low nodes appear in
/// neither set.
pub fn map_query(cm: &ValidatedClusterMap, q: &Query) -> Result<Query, QueryError> {
    q.check(cm.high_graph())?;
    Ok(Query {
        do_set: cm.expand(&q.do_set)?,
        outcome: cm.expand(&q.outcome)?,
    })
}
