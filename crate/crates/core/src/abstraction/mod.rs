//! Checks that a high-level model abstracts a low-level one.
//!
//! A cluster map groups low nodes into high nodes, a τ family maps cluster
//! values to high values, and an ε family maps high values back to
//! distributions over cluster values. Every check is a verifier: both
//! models are inputs and nothing is synthesised, except by the explicit
//! `derive_*` helpers used to build fixtures.

mod cause;
mod compose;
mod effect;
mod report;
mod tau;

use thiserror::Error;

use crate::engine::{CausalModel, EngineError};
use crate::graph::{validate_cluster_map, ClusterMap, ClusterMapError, GraphError, NodeId, ValidatedClusterMap};

pub use cause::{
    check_interventional_consistency, check_interventional_consistency_with, check_naturality, check_naturality_with,
    derive_high_by_effect, derive_high_by_pushforward, Scope,
};
pub use compose::compose_abstractions;
pub use effect::{check_effect_focused, check_effect_focused_with, check_sufficient_statistic};
pub use report::{AbstractionReport, SquareResidual, Witness};
pub use tau::{
    check_factorization_of_tau, check_right_inverse, epsilon_from_tau, left_inverse, EpsilonFamily, TauFamily,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AbstractionError {
    #[error("no component for high-level node `{0}`")]
    MissingComponent(NodeId),
    #[error("two components for high-level node `{0}`")]
    DuplicateComponent(NodeId),
    #[error("tau component for `{0}` is not deterministic")]
    NotDeterministic(NodeId),
    #[error("tau component for `{0}` is not surjective")]
    NotSurjective(NodeId),
    #[error("epsilon component for `{0}` has no deterministic left inverse")]
    NoLeftInverse(NodeId),
    #[error("cluster of `{node}` has zero probability for value `{value}`")]
    ZeroClusterMass { node: NodeId, value: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("abstractions do not compose: {0}")]
    Incompatible(String),
    #[error(transparent)]
    ClusterMap(#[from] ClusterMapError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Inputs shared by the checks, validated once.
pub(crate) struct Setting<'a> {
    pub(crate) low: &'a CausalModel,
    pub(crate) high: &'a CausalModel,
    pub(crate) cm: ValidatedClusterMap,
}

impl<'a> Setting<'a> {
    pub(crate) fn new(low: &'a CausalModel, high: &'a CausalModel, cm: &ClusterMap) -> Result<Self, AbstractionError> {
        let cm = validate_cluster_map(low.graph(), high.graph(), cm)?;
        Ok(Setting { low, high, cm })
    }
}
