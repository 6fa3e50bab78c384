//! Finite discrete probability semantics.
//!
//! Tables are dense. Joint assignments are indexed mixed-radix in the listed
//! variable order with the rightmost variable fastest.

mod domain;
mod infer;
mod kernel;
mod model;

use thiserror::Error;

use crate::graph::{GraphError, NodeId};

pub use domain::{assignment_count, decode_assignment, describe_assignment, encode_assignment, Domain, Variable};
pub use domain::{Projection, Radix};
pub use infer::{interventional, interventional_with, is_deterministic, joint, joint_with};
pub use kernel::{Distribution, FiniteMap, Kernel};
pub use model::{validate_model, CausalModel, ModelBuilder};

/// Tolerance for row sums and point-mass detection.
pub const VALIDITY_TOL: f64 = 1e-12;
/// Tolerance for semantic equality of probabilities.
pub const SEMANTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("domains must contain at least one value")]
    EmptyDomain,
    #[error("domain value `{0}` listed twice")]
    DuplicateValue(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("row {row} of the kernel for [{kernel}] sums to {sum}")]
    NonStochasticRow { kernel: String, row: usize, sum: f64 },
    #[error("entry ({row}, {col}) of the kernel for [{kernel}] is {value}, outside [0, 1]")]
    InvalidProbability {
        kernel: String,
        row: usize,
        col: usize,
        value: f64,
    },
    #[error("conditioning event has probability {mass}")]
    ZeroEvidence { mass: f64 },
    #[error("map is undefined on input assignment {input}")]
    PartialMap { input: usize },
    #[error("kernel for [{0}] is not deterministic")]
    NotDeterministic(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(NodeId),
    #[error("`{0}` is both intervened on and an outcome")]
    OverlappingQuery(NodeId),
    #[error("mechanism for `{node}` uses unknown parent `{parent}`")]
    UnknownParent { node: NodeId, parent: NodeId },
    #[error("no mechanism for `{0}`")]
    MissingMechanism(NodeId),
    #[error("no domain for `{0}`")]
    MissingDomain(NodeId),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
