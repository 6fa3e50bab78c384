//! Verification toolkit for causal abstractions of finite discrete causal
//! Bayesian networks.

pub mod abstraction;
pub mod docalc;
pub mod engine;
pub mod exec;
pub mod fixtures;
pub mod format;
pub mod graph;
pub mod queries;
pub mod random;
