//! Bayesian network structure learning by local search over restricted PDAGs.

pub mod data;
pub mod eval;
pub mod graph;
pub mod scoring;
pub mod search;
