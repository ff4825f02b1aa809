//! Influence maximization on networks whose topology is hidden behind a
//! budgeted neighbor-query interface, using node metadata to infer the
//! unexplored part of the graph.
//!
//! The crate is `no_std` (with `alloc`). Everything here is pure computation
//! driven by explicit seeds; file formats, the experiment harness and the
//! command-line front end live in the `im-meta-cli` crate.
//!
//! The moving parts, in pipeline order:
//!
//! - [`oracle`]: the hidden ground-truth graph and the observed state it grows.
//! - [`inference`]: Siamese edge-probability model (plus a logistic-regression
//!   variant) trained on the explored subgraph.
//! - [`graphgen`]: reinforced weighted graph built from observed and confident
//!   inferred edges, with joint diffusion probabilities.
//! - [`select`]: query-node ranking and the baseline exploration strategies.
//! - [`diffusion`]: cascade simulation, spread estimation, degree discount and
//!   lazy-greedy seed selection.
//! - [`pipeline`]: the end-to-end explore-then-seed loop and its baselines.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod data;
pub mod diffusion;
mod error;
pub mod graph;
pub mod graphgen;
pub mod inference;
pub mod oracle;
pub mod pipeline;
pub mod rng;
pub mod select;

pub use error::{Error, Result};
pub use graph::{FeatureMatrix, NodeId, UndirectedGraph, WeightedDigraph};
