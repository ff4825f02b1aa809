//! Choosing the next node to query.
//!
//! The topology-aware ranker scores each queryable node by its residual degree
//! (expected undiscovered connectivity) minus `α` times its hop distance to a
//! set of anchors: influential nodes of the reinforced graph that lie outside
//! the explored part.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::diffusion::degree_discount;
use crate::graph::NodeId;
use crate::graphgen::ReinforcedGraph;
use crate::oracle::ObservedState;
use crate::{Error, Result};

/// `r_u`: total θ of the confident edges at `u`.
pub fn residual_degree(graph: &ReinforcedGraph, state: &ObservedState, u: NodeId) -> Result<f64> {
    if !state.is_observed(u) {
        return Err(Error::Input(alloc::format!("node {u} is not observed")));
    }
    Ok(graph.confident_weight(u))
}

/// Degree-discount picks on the reinforced graph with unexplored members kept.
pub fn anchor_seeds(
    graph: &ReinforcedGraph,
    state: &ObservedState,
    k: usize,
    p: f64,
) -> Result<Vec<NodeId>> {
    let k = k.min(graph.node_count());
    let picks = degree_discount(graph, k, p)?;
    Ok(picks
        .into_iter()
        .filter(|&v| !state.is_observed(v))
        .collect())
}

/// `(candidate, r_u − α·Σ_anchors GD(u, a))` for every node in `V_t \ Q_t`,
/// in ascending id order. Unreachable anchors count as distance `n`.
pub fn rank_nodes(
    graph: &ReinforcedGraph,
    state: &ObservedState,
    anchors: &[NodeId],
    alpha: f64,
) -> Result<Vec<(NodeId, f64)>> {
    let candidates = state.candidates();
    if candidates.is_empty() {
        return Err(Error::ExplorationExhausted);
    }
    let mut distance = alloc::vec![0usize; graph.node_count()];
    if alpha != 0.0 {
        for &a in anchors {
            let gd = graph.skeleton().bfs_geodesics(a)?;
            for &u in &candidates {
                distance[u] += gd[u];
            }
        }
    }
    Ok(candidates
        .into_iter()
        .map(|u| (u, graph.confident_weight(u) - alpha * distance[u] as f64))
        .collect())
}

/// `(candidate, d̂_u)`: plain estimated-degree ranking.
pub fn rank_degree_ablation(
    graph: &ReinforcedGraph,
    state: &ObservedState,
) -> Result<Vec<(NodeId, f64)>> {
    let candidates = state.candidates();
    if candidates.is_empty() {
        return Err(Error::ExplorationExhausted);
    }
    Ok(candidates
        .into_iter()
        .map(|u| (u, graph.estimated_degree(u)))
        .collect())
}

/// Highest score, ties to the smallest id. `None` for no scores.
pub fn select_query_node(scores: &[(NodeId, f64)]) -> Option<NodeId> {
    scores
        .iter()
        .copied()
        .reduce(|best, x| {
            if x.1 > best.1 || (x.1 == best.1 && x.0 < best.0) {
                x
            } else {
                best
            }
        })
        .map(|b| b.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineStrategy {
    /// Uniform over `V_t \ Q_t`.
    Rand,
    /// Uniform over unqueried neighbors of the previously queried node.
    Dfs,
    /// Uniform node of `V_t`, then a uniform unqueried neighbor of it.
    Change,
}

impl BaselineStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            BaselineStrategy::Rand => "rand",
            BaselineStrategy::Dfs => "dfs",
            BaselineStrategy::Change => "change",
        }
    }
}

/// Next node for a baseline exploration strategy. DFS falls back to Rand at
/// a dead end; CHANGE retries up to `|V_t|` times before doing the same.
pub fn baseline_select<R: Rng + ?Sized>(
    strategy: BaselineStrategy,
    state: &ObservedState,
    rng: &mut R,
) -> Result<NodeId> {
    let candidates = state.candidates();
    if candidates.is_empty() {
        return Err(Error::ExplorationExhausted);
    }
    let open_neighbors = |u: NodeId| -> Vec<NodeId> {
        state
            .edges()
            .adj(u)
            .iter()
            .copied()
            .filter(|&v| !state.is_queried(v))
            .collect()
    };
    match strategy {
        BaselineStrategy::Rand => {}
        BaselineStrategy::Dfs => {
            if let Some(prev) = state.last_queried() {
                if let Some(&v) = open_neighbors(prev).choose(rng) {
                    return Ok(v);
                }
            }
        }
        BaselineStrategy::Change => {
            let nodes = state.observed_nodes();
            for _ in 0..nodes.len() {
                let u = *nodes.choose(rng).expect("candidates imply observed nodes");
                if let Some(&v) = open_neighbors(u).choose(rng) {
                    return Ok(v);
                }
            }
        }
    }
    Ok(*candidates.choose(rng).expect("nonempty"))
}
