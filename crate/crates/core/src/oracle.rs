//! The hidden network and the explored view of it.
//!
//! [`HiddenGraphOracle`] keeps the ground-truth topology private and answers
//! neighbor queries against a budget. [`ObservedState`] is what the explorer
//! knows after `t` queries: the discovered nodes `V_t`, edges `E_t` and the
//! queried set `Q_t`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{FeatureMatrix, NodeId, UndirectedGraph};
use crate::{Error, Result};

/// Size of the initial induced subgraph `G_0`.
pub const INITIAL_SUBGRAPH_SIZE: usize = 4;

#[derive(Debug, Clone)]
pub struct HiddenGraphOracle {
    truth: UndirectedGraph,
    features: FeatureMatrix,
    budget: usize,
}

impl HiddenGraphOracle {
    pub fn new(truth: UndirectedGraph, features: FeatureMatrix, budget: usize) -> Result<Self> {
        if features.node_count() != truth.node_count() {
            return Err(Error::Input(format!(
                "{} feature rows for {} nodes",
                features.node_count(),
                truth.node_count()
            )));
        }
        Ok(Self {
            truth,
            features,
            budget,
        })
    }

    pub fn node_count(&self) -> usize {
        self.truth.node_count()
    }

    /// Node metadata is collectible for every node, explored or not.
    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// Ground truth, for scoring a finished seed set and for the
    /// full-information ceiling only. Exploration never calls this.
    pub fn reveal_for_evaluation(&self) -> &UndirectedGraph {
        &self.truth
    }

    /// Draws the initial induced subgraph: a uniformly random start node
    /// grown through uniformly random frontier neighbors until `size` nodes,
    /// topped up with random nodes if the component is too small.
    pub fn init_observed<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        size: usize,
    ) -> Result<ObservedState> {
        let n = self.node_count();
        if n < size {
            return Err(Error::Config(format!(
                "initial subgraph needs {size} nodes, graph has {n}"
            )));
        }
        let mut state = ObservedState::empty(n);
        if size == 0 {
            return Ok(state);
        }
        let start = rng.gen_range(0..n);
        state.observe(start);
        let mut chosen = vec![start];
        while chosen.len() < size {
            let mut frontier: Vec<NodeId> = chosen
                .iter()
                .flat_map(|&u| self.truth.adj(u).iter().copied())
                .filter(|&v| !state.observed[v])
                .collect();
            frontier.sort_unstable();
            frontier.dedup();
            let next = match frontier.choose(rng) {
                Some(&v) => v,
                None => {
                    let rest: Vec<NodeId> = (0..n).filter(|&v| !state.observed[v]).collect();
                    *rest.choose(rng).expect("graph has at least `size` nodes")
                }
            };
            state.observe(next);
            chosen.push(next);
        }
        for (i, &u) in chosen.iter().enumerate() {
            for &v in &chosen[i + 1..] {
                if self.truth.has_edge(u, v) {
                    state.edges.add_edge(u, v)?;
                }
            }
        }
        Ok(state)
    }

    /// Reveals every neighbor of `v`, growing `state` in place.
    pub fn query(&mut self, state: &mut ObservedState, v: NodeId) -> Result<()> {
        if v >= self.node_count() {
            return Err(Error::NodeOutOfRange {
                node: v,
                n: self.node_count(),
            });
        }
        if self.budget == 0 {
            return Err(Error::BudgetExhausted);
        }
        if !state.observed[v] {
            return Err(Error::Logic(format!("node {v} has not been observed")));
        }
        if state.queried[v] {
            return Err(Error::Logic(format!("node {v} was already queried")));
        }
        for &u in self.truth.adj(v) {
            state.observe(u);
            state.edges.add_edge(v, u)?;
        }
        state.queried[v] = true;
        state.query_order.push(v);
        state.step += 1;
        self.budget -= 1;
        Ok(())
    }
}

/// Explored subgraph `G_t = (V_t, E_t)` plus the queried set `Q_t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservedState {
    observed: Vec<bool>,
    observed_count: usize,
    queried: Vec<bool>,
    query_order: Vec<NodeId>,
    edges: UndirectedGraph,
    step: usize,
}

impl ObservedState {
    fn empty(n: usize) -> Self {
        Self {
            observed: vec![false; n],
            observed_count: 0,
            queried: vec![false; n],
            query_order: Vec::new(),
            edges: UndirectedGraph::new(n),
            step: 0,
        }
    }

    /// Assembles a state directly, e.g. for a hand-built scenario.
    ///
    /// Queried nodes and edge endpoints are added to `V_t` automatically.
    pub fn from_parts(
        n: usize,
        observed: &[NodeId],
        edges: &[(NodeId, NodeId)],
        queried: &[NodeId],
    ) -> Result<Self> {
        let mut state = Self::empty(n);
        for &u in observed.iter().chain(queried) {
            if u >= n {
                return Err(Error::NodeOutOfRange { node: u, n });
            }
            state.observe(u);
        }
        for &(u, v) in edges {
            state.edges.add_edge(u, v)?;
            state.observe(u);
            state.observe(v);
        }
        for &q in queried {
            if !state.queried[q] {
                state.queried[q] = true;
                state.query_order.push(q);
            }
        }
        Ok(state)
    }

    fn observe(&mut self, u: NodeId) {
        if !self.observed[u] {
            self.observed[u] = true;
            self.observed_count += 1;
        }
    }

    pub fn node_count(&self) -> usize {
        self.observed.len()
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn is_observed(&self, u: NodeId) -> bool {
        self.observed.get(u).copied().unwrap_or(false)
    }

    pub fn is_queried(&self, u: NodeId) -> bool {
        self.queried.get(u).copied().unwrap_or(false)
    }

    pub fn observed_count(&self) -> usize {
        self.observed_count
    }

    /// `V_t` in ascending id order.
    pub fn observed_nodes(&self) -> Vec<NodeId> {
        (0..self.observed.len())
            .filter(|&u| self.observed[u])
            .collect()
    }

    /// `Q_t` in query order.
    pub fn queried_nodes(&self) -> &[NodeId] {
        &self.query_order
    }

    pub fn last_queried(&self) -> Option<NodeId> {
        self.query_order.last().copied()
    }

    /// `E_t`.
    pub fn edges(&self) -> &UndirectedGraph {
        &self.edges
    }

    /// Queryable nodes `V_t \ Q_t`, ascending.
    pub fn candidates(&self) -> Vec<NodeId> {
        (0..self.observed.len())
            .filter(|&u| self.observed[u] && !self.queried[u])
            .collect()
    }

    /// Pairs certainly absent from the hidden graph: a queried endpoint has
    /// disclosed all its neighbors, so every other pair at it is a non-edge.
    /// Returned as sorted `(min, max)` pairs.
    pub fn known_non_edges(&self) -> Vec<(NodeId, NodeId)> {
        let n = self.observed.len();
        let mut out = Vec::new();
        for u in 0..n {
            for w in (u + 1)..n {
                if (self.queried[u] || self.queried[w]) && !self.edges.has_edge(u, w) {
                    out.push((u, w));
                }
            }
        }
        out
    }
}
