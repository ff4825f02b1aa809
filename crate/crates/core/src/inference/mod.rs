//! Edge-probability inference from node metadata.
//!
//! The explored subgraph supplies labels (observed edges are positives,
//! disclosed non-edges are negatives); a pair model trained on them scores
//! every uncertain pair, i.e. every pair outside `E_t` with no queried
//! endpoint.

mod linalg;
pub mod logistic;
pub mod siamese;
pub mod train;

use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::Rng;

pub use logistic::LogisticModel;
pub use siamese::{SiameseConfig, SiameseModel};
pub use train::{
    auc, fit, mean_loss, predict_theta, theta_of, Input, PairModel, TrainConfig, TrainReport,
    ValidationMetrics,
};

use crate::graph::{FeatureMatrix, NodeId};
use crate::oracle::ObservedState;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabeledPair {
    pub u: NodeId,
    pub v: NodeId,
    pub label: bool,
}

/// How the labeled pairs are divided into training and validation (90/10).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitMode {
    /// Shuffle pairs, hold out a tenth of them.
    #[default]
    Pairs,
    /// Hold out a tenth of the nodes; any pair touching one is validation.
    Nodes,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabeledPairSet {
    pub train: Vec<LabeledPair>,
    pub validation: Vec<LabeledPair>,
    /// Set when no disclosed non-edge was available to sample negatives from.
    pub positives_only: bool,
}

impl LabeledPairSet {
    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn all(&self) -> impl Iterator<Item = &LabeledPair> {
        self.train.iter().chain(&self.validation)
    }

    /// Splits `pairs` 90/10 after an `rng` shuffle.
    pub fn split<R: Rng + ?Sized>(
        mut pairs: Vec<LabeledPair>,
        mode: SplitMode,
        rng: &mut R,
    ) -> Self {
        pairs.shuffle(rng);
        match mode {
            SplitMode::Pairs => {
                let held = pairs.len() / 10;
                let validation = pairs.split_off(pairs.len() - held);
                Self {
                    train: pairs,
                    validation,
                    positives_only: false,
                }
            }
            SplitMode::Nodes => {
                let mut nodes: Vec<NodeId> = pairs.iter().flat_map(|p| [p.u, p.v]).collect();
                nodes.sort_unstable();
                nodes.dedup();
                nodes.shuffle(rng);
                let mut held = nodes[..nodes.len() / 10].to_vec();
                held.sort_unstable();
                let (validation, train) = pairs.into_iter().partition(|p| {
                    held.binary_search(&p.u).is_ok() || held.binary_search(&p.v).is_ok()
                });
                Self {
                    train,
                    validation,
                    positives_only: false,
                }
            }
        }
    }
}

/// All pairs `(u, v)`, `u < v`, outside `E_t` with neither endpoint queried.
///
/// This covers pairs inside `V_t`, pairs straddling the explored boundary and
/// pairs among unexplored nodes.
pub fn enumerate_uncertain_edges(state: &ObservedState) -> Vec<(NodeId, NodeId)> {
    let n = state.node_count();
    let open: Vec<NodeId> = (0..n).filter(|&u| !state.is_queried(u)).collect();
    let mut out = Vec::with_capacity(open.len() * open.len().saturating_sub(1) / 2);
    for (i, &u) in open.iter().enumerate() {
        for &v in &open[i + 1..] {
            if !state.edges().has_edge(u, v) {
                out.push((u, v));
            }
        }
    }
    out
}

/// Labels from the explored subgraph: every observed edge is a positive, and
/// negatives are drawn uniformly without replacement from the disclosed
/// non-edges, `neg_ratio` per positive (all of them if fewer exist).
pub fn build_training_pairs<R: Rng + ?Sized>(
    state: &ObservedState,
    rng: &mut R,
    neg_ratio: f64,
    split: SplitMode,
) -> Result<LabeledPairSet> {
    if state.edges().edge_count() == 0 {
        return Err(Error::TrainingSkipped("no observed edges yet".into()));
    }
    let mut pairs: Vec<LabeledPair> = state
        .edges()
        .edges()
        .map(|(u, v)| LabeledPair { u, v, label: true })
        .collect();
    let pool = state.known_non_edges();
    let wanted = libm::round(neg_ratio.max(0.0) * pairs.len() as f64) as usize;
    let take = wanted.min(pool.len());
    let mut picked: Vec<usize> = index::sample(rng, pool.len(), take).into_vec();
    picked.sort_unstable();
    pairs.extend(picked.into_iter().map(|i| LabeledPair {
        u: pool[i].0,
        v: pool[i].1,
        label: false,
    }));
    let mut set = LabeledPairSet::split(pairs, split, rng);
    set.positives_only = pool.is_empty();
    Ok(set)
}

/// `Θ^(t)`: inferred existence probabilities over uncertain pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EdgeProbabilityMap {
    /// Sorted by `(u, v)` with `u < v`.
    entries: Vec<(NodeId, NodeId, f64)>,
    step: usize,
}

impl EdgeProbabilityMap {
    pub fn empty(step: usize) -> Self {
        Self {
            entries: Vec::new(),
            step,
        }
    }

    /// Normalizes each pair to `(min, max)`; later duplicates overwrite earlier ones.
    pub fn from_entries<I>(step: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, f64)>,
    {
        let mut out: Vec<(NodeId, NodeId, f64)> = Vec::new();
        for (u, v, theta) in entries {
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !(0.0..=1.0).contains(&theta) {
                return Err(Error::Input(alloc::format!("θ = {theta} outside [0, 1]")));
            }
            out.push((u.min(v), u.max(v), theta));
        }
        out.sort_by_key(|a| (a.0, a.1));
        let mut dedup: Vec<(NodeId, NodeId, f64)> = Vec::with_capacity(out.len());
        for e in out {
            match dedup.last_mut() {
                Some(last) if (last.0, last.1) == (e.0, e.1) => *last = e,
                _ => dedup.push(e),
            }
        }
        Ok(Self {
            entries: dedup,
            step,
        })
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let key = (u.min(v), u.max(v));
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&key))
            .ok()
            .map(|i| self.entries[i].2)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.entries.iter().copied()
    }

    /// Keeps the `cap` highest-θ entries, ties going to the smaller pair.
    pub fn cap(&mut self, cap: usize) {
        if self.entries.len() <= cap {
            return;
        }
        let mut ranked = core::mem::take(&mut self.entries);
        ranked.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
        ranked.truncate(cap);
        ranked.sort_by_key(|a| (a.0, a.1));
        self.entries = ranked;
    }
}

/// Scores every uncertain pair of `state`, optionally keeping only the `cap`
/// most probable.
pub fn infer_all<M: PairModel + ?Sized>(
    model: &M,
    state: &ObservedState,
    features: &FeatureMatrix,
    cap: Option<usize>,
) -> EdgeProbabilityMap {
    let pairs = enumerate_uncertain_edges(state);
    let scores = model.score_pairs(features, &pairs);
    let entries = pairs
        .into_iter()
        .zip(scores)
        .map(|((u, v), t)| (u, v, t))
        .collect();
    let mut map = EdgeProbabilityMap {
        entries,
        step: state.step(),
    };
    if let Some(cap) = cap {
        map.cap(cap);
    }
    map
}

/// The two inference back ends behind one type.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeModel {
    Siamese(SiameseModel),
    Logistic(LogisticModel),
}

impl PairModel for EdgeModel {
    fn input_dim(&self) -> usize {
        match self {
            EdgeModel::Siamese(m) => m.input_dim(),
            EdgeModel::Logistic(m) => m.input_dim(),
        }
    }

    fn params(&self) -> &[f64] {
        match self {
            EdgeModel::Siamese(m) => m.params(),
            EdgeModel::Logistic(m) => m.params(),
        }
    }

    fn params_mut(&mut self) -> &mut [f64] {
        match self {
            EdgeModel::Siamese(m) => m.params_mut(),
            EdgeModel::Logistic(m) => m.params_mut(),
        }
    }

    fn logit(&self, a: Input<'_>, b: Input<'_>) -> f64 {
        match self {
            EdgeModel::Siamese(m) => m.logit(a, b),
            EdgeModel::Logistic(m) => m.logit(a, b),
        }
    }

    fn loss_grad(
        &self,
        inputs: &[Input<'_>],
        pairs: &[(usize, usize, bool)],
        grad: &mut [f64],
    ) -> f64 {
        match self {
            EdgeModel::Siamese(m) => m.loss_grad(inputs, pairs, grad),
            EdgeModel::Logistic(m) => m.loss_grad(inputs, pairs, grad),
        }
    }

    fn pair_logits(&self, features: &FeatureMatrix, pairs: &[(NodeId, NodeId)]) -> Vec<f64> {
        match self {
            EdgeModel::Siamese(m) => m.pair_logits(features, pairs),
            EdgeModel::Logistic(m) => m.pair_logits(features, pairs),
        }
    }
}
