use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::linalg::{bce_with_logit, sigmoid};
use super::{LabeledPair, LabeledPairSet};
use crate::graph::{FeatureMatrix, NodeId};
use crate::{Error, Result};

/// One node's feature vector, either as set indices or dense values.
#[derive(Debug, Clone, Copy)]
pub enum Input<'a> {
    Sparse(&'a [u32]),
    Dense(&'a [f64]),
}

impl Input<'_> {
    pub(crate) fn check(&self, dim: usize) -> Result<()> {
        match *self {
            Input::Dense(x) if x.len() != dim => Err(Error::DimensionMismatch {
                expected: dim,
                got: x.len(),
            }),
            Input::Sparse(idx) => match idx.iter().find(|&&i| i as usize >= dim) {
                Some(&i) => Err(Error::DimensionMismatch {
                    expected: dim,
                    got: i as usize + 1,
                }),
                None => Ok(()),
            },
            _ => Ok(()),
        }
    }
}

/// A symmetric pair scorer `logit(x_u, x_v)` with a flat parameter vector.
pub trait PairModel {
    fn input_dim(&self) -> usize;

    fn params(&self) -> &[f64];

    fn params_mut(&mut self) -> &mut [f64];

    fn logit(&self, a: Input<'_>, b: Input<'_>) -> f64;

    /// Mean binary cross-entropy over `pairs` (indices into `inputs`);
    /// the gradient of that mean is added into `grad`.
    fn loss_grad(
        &self,
        inputs: &[Input<'_>],
        pairs: &[(usize, usize, bool)],
        grad: &mut [f64],
    ) -> f64;

    /// Logits for many node pairs at once.
    fn pair_logits(&self, features: &FeatureMatrix, pairs: &[(NodeId, NodeId)]) -> Vec<f64> {
        pairs
            .iter()
            .map(|&(u, v)| {
                self.logit(
                    Input::Sparse(features.row(u)),
                    Input::Sparse(features.row(v)),
                )
            })
            .collect()
    }

    /// `θ` for many node pairs at once.
    fn score_pairs(&self, features: &FeatureMatrix, pairs: &[(NodeId, NodeId)]) -> Vec<f64> {
        let mut out = self.pair_logits(features, pairs);
        out.iter_mut().for_each(|z| *z = sigmoid(*z));
        out
    }
}

/// Edge probability `θ_uv` for dense feature vectors.
pub fn predict_theta<M: PairModel + ?Sized>(model: &M, xu: &[f64], xv: &[f64]) -> Result<f64> {
    let (a, b) = (Input::Dense(xu), Input::Dense(xv));
    a.check(model.input_dim())?;
    b.check(model.input_dim())?;
    Ok(sigmoid(model.logit(a, b)))
}

/// Edge probability for two nodes of a feature matrix.
pub fn theta_of<M: PairModel + ?Sized>(
    model: &M,
    features: &FeatureMatrix,
    u: NodeId,
    v: NodeId,
) -> f64 {
    sigmoid(model.logit(
        Input::Sparse(features.row(u)),
        Input::Sparse(features.row(v)),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            batch_size: 16,
            epochs: 50,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationMetrics {
    pub loss: f64,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean loss over the training split before the first update.
    pub initial_loss: f64,
    /// Mean training loss observed during each epoch.
    pub epoch_losses: Vec<f64>,
    /// Mean loss over the training split after the last update.
    pub final_loss: f64,
    /// `None` when the validation split is empty.
    pub validation: Option<ValidationMetrics>,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    fn new(len: usize) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], cfg: &TrainConfig) {
        self.t += 1;
        let c1 = 1.0 - libm::pow(cfg.beta1, f64::from(self.t));
        let c2 = 1.0 - libm::pow(cfg.beta2, f64::from(self.t));
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grad)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            let mh = *m / c1;
            let vh = *v / c2;
            *p -= cfg.learning_rate * mh / (libm::sqrt(vh) + cfg.eps);
        }
    }
}

/// Groups the nodes of `batch` so each distinct node is encoded once.
fn gather<'f>(
    features: &'f FeatureMatrix,
    batch: &[LabeledPair],
    inputs: &mut Vec<Input<'f>>,
    nodes: &mut Vec<NodeId>,
    pairs: &mut Vec<(usize, usize, bool)>,
) {
    inputs.clear();
    nodes.clear();
    pairs.clear();
    let mut slot = |u: NodeId, inputs: &mut Vec<Input<'f>>| match nodes.iter().position(|&x| x == u)
    {
        Some(i) => i,
        None => {
            nodes.push(u);
            inputs.push(Input::Sparse(features.row(u)));
            nodes.len() - 1
        }
    };
    for p in batch {
        let a = slot(p.u, inputs);
        let b = slot(p.v, inputs);
        pairs.push((a, b, p.label));
    }
}

/// Mean loss of `model` on `pairs`.
pub fn mean_loss<M: PairModel + ?Sized>(
    model: &M,
    features: &FeatureMatrix,
    pairs: &[LabeledPair],
) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let logits = model.pair_logits(
        features,
        &pairs.iter().map(|p| (p.u, p.v)).collect::<Vec<_>>(),
    );
    let total: f64 = logits
        .iter()
        .zip(pairs)
        .map(|(&z, p)| bce_with_logit(z, p.label))
        .sum();
    total / pairs.len() as f64
}

/// Minimizes mean binary cross-entropy on the training split with Adam,
/// visiting the split in an `rng`-shuffled order each epoch.
pub fn fit<M: PairModel + ?Sized, R: Rng + ?Sized>(
    model: &mut M,
    features: &FeatureMatrix,
    set: &LabeledPairSet,
    config: &TrainConfig,
    rng: &mut R,
) -> Result<TrainReport> {
    if features.dim() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            got: features.dim(),
        });
    }
    if set.train.is_empty() {
        return Err(Error::Input("no training pairs".into()));
    }
    if config.batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    let initial_loss = mean_loss(model, features, &set.train);
    let mut adam = Adam::new(model.params().len());
    let mut grad = vec![0.0; model.params().len()];
    let mut order: Vec<usize> = (0..set.train.len()).collect();
    let mut batch = Vec::with_capacity(config.batch_size);
    let (mut inputs, mut nodes, mut pairs) = (Vec::new(), Vec::new(), Vec::new());
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(rng);
        let mut total = 0.0;
        for (b, chunk) in order.chunks(config.batch_size).enumerate() {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| set.train[i]));
            gather(features, &batch, &mut inputs, &mut nodes, &mut pairs);
            grad.iter_mut().for_each(|g| *g = 0.0);
            let loss = model.loss_grad(&inputs, &pairs, &mut grad);
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: b,
                    loss,
                });
            }
            total += loss * chunk.len() as f64;
            adam.step(model.params_mut(), &grad, config);
        }
        epoch_losses.push(total / set.train.len() as f64);
    }

    let final_loss = mean_loss(model, features, &set.train);
    let validation = if set.validation.is_empty() {
        None
    } else {
        let scores = model.score_pairs(
            features,
            &set.validation
                .iter()
                .map(|p| (p.u, p.v))
                .collect::<Vec<_>>(),
        );
        let labels: Vec<bool> = set.validation.iter().map(|p| p.label).collect();
        Some(ValidationMetrics {
            loss: mean_loss(model, features, &set.validation),
            auc: auc(&scores, &labels),
        })
    };
    Ok(TrainReport {
        initial_loss,
        epoch_losses,
        final_loss,
        validation,
    })
}

/// Area under the ROC curve via the rank-sum statistic, ties counted as one
/// half. Returns 0.5 when either class is absent.
pub fn auc(scores: &[f64], labels: &[bool]) -> f64 {
    debug_assert_eq!(scores.len(), labels.len());
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return 0.5;
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their average
        let avg = (i + j + 2) as f64 / 2.0;
        for &k in &idx[i..=j] {
            if labels[k] {
                rank_sum += avg;
            }
        }
        i = j + 1;
    }
    let (p, q) = (pos as f64, neg as f64);
    (rank_sum - p * (p + 1.0) / 2.0) / (p * q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &li) in labels.iter().enumerate() {
            for (j, &lj) in labels.iter().enumerate() {
                if li && !lj {
                    den += 1.0;
                    if scores[i] > scores[j] {
                        num += 1.0;
                    } else if scores[i] == scores[j] {
                        num += 0.5;
                    }
                }
            }
        }
        num / den
    }

    #[test]
    fn auc_matches_pairwise_count() {
        let scores = [0.1, 0.4, 0.35, 0.8, 0.4, 0.4, 0.9, 0.05];
        let labels = [false, true, false, true, false, true, true, false];
        assert!((auc(&scores, &labels) - pairwise_auc(&scores, &labels)).abs() < 1e-12);
        assert_eq!(auc(&[0.2, 0.9], &[false, true]), 1.0);
        assert_eq!(auc(&[0.9, 0.2], &[false, true]), 0.0);
        assert_eq!(auc(&[0.3, 0.3], &[false, true]), 0.5);
        assert_eq!(auc(&[0.3], &[true]), 0.5);
    }
}
