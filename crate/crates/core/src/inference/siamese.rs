//! Siamese edge model: one shared MLP encoder embeds both endpoints, and a
//! sigmoid output layer scores the Hadamard product of the two embeddings.
//!
//! `θ_uv = sigmoid(w · (e_u ⊙ e_v) + b)` with `e = encoder(x)`. Both towers
//! read the same parameter slice, so weight tying is structural and the
//! score is exactly symmetric in its arguments.
//!
//! Parameters live in one flat vector. The first layer is stored
//! feature-major (`d` rows of `width`) so sparse binary inputs reduce to a sum
//! of rows; later layers are row-major `out x in`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;

use super::linalg::{axpy, bce_with_logit, dot, sigmoid};
use super::train::{Input, PairModel};
use crate::graph::{FeatureMatrix, NodeId};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiameseConfig {
    /// Widths of the ReLU hidden layers.
    pub hidden: Vec<usize>,
    /// Width of the (linear) embedding layer.
    pub embedding: usize,
}

impl Default for SiameseConfig {
    fn default() -> Self {
        Self {
            hidden: vec![256, 256],
            embedding: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiameseModel {
    /// `[d, hidden.., embedding]`
    dims: Vec<usize>,
    layers: Vec<(usize, usize)>,
    head: usize,
    params: Vec<f64>,
}

fn layout(dims: &[usize]) -> (Vec<(usize, usize)>, usize, usize) {
    let mut layers = Vec::with_capacity(dims.len() - 1);
    let mut off = 0;
    for w in dims.windows(2) {
        let (inp, out) = (w[0], w[1]);
        layers.push((off, off + inp * out));
        off += inp * out + out;
    }
    let head = off;
    let emb = *dims.last().unwrap();
    (layers, head, head + emb + 1)
}

impl SiameseModel {
    /// He-uniform initialization for the ReLU layers, Glorot-uniform for the
    /// embedding layer and output head, zero biases.
    pub fn new<R: Rng + ?Sized>(
        input_dim: usize,
        config: &SiameseConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let mut dims = Vec::with_capacity(config.hidden.len() + 2);
        dims.push(input_dim);
        dims.extend_from_slice(&config.hidden);
        dims.push(config.embedding);
        if dims.contains(&0) {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        let (layers, head, len) = layout(&dims);
        let mut params = vec![0.0; len];
        let last = layers.len() - 1;
        for (l, &(w, b)) in layers.iter().enumerate() {
            let (inp, out) = (dims[l], dims[l + 1]);
            let bound = if l < last {
                libm::sqrt(6.0 / inp as f64)
            } else {
                libm::sqrt(6.0 / (inp + out) as f64)
            };
            for p in &mut params[w..b] {
                *p = rng.gen_range(-bound..bound);
            }
        }
        let emb = config.embedding;
        let bound = libm::sqrt(6.0 / (emb + 1) as f64);
        for p in &mut params[head..head + emb] {
            *p = rng.gen_range(-bound..bound);
        }
        Ok(Self {
            dims,
            layers,
            head,
            params,
        })
    }

    /// Rebuilds a model from its layer widths and flat parameters.
    pub fn from_parts(dims: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::Input(
                "need at least input and embedding widths".into(),
            ));
        }
        let (layers, head, len) = layout(&dims);
        if params.len() != len {
            return Err(Error::Input(alloc::format!(
                "expected {len} parameters, got {}",
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Input("non-finite parameter".into()));
        }
        Ok(Self {
            dims,
            layers,
            head,
            params,
        })
    }

    /// `[d, hidden.., embedding]`
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn embedding_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    /// Parameter indices of the output head: `embedding` weights then the bias.
    pub fn head_range(&self) -> Range<usize> {
        self.head..self.params.len()
    }

    /// Parameter indices of the shared encoder.
    pub fn encoder_range(&self) -> Range<usize> {
        0..self.head
    }

    /// Outputs of every layer for one input; the last entry is the embedding.
    fn encode(&self, x: Input<'_>) -> Vec<Vec<f64>> {
        let last = self.layers.len() - 1;
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for (l, &(w, b)) in self.layers.iter().enumerate() {
            let (inp, out) = (self.dims[l], self.dims[l + 1]);
            let mut y = self.params[b..b + out].to_vec();
            if l == 0 {
                match x {
                    Input::Sparse(idx) => {
                        for &i in idx {
                            let i = i as usize;
                            axpy(1.0, &self.params[w + i * out..w + (i + 1) * out], &mut y);
                        }
                    }
                    Input::Dense(xs) => {
                        for (i, &xi) in xs.iter().enumerate() {
                            if xi != 0.0 {
                                axpy(xi, &self.params[w + i * out..w + (i + 1) * out], &mut y);
                            }
                        }
                    }
                }
            } else {
                let prev = &acts[l - 1];
                for (j, yj) in y.iter_mut().enumerate() {
                    *yj += dot(&self.params[w + j * inp..w + (j + 1) * inp], prev);
                }
            }
            if l < last {
                y.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(y);
        }
        acts
    }

    /// Embedding `e = encoder(x)`.
    pub fn embed(&self, x: Input<'_>) -> Vec<f64> {
        self.encode(x).pop().unwrap()
    }

    fn head_logit(&self, ea: &[f64], eb: &[f64]) -> f64 {
        let emb = self.embedding_dim();
        let prod: Vec<f64> = ea.iter().zip(eb).map(|(a, b)| a * b).collect();
        dot(&self.params[self.head..self.head + emb], &prod) + self.params[self.head + emb]
    }

    /// Accumulates encoder gradients for one input given `d loss / d e`.
    fn backward(&self, x: Input<'_>, acts: &[Vec<f64>], d_embedding: Vec<f64>, grad: &mut [f64]) {
        let last = self.layers.len() - 1;
        let mut g = d_embedding;
        for l in (0..self.layers.len()).rev() {
            let (w, b) = self.layers[l];
            let (inp, out) = (self.dims[l], self.dims[l + 1]);
            if l < last {
                for (gj, &aj) in g.iter_mut().zip(&acts[l]) {
                    if aj <= 0.0 {
                        *gj = 0.0;
                    }
                }
            }
            axpy(1.0, &g, &mut grad[b..b + out]);
            if l == 0 {
                match x {
                    Input::Sparse(idx) => {
                        for &i in idx {
                            let i = i as usize;
                            axpy(1.0, &g, &mut grad[w + i * out..w + (i + 1) * out]);
                        }
                    }
                    Input::Dense(xs) => {
                        for (i, &xi) in xs.iter().enumerate() {
                            if xi != 0.0 {
                                axpy(xi, &g, &mut grad[w + i * out..w + (i + 1) * out]);
                            }
                        }
                    }
                }
            } else {
                let prev = &acts[l - 1];
                let mut next = vec![0.0; inp];
                for (j, &gj) in g.iter().enumerate() {
                    if gj != 0.0 {
                        let row = w + j * inp..w + (j + 1) * inp;
                        axpy(gj, prev, &mut grad[row.clone()]);
                        axpy(gj, &self.params[row], &mut next);
                    }
                }
                g = next;
            }
        }
    }
}

impl PairModel for SiameseModel {
    fn input_dim(&self) -> usize {
        self.dims[0]
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn logit(&self, a: Input<'_>, b: Input<'_>) -> f64 {
        self.head_logit(&self.embed(a), &self.embed(b))
    }

    fn loss_grad(
        &self,
        inputs: &[Input<'_>],
        pairs: &[(usize, usize, bool)],
        grad: &mut [f64],
    ) -> f64 {
        if pairs.is_empty() {
            return 0.0;
        }
        let emb = self.embedding_dim();
        let head_w = self.head..self.head + emb;
        let acts: Vec<Vec<Vec<f64>>> = inputs.iter().map(|&x| self.encode(x)).collect();
        let mut d_emb = vec![vec![0.0; emb]; inputs.len()];
        let scale = 1.0 / pairs.len() as f64;
        let mut loss = 0.0;
        for &(a, b, label) in pairs {
            let ea = acts[a].last().unwrap();
            let eb = acts[b].last().unwrap();
            let z = self.head_logit(ea, eb);
            loss += bce_with_logit(z, label);
            let g = (sigmoid(z) - if label { 1.0 } else { 0.0 }) * scale;
            grad[self.head + emb] += g;
            for k in 0..emb {
                let hw = self.params[head_w.start + k];
                grad[head_w.start + k] += g * ea[k] * eb[k];
                d_emb[a][k] += g * hw * eb[k];
                d_emb[b][k] += g * hw * ea[k];
            }
        }
        for ((x, act), de) in inputs.iter().zip(&acts).zip(d_emb) {
            self.backward(*x, act, de, grad);
        }
        loss * scale
    }

    fn pair_logits(&self, features: &FeatureMatrix, pairs: &[(NodeId, NodeId)]) -> Vec<f64> {
        let mut cache: Vec<Option<Vec<f64>>> = vec![None; features.node_count()];
        for &(u, v) in pairs {
            for x in [u, v] {
                if cache[x].is_none() {
                    cache[x] = Some(self.embed(Input::Sparse(features.row(x))));
                }
            }
        }
        pairs
            .iter()
            .map(|&(u, v)| self.head_logit(cache[u].as_ref().unwrap(), cache[v].as_ref().unwrap()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::train::predict_theta;
    use crate::rng::seeded;

    fn small(seed: u64) -> SiameseModel {
        let cfg = SiameseConfig {
            hidden: vec![7, 6],
            embedding: 5,
        };
        SiameseModel::new(4, &cfg, &mut seeded(seed)).unwrap()
    }

    #[test]
    fn default_architecture() {
        let m = SiameseModel::new(10, &SiameseConfig::default(), &mut seeded(0)).unwrap();
        assert_eq!(m.dims(), &[10, 256, 256, 256]);
        assert_eq!(
            m.params().len(),
            10 * 256 + 256 + 2 * (256 * 256 + 256) + 257
        );
    }

    #[test]
    fn swap_symmetry_is_exact() {
        let m = small(3);
        let mut rng = seeded(11);
        for _ in 0..50 {
            let xu: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let xv: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = predict_theta(&m, &xu, &xv).unwrap();
            let b = predict_theta(&m, &xv, &xu).unwrap();
            assert_eq!(a.to_bits(), b.to_bits());
            assert!(a > 0.0 && a < 1.0);
        }
    }

    #[test]
    fn zero_head_gives_one_half() {
        let mut m = small(5);
        let head = m.head_range();
        m.params_mut()[head].iter_mut().for_each(|p| *p = 0.0);
        let t = predict_theta(&m, &[1.0, 0.0, 1.0, 1.0], &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(t, 0.5);
    }

    #[test]
    fn wrong_dimension_rejected() {
        let m = small(1);
        assert!(matches!(
            predict_theta(&m, &[1.0, 0.0], &[0.0; 4]),
            Err(Error::DimensionMismatch {
                expected: 4,
                got: 2
            })
        ));
    }

    #[test]
    fn sparse_and_dense_inputs_agree() {
        let m = small(8);
        let dense = [0.0, 1.0, 0.0, 1.0];
        let idx = [1u32, 3];
        let a = m.embed(Input::Dense(&dense));
        let b = m.embed(Input::Sparse(&idx));
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn towers_share_one_parameter_set() {
        let mut m = small(2);
        let xa = [1.0, 0.0, 1.0, 0.0];
        let xb = [0.0, 1.0, 1.0, 1.0];
        let before = m.embed(Input::Dense(&xa));
        // Nudge every encoder weight; both orders of the pair see the same change.
        let enc = m.encoder_range();
        m.params_mut()[enc].iter_mut().for_each(|p| *p += 0.01);
        let after = m.embed(Input::Dense(&xa));
        assert_ne!(before, after);
        let ab = m.logit(Input::Dense(&xa), Input::Dense(&xb));
        let ba = m.logit(Input::Dense(&xb), Input::Dense(&xa));
        assert_eq!(ab.to_bits(), ba.to_bits());
    }

    #[test]
    fn from_parts_round_trip() {
        let m = small(4);
        let again = SiameseModel::from_parts(m.dims().to_vec(), m.params().to_vec()).unwrap();
        assert_eq!(m, again);
        assert!(SiameseModel::from_parts(vec![4, 5], vec![0.0; 3]).is_err());
    }
}
