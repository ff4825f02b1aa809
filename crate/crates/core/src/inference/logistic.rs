//! Logistic regression on the elementwise product `x_u ⊙ x_v`; the ablation
//! counterpart of the Siamese model, trained through the same loop.

use alloc::vec;
use alloc::vec::Vec;

use super::linalg::{bce_with_logit, sigmoid};
use super::train::{Input, PairModel};

/// Weights `w ∈ R^d` followed by the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    params: Vec<f64>,
}

impl LogisticModel {
    /// All-zero weights, so every pair starts at `θ = 0.5`.
    pub fn new(input_dim: usize) -> Self {
        Self {
            params: vec![0.0; input_dim + 1],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.params[..self.params.len() - 1]
    }

    pub fn bias(&self) -> f64 {
        self.params[self.params.len() - 1]
    }

    /// Visits `(index, x_u[i] * x_v[i])` for the nonzero products.
    fn for_each_product(a: Input<'_>, b: Input<'_>, mut f: impl FnMut(usize, f64)) {
        match (a, b) {
            (Input::Sparse(x), Input::Sparse(y)) => {
                let (mut i, mut j) = (0, 0);
                while i < x.len() && j < y.len() {
                    match x[i].cmp(&y[j]) {
                        core::cmp::Ordering::Less => i += 1,
                        core::cmp::Ordering::Greater => j += 1,
                        core::cmp::Ordering::Equal => {
                            f(x[i] as usize, 1.0);
                            i += 1;
                            j += 1;
                        }
                    }
                }
            }
            (Input::Dense(x), Input::Dense(y)) => {
                for (i, (p, q)) in x.iter().zip(y).enumerate() {
                    let v = p * q;
                    if v != 0.0 {
                        f(i, v);
                    }
                }
            }
            (Input::Sparse(s), Input::Dense(d)) | (Input::Dense(d), Input::Sparse(s)) => {
                for &i in s {
                    let v = d[i as usize];
                    if v != 0.0 {
                        f(i as usize, v);
                    }
                }
            }
        }
    }
}

impl PairModel for LogisticModel {
    fn input_dim(&self) -> usize {
        self.params.len() - 1
    }

    fn params(&self) -> &[f64] {
        &self.params
    }

    fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn logit(&self, a: Input<'_>, b: Input<'_>) -> f64 {
        let mut z = self.bias();
        Self::for_each_product(a, b, |i, v| z += self.params[i] * v);
        z
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
        let scale = 1.0 / pairs.len() as f64;
        let bias = self.params.len() - 1;
        let mut loss = 0.0;
        for &(a, b, label) in pairs {
            let z = self.logit(inputs[a], inputs[b]);
            loss += bce_with_logit(z, label);
            let g = (sigmoid(z) - if label { 1.0 } else { 0.0 }) * scale;
            grad[bias] += g;
            Self::for_each_product(inputs[a], inputs[b], |i, v| grad[i] += g * v);
        }
        loss * scale
    }
}
