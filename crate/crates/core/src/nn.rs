//! Dense layers, softmax cross-entropy, and SGD/Adam for the classical
//! halves of the hybrid model.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;
pub const LOG_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    /// Backward treats softmax as identity; the cross-entropy gradient is
    /// taken with respect to the logits.
    Softmax,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LayerRepr", into = "LayerRepr")]
pub struct DenseLayer {
    in_dim: usize,
    out_dim: usize,
    /// Row-major `[out_dim][in_dim]`.
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
    activation: Activation,
}

/// On-disk form of a layer; dimensions are implied by the arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct LayerRepr {
    activation: Activation,
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

impl TryFrom<LayerRepr> for DenseLayer {
    type Error = Error;

    fn try_from(r: LayerRepr) -> Result<Self> {
        DenseLayer::new(r.weights, r.bias, r.activation)
    }
}

impl From<DenseLayer> for LayerRepr {
    fn from(l: DenseLayer) -> Self {
        LayerRepr {
            activation: l.activation,
            weights: l.weights,
            bias: l.bias,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl LayerGrads {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.weights.iter().flatten().copied().collect();
        out.extend_from_slice(&self.bias);
        out
    }
}

impl DenseLayer {
    pub fn new(weights: Vec<Vec<f64>>, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        let out_dim = weights.len();
        if out_dim == 0 {
            return Err(Error::InvalidArgument("layer has no output units".into()));
        }
        let in_dim = weights[0].len();
        if in_dim == 0 {
            return Err(Error::InvalidArgument("layer has no inputs".into()));
        }
        if let Some(row) = weights.iter().position(|r| r.len() != in_dim) {
            return Err(Error::InvalidArgument(format!(
                "weight row {row} has length {}, expected {in_dim}",
                weights[row].len()
            )));
        }
        if bias.len() != out_dim {
            return Err(Error::DimensionMismatch {
                expected: out_dim,
                actual: bias.len(),
            });
        }
        if weights
            .iter()
            .flatten()
            .chain(&bias)
            .any(|w| !w.is_finite())
        {
            return Err(Error::NonFinite("layer weights".into()));
        }
        Ok(DenseLayer {
            in_dim,
            out_dim,
            weights,
            bias,
            activation,
        })
    }

    pub fn zeros(in_dim: usize, out_dim: usize, activation: Activation) -> Result<Self> {
        Self::new(
            vec![vec![0.0; in_dim]; out_dim],
            vec![0.0; out_dim],
            activation,
        )
    }

    /// Weights and biases uniform in `[-1/√in_dim, 1/√in_dim]`.
    pub fn init_uniform<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        let bound = 1.0 / (in_dim as f64).sqrt();
        let mut draw = || rng.random_range(-bound..=bound);
        let weights = (0..out_dim)
            .map(|_| (0..in_dim).map(|_| draw()).collect())
            .collect();
        let bias = (0..out_dim).map(|_| draw()).collect();
        Self::new(weights, bias, activation)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn num_params(&self) -> usize {
        self.out_dim * (self.in_dim + 1)
    }

    /// Weights row by row, then biases.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.weights.iter().flatten().copied().collect();
        out.extend_from_slice(&self.bias);
        out
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                actual: flat.len(),
            });
        }
        let (w, b) = flat.split_at(self.out_dim * self.in_dim);
        for (row, chunk) in self.weights.iter_mut().zip(w.chunks(self.in_dim)) {
            row.copy_from_slice(chunk);
        }
        self.bias.copy_from_slice(b);
        Ok(())
    }

    /// `W·x + b`.
    pub fn pre_activation(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.in_dim {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim,
                actual: input.len(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b)
            .collect())
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        let z = self.pre_activation(input)?;
        Ok(match self.activation {
            Activation::Tanh => z.into_iter().map(f64::tanh).collect(),
            Activation::Softmax => softmax(&z),
            Activation::Identity => z,
        })
    }

    /// Chain rule through the layer. `upstream` is the loss gradient with
    /// respect to this layer's output (the logits, for softmax layers).
    pub fn backward(&self, input: &[f64], upstream: &[f64]) -> Result<(LayerGrads, Vec<f64>)> {
        if upstream.len() != self.out_dim {
            return Err(Error::DimensionMismatch {
                expected: self.out_dim,
                actual: upstream.len(),
            });
        }
        let delta: Vec<f64> = match self.activation {
            Activation::Tanh => self
                .forward(input)?
                .iter()
                .zip(upstream)
                .map(|(y, g)| g * (1.0 - y * y))
                .collect(),
            Activation::Softmax | Activation::Identity => {
                if input.len() != self.in_dim {
                    return Err(Error::DimensionMismatch {
                        expected: self.in_dim,
                        actual: input.len(),
                    });
                }
                upstream.to_vec()
            }
        };
        let weights = delta
            .iter()
            .map(|d| input.iter().map(|x| d * x).collect())
            .collect();
        let mut input_grad = vec![0.0; self.in_dim];
        for (row, d) in self.weights.iter().zip(&delta) {
            for (g, w) in input_grad.iter_mut().zip(row) {
                *g += w * d;
            }
        }
        Ok((
            LayerGrads {
                weights,
                bias: delta,
            },
            input_grad,
        ))
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `−ln(p[label] + ε)`.
pub fn cross_entropy_loss(probabilities: &[f64], label: usize) -> Result<f64> {
    if label >= probabilities.len() {
        return Err(Error::LabelOutOfRange {
            label,
            num_classes: probabilities.len(),
        });
    }
    let total: f64 = probabilities.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "probabilities sum to {total}, expected 1"
        )));
    }
    Ok((-(probabilities[label] + LOG_EPSILON).ln()).max(0.0))
}

/// Gradient of softmax cross-entropy with respect to the logits: `p − e_label`.
pub fn cross_entropy_logit_grad(probabilities: &[f64], label: usize) -> Result<Vec<f64>> {
    if label >= probabilities.len() {
        return Err(Error::LabelOutOfRange {
            label,
            num_classes: probabilities.len(),
        });
    }
    Ok(probabilities
        .iter()
        .enumerate()
        .map(|(k, p)| if k == label { p - 1.0 } else { *p })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamMoments {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub step: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    kind: OptimizerKind,
    learning_rate: f64,
    momentum: Option<f64>,
    velocity: Vec<f64>,
    adam: Option<AdamMoments>,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, learning_rate: f64, momentum: Option<f64>) -> Result<Self> {
        if !(learning_rate >= 0.0 && learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be finite and >= 0, got {learning_rate}"
            )));
        }
        if let Some(m) = momentum {
            if !(0.0..1.0).contains(&m) {
                return Err(Error::InvalidArgument(format!(
                    "momentum must be in [0, 1), got {m}"
                )));
            }
        }
        Ok(OptimizerState {
            kind,
            learning_rate,
            momentum,
            velocity: Vec::new(),
            adam: None,
        })
    }

    pub fn sgd(learning_rate: f64) -> Result<Self> {
        Self::new(OptimizerKind::Sgd, learning_rate, None)
    }

    pub fn adam(learning_rate: f64) -> Result<Self> {
        Self::new(OptimizerKind::Adam, learning_rate, None)
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn set_learning_rate(&mut self, lr: f64) {
        self.learning_rate = lr;
    }

    pub fn adam_moments(&self) -> Option<&AdamMoments> {
        self.adam.as_ref()
    }

    /// One update of `params` in place.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::DimensionMismatch {
                expected: params.len(),
                actual: grads.len(),
            });
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!(
                "gradient entry {i} is {}",
                grads[i]
            )));
        }
        let lr = self.learning_rate;
        match self.kind {
            OptimizerKind::Sgd => match self.momentum {
                Some(mu) => {
                    if self.velocity.len() != params.len() {
                        self.velocity = vec![0.0; params.len()];
                    }
                    for ((p, g), v) in params.iter_mut().zip(grads).zip(&mut self.velocity) {
                        *v = mu * *v + g;
                        *p -= lr * *v;
                    }
                }
                None => {
                    for (p, g) in params.iter_mut().zip(grads) {
                        *p -= lr * g;
                    }
                }
            },
            OptimizerKind::Adam => {
                let n = params.len();
                let m = self.adam.get_or_insert_with(|| AdamMoments {
                    first: vec![0.0; n],
                    second: vec![0.0; n],
                    step: 0,
                });
                if m.first.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: m.first.len(),
                        actual: n,
                    });
                }
                m.step += 1;
                let t = m.step as i32;
                let c1 = 1.0 - ADAM_BETA1.powi(t);
                let c2 = 1.0 - ADAM_BETA2.powi(t);
                for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
                    m.first[i] = ADAM_BETA1 * m.first[i] + (1.0 - ADAM_BETA1) * g;
                    m.second[i] = ADAM_BETA2 * m.second[i] + (1.0 - ADAM_BETA2) * g * g;
                    let m_hat = m.first[i] / c1;
                    let v_hat = m.second[i] / c2;
                    *p -= lr * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
                }
            }
        }
        Ok(())
    }
}

/// Step decay: the rate is multiplied by `gamma` every `step_size` epochs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    pub base_rate: f64,
    pub step_size: usize,
    pub gamma: f64,
}

impl StepSchedule {
    pub fn rate_at(&self, epoch: usize) -> f64 {
        let decays = epoch / self.step_size.max(1);
        self.base_rate * self.gamma.powi(decays as i32)
    }
}
