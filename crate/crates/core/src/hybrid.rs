//! The dressed quantum classifier.
//!
//! ```text
//! features ─► dense (tanh) ─► ×scale ─► RY embedding ─► VQC ─► ⟨Z_i⟩ ─► dense (softmax) ─► p
//! ```
//!
//! Gradients cross the quantum layer through the parameter-shift Jacobian:
//! the post-net's input gradient is contracted with `∂⟨Z⟩/∂θ` for the
//! circuit parameters and with `∂⟨Z⟩/∂x` (times the embedding scale) for
//! the pre-net.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{
    builtin_template, embed_inputs_scaled, BoundCircuit, CircuitTemplate, TemplateFamily,
    EMBEDDING_SCALE,
};
use crate::data::{DataSplits, Dataset};
use crate::error::{Error, Result};
use crate::gradients::parameter_shift_jacobian;
use crate::metrics::{accuracy, DEFAULT_THRESHOLD};
use crate::nn::{
    cross_entropy_logit_grad, cross_entropy_loss, Activation, DenseLayer, LayerGrads,
    OptimizerKind, OptimizerState, StepSchedule,
};
use crate::seeding::{derive_seed, stream_rng, Stream};

pub const MODEL_FORMAT_VERSION: u64 = 1;
pub const NUM_CLASSES: usize = 2;
/// Standard deviation of the initial circuit angles.
pub const CIRCUIT_INIT_STD: f64 = 0.01;

/// Largest double strictly below 1. Saturated tanh outputs are pulled back
/// to this so the open-interval embedding contract holds.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub template: TemplateFamily,
    pub num_qubits: usize,
    pub layers: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    #[serde(default)]
    pub momentum: Option<f64>,
    /// Epochs between learning-rate decays.
    #[serde(default = "default_step_size")]
    pub step_size: usize,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub freeze_pre_net: bool,
    pub seed: u64,
}

fn default_step_size() -> usize {
    1
}

fn default_gamma() -> f64 {
    1.0
}

impl TrainConfig {
    /// Every violated constraint, not just the first.
    pub fn problems(&self, num_train: usize) -> Vec<String> {
        let mut out = Vec::new();
        if self.num_qubits == 0 || self.num_qubits > crate::qstate::MAX_QUBITS {
            out.push(format!(
                "num_qubits: {} outside 1..={}",
                self.num_qubits,
                crate::qstate::MAX_QUBITS
            ));
        } else if self.template.is_entangling() && self.num_qubits < 2 {
            out.push(format!(
                "num_qubits: {} needs at least 2 qubits",
                self.template
            ));
        }
        if self.layers == 0 {
            out.push("layers: must be >= 1".into());
        }
        if self.batch_size == 0 {
            out.push("batch_size: must be >= 1".into());
        } else if num_train > 0 && self.batch_size > num_train {
            out.push(format!(
                "batch_size: {} exceeds the {num_train} training samples",
                self.batch_size
            ));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            out.push(format!(
                "learning_rate: {} must be finite and >= 0",
                self.learning_rate
            ));
        }
        if let Some(m) = self.momentum {
            if !(0.0..1.0).contains(&m) {
                out.push(format!("momentum: {m} outside [0, 1)"));
            }
            if self.optimizer != OptimizerKind::Sgd {
                out.push("momentum: only applies to sgd".into());
            }
        }
        if self.step_size == 0 {
            out.push("step_size: must be >= 1".into());
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            out.push(format!("gamma: {} must be finite and > 0", self.gamma));
        }
        out
    }

    pub fn validate(&self, num_train: usize) -> Result<()> {
        let problems = self.problems(num_train);
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ModelMetadata {
    pub seed: u64,
    /// Snapshot of the configuration that produced the model.
    #[serde(default)]
    pub config: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridModel {
    pre_net: DenseLayer,
    template: CircuitTemplate,
    circuit_params: Vec<f64>,
    post_net: DenseLayer,
    embedding_scale: f64,
    pub metadata: ModelMetadata,
}

/// Per-sample gradient of the cross-entropy loss, plus the loss itself.
#[derive(Debug, Clone, PartialEq)]
pub struct GradBundle {
    pub loss: f64,
    pub pre_net: LayerGrads,
    pub circuit: Vec<f64>,
    pub post_net: LayerGrads,
}

impl GradBundle {
    /// Same layout as [`HybridModel::params_flat`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = self.pre_net.flatten();
        out.extend_from_slice(&self.circuit);
        out.extend(self.post_net.flatten());
        out
    }
}

struct Trace {
    hidden: Vec<f64>,
    angles: Vec<f64>,
    z: Vec<f64>,
    probs: Vec<f64>,
}

impl HybridModel {
    /// Assembles a model from parts, checking every shape invariant.
    pub fn from_parts(
        pre_net: DenseLayer,
        template: CircuitTemplate,
        circuit_params: Vec<f64>,
        post_net: DenseLayer,
        embedding_scale: f64,
        metadata: ModelMetadata,
    ) -> Result<Self> {
        let n = template.num_qubits();
        let mut problems = Vec::new();
        if pre_net.activation() != Activation::Tanh {
            problems.push("pre_net activation must be tanh".to_string());
        }
        if post_net.activation() != Activation::Softmax {
            problems.push("post_net activation must be softmax".to_string());
        }
        if pre_net.out_dim() != n {
            problems.push(format!(
                "pre_net has {} outputs but the circuit has {n} qubits",
                pre_net.out_dim()
            ));
        }
        if template.num_inputs() != n {
            problems.push(format!(
                "circuit has {} input slots, expected one per qubit ({n})",
                template.num_inputs()
            ));
        }
        if post_net.in_dim() != n {
            problems.push(format!(
                "post_net has {} inputs but the circuit has {n} qubits",
                post_net.in_dim()
            ));
        }
        if post_net.out_dim() != NUM_CLASSES {
            problems.push(format!(
                "post_net has {} outputs, expected {NUM_CLASSES}",
                post_net.out_dim()
            ));
        }
        if circuit_params.len() != template.num_params() {
            problems.push(format!(
                "{} circuit parameters for a template with {} slots",
                circuit_params.len(),
                template.num_params()
            ));
        }
        if circuit_params.iter().any(|p| !p.is_finite()) {
            problems.push("circuit parameters must be finite".to_string());
        }
        if !(embedding_scale.is_finite() && embedding_scale > 0.0) {
            problems.push(format!("embedding scale {embedding_scale} must be > 0"));
        }
        if !problems.is_empty() {
            return Err(Error::ModelShape(problems.join("; ")));
        }
        Ok(HybridModel {
            pre_net,
            template,
            circuit_params,
            post_net,
            embedding_scale,
            metadata,
        })
    }

    /// Fresh model: dense layers uniform in `±1/√fan_in`, circuit angles
    /// `N(0, CIRCUIT_INIT_STD²)`, all drawn from the init stream of `seed`.
    pub fn init(
        feature_dim: usize,
        family: TemplateFamily,
        num_qubits: usize,
        layers: usize,
        seed: u64,
    ) -> Result<Self> {
        let template = builtin_template(family, num_qubits, layers)?;
        let mut rng = stream_rng(seed, Stream::Init);
        let pre_net =
            DenseLayer::init_uniform(feature_dim, num_qubits, Activation::Tanh, &mut rng)?;
        let normal = Normal::new(0.0, CIRCUIT_INIT_STD).expect("valid std");
        let circuit_params = (0..template.num_params())
            .map(|_| normal.sample(&mut rng))
            .collect();
        let post_net =
            DenseLayer::init_uniform(num_qubits, NUM_CLASSES, Activation::Softmax, &mut rng)?;
        Self::from_parts(
            pre_net,
            template,
            circuit_params,
            post_net,
            EMBEDDING_SCALE,
            ModelMetadata { seed, config: None },
        )
    }

    pub fn from_config(feature_dim: usize, config: &TrainConfig) -> Result<Self> {
        Self::init(
            feature_dim,
            config.template,
            config.num_qubits,
            config.layers,
            config.seed,
        )
    }

    pub fn feature_dim(&self) -> usize {
        self.pre_net.in_dim()
    }

    pub fn num_qubits(&self) -> usize {
        self.template.num_qubits()
    }

    pub fn template(&self) -> &CircuitTemplate {
        &self.template
    }

    pub fn pre_net(&self) -> &DenseLayer {
        &self.pre_net
    }

    pub fn post_net(&self) -> &DenseLayer {
        &self.post_net
    }

    pub fn circuit_params(&self) -> &[f64] {
        &self.circuit_params
    }

    pub fn embedding_scale(&self) -> f64 {
        self.embedding_scale
    }

    pub fn num_params(&self) -> usize {
        self.pre_net.num_params() + self.circuit_params.len() + self.post_net.num_params()
    }

    /// Pre-net weights and biases, circuit angles, post-net weights and biases.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = self.pre_net.params_flat();
        out.extend_from_slice(&self.circuit_params);
        out.extend(self.post_net.params_flat());
        out
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                expected: self.num_params(),
                actual: flat.len(),
            });
        }
        let (pre, rest) = flat.split_at(self.pre_net.num_params());
        let (circ, post) = rest.split_at(self.circuit_params.len());
        self.pre_net.set_params_flat(pre)?;
        self.circuit_params.copy_from_slice(circ);
        self.post_net.set_params_flat(post)
    }

    fn trace(&self, features: &[f64]) -> Result<Trace> {
        let hidden: Vec<f64> = self
            .pre_net
            .forward(features)?
            .into_iter()
            .map(|h| h.clamp(-BELOW_ONE, BELOW_ONE))
            .collect();
        let angles = embed_inputs_scaled(&hidden, self.embedding_scale)?;
        let z =
            BoundCircuit::new(&self.template, &self.circuit_params, &angles)?.measure_outputs()?;
        let probs = self.post_net.forward(&z)?;
        Ok(Trace {
            hidden,
            angles,
            z,
            probs,
        })
    }

    /// Class probabilities `[p(0), p(1)]`.
    pub fn forward(&self, features: &[f64]) -> Result<Vec<f64>> {
        Ok(self.trace(features)?.probs)
    }

    /// Loss gradient for one labelled sample.
    pub fn backward(&self, features: &[f64], label: u8) -> Result<GradBundle> {
        self.backward_inner(features, label, true)
    }

    fn backward_inner(
        &self,
        features: &[f64],
        label: u8,
        with_pre_net: bool,
    ) -> Result<GradBundle> {
        let label = usize::from(label);
        let tr = self.trace(features)?;
        let loss = cross_entropy_loss(&tr.probs, label)?;
        let dlogits = cross_entropy_logit_grad(&tr.probs, label)?;
        let (post_grads, dz) = self.post_net.backward(&tr.z, &dlogits)?;

        let bound = BoundCircuit::new(&self.template, &self.circuit_params, &tr.angles)?;
        let jac = parameter_shift_jacobian(&bound)?;
        let contract = |rows: &[Vec<f64>], width: usize| -> Vec<f64> {
            (0..width)
                .map(|j| dz.iter().zip(rows).map(|(g, row)| g * row[j]).sum())
                .collect()
        };
        let circuit = contract(&jac.by_param, self.circuit_params.len());

        let pre_grads = if with_pre_net {
            let dhidden: Vec<f64> = contract(&jac.by_input, tr.hidden.len())
                .into_iter()
                .map(|g| g * self.embedding_scale)
                .collect();
            self.pre_net.backward(features, &dhidden)?.0
        } else {
            LayerGrads {
                weights: vec![vec![0.0; self.pre_net.in_dim()]; self.pre_net.out_dim()],
                bias: vec![0.0; self.pre_net.out_dim()],
            }
        };
        Ok(GradBundle {
            loss,
            pre_net: pre_grads,
            circuit,
            post_net: post_grads,
        })
    }

    /// Mean cross-entropy over a dataset.
    pub fn mean_loss(&self, data: &Dataset) -> Result<f64> {
        let losses = data
            .features()
            .par_iter()
            .zip(data.labels())
            .map(|(x, &y)| cross_entropy_loss(&self.forward(x)?, usize::from(y)))
            .collect::<Result<Vec<f64>>>()?;
        Ok(losses.iter().sum::<f64>() / losses.len().max(1) as f64)
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            embedding_scale: self.embedding_scale,
            pre_net: self.pre_net.clone().into(),
            template: serde_json::to_value(&self.template).expect("template serializes"),
            circuit_params: self.circuit_params.clone(),
            post_net: self.post_net.clone().into(),
            metadata: self.metadata.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::MalformedModel(e.to_string()))?;
        let version = value
            .get("format_version")
            .ok_or_else(|| Error::MalformedModel("missing format_version".into()))?
            .as_u64()
            .ok_or_else(|| Error::MalformedModel("format_version is not an integer".into()))?;
        if version != MODEL_FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: MODEL_FORMAT_VERSION,
            });
        }
        let file: ModelFile =
            serde_json::from_value(value).map_err(|e| Error::MalformedModel(e.to_string()))?;
        let shape = |what: &str, e: Error| Error::ModelShape(format!("{what}: {e}"));
        let pre_net = DenseLayer::try_from(file.pre_net).map_err(|e| shape("pre_net", e))?;
        let post_net = DenseLayer::try_from(file.post_net).map_err(|e| shape("post_net", e))?;
        let template: CircuitTemplate = serde_json::from_value(file.template)
            .map_err(|e| Error::ModelShape(format!("template: {e}")))?;
        Self::from_parts(
            pre_net,
            template,
            file.circuit_params,
            post_net,
            file.embedding_scale,
            file.metadata,
        )
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u64,
    embedding_scale: f64,
    pre_net: crate::nn::LayerRepr,
    template: serde_json::Value,
    circuit_params: Vec<f64>,
    post_net: crate::nn::LayerRepr,
    metadata: ModelMetadata,
}

pub fn forward(model: &HybridModel, features: &[f64]) -> Result<Vec<f64>> {
    model.forward(features)
}

pub fn backward(model: &HybridModel, features: &[f64], label: u8) -> Result<GradBundle> {
    model.backward(features, label)
}

pub fn save_model(model: &HybridModel, path: &Path) -> Result<()> {
    model.save(path)
}

pub fn load_model(path: &Path) -> Result<HybridModel> {
    HybridModel::load(path)
}

/// Positive-class probability for every row, in row order.
pub fn predict_scores(model: &HybridModel, features: &[Vec<f64>]) -> Result<Vec<f64>> {
    features
        .par_iter()
        .map(|x| Ok(model.forward(x)?[1]))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean per-sample training loss seen during the epoch's updates.
    pub loss: f64,
    pub train_acc: f64,
    pub val_acc: f64,
}

pub fn history_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,loss,train_acc,val_acc\n");
    for r in history {
        writeln!(out, "{},{},{},{}", r.epoch, r.loss, r.train_acc, r.val_acc).unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    /// Checkpoint with the best validation accuracy (earliest on ties), or
    /// the initial model when no epochs ran.
    pub model: HybridModel,
    pub best_epoch: Option<usize>,
    /// Parameters after the last epoch.
    pub final_model: HybridModel,
    pub history: Vec<EpochRecord>,
}

/// Minibatch training. Per-sample gradients inside a batch are computed in
/// parallel and summed in sample order, so results do not depend on the
/// thread count.
pub fn train(
    model: HybridModel,
    splits: &DataSplits,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    for (name, part) in [("train", &splits.train), ("val", &splits.val)] {
        if part.is_empty() {
            return Err(Error::Data(format!("{name} split is empty")));
        }
        if part.feature_dim() != model.feature_dim() {
            return Err(Error::DimensionMismatch {
                expected: model.feature_dim(),
                actual: part.feature_dim(),
            });
        }
    }
    config.validate(splits.train.len())?;

    let mut model = model;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, Stream::Training));
    let mut optimizer =
        OptimizerState::new(config.optimizer, config.learning_rate, config.momentum)?;
    let schedule = StepSchedule {
        base_rate: config.learning_rate,
        step_size: config.step_size,
        gamma: config.gamma,
    };
    let train = &splits.train;
    let pre_len = model.pre_net.num_params();
    let mut history = Vec::with_capacity(config.epochs);
    let mut best = model.clone();
    let mut best_epoch = None;
    let mut best_val = f64::NEG_INFINITY;

    for epoch in 0..config.epochs {
        optimizer.set_learning_rate(schedule.rate_at(epoch));
        let mut order: Vec<usize> = (0..train.len()).collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng);
        let mut loss_sum = 0.0;
        for (batch, chunk) in order.chunks(config.batch_size).enumerate() {
            let grads = chunk
                .par_iter()
                .map(|&i| {
                    model.backward_inner(
                        &train.features()[i],
                        train.labels()[i],
                        !config.freeze_pre_net,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let mut total = vec![0.0; model.num_params()];
            let mut batch_loss = 0.0;
            for g in &grads {
                batch_loss += g.loss;
                for (t, v) in total.iter_mut().zip(g.flatten()) {
                    *t += v;
                }
            }
            if !batch_loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch });
            }
            loss_sum += batch_loss;
            let scale = 1.0 / chunk.len() as f64;
            total.iter_mut().for_each(|g| *g *= scale);
            if config.freeze_pre_net {
                total[..pre_len].iter_mut().for_each(|g| *g = 0.0);
            }
            let mut params = model.params_flat();
            optimizer.step(&mut params, &total).map_err(|e| match e {
                Error::NonFinite(_) => Error::NonFiniteLoss { epoch, batch },
                other => other,
            })?;
            model.set_params_flat(&params)?;
        }
        let train_acc = accuracy(
            &predict_scores(&model, train.features())?,
            train.labels(),
            DEFAULT_THRESHOLD,
        )?;
        let val_acc = accuracy(
            &predict_scores(&model, splits.val.features())?,
            splits.val.labels(),
            DEFAULT_THRESHOLD,
        )?;
        history.push(EpochRecord {
            epoch,
            loss: loss_sum / train.len() as f64,
            train_acc,
            val_acc,
        });
        if val_acc > best_val {
            best_val = val_acc;
            best = model.clone();
            best_epoch = Some(epoch);
        }
    }
    Ok(TrainOutcome {
        model: best,
        best_epoch,
        final_model: model,
        history,
    })
}
