//! The `train` run configuration: a strict JSON object.
//!
//! Only `data` is required. Unknown keys are errors, and every offending key
//! is reported in one pass.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::circuits::TemplateFamily;
use crate::error::{Error, Result};
use crate::expressibility::{DEFAULT_BINS, DEFAULT_SAMPLES, MIN_BINS, MIN_SAMPLES};
use crate::hybrid::TrainConfig;
use crate::metrics::{DEFAULT_RELIABILITY_BINS, DEFAULT_THRESHOLD};
use crate::nn::OptimizerKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Dataset CSV; relative paths resolve against the config file's directory.
    pub data: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::template")]
    pub template: TemplateFamily,
    #[serde(default = "defaults::num_qubits")]
    pub num_qubits: usize,
    #[serde(default = "defaults::layers")]
    pub layers: usize,
    #[serde(default = "defaults::epochs")]
    pub epochs: usize,
    #[serde(default = "defaults::batch_size")]
    pub batch_size: usize,
    #[serde(default = "defaults::learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "defaults::optimizer")]
    pub optimizer: OptimizerKind,
    #[serde(default)]
    pub momentum: Option<f64>,
    #[serde(default = "defaults::step_size")]
    pub step_size: usize,
    #[serde(default = "defaults::gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub freeze_pre_net: bool,
    #[serde(default = "defaults::train_fraction")]
    pub train_fraction: f64,
    #[serde(default = "defaults::val_fraction")]
    pub val_fraction: f64,
    #[serde(default = "defaults::threshold")]
    pub threshold: f64,
    #[serde(default = "defaults::reliability_bins")]
    pub reliability_bins: usize,
    #[serde(default = "defaults::expressibility_samples")]
    pub expressibility_samples: usize,
    #[serde(default = "defaults::expressibility_bins")]
    pub expressibility_bins: usize,
}

mod defaults {
    use super::*;

    pub fn template() -> TemplateFamily {
        TemplateFamily::Vqc1
    }
    pub fn num_qubits() -> usize {
        4
    }
    pub fn layers() -> usize {
        1
    }
    pub fn epochs() -> usize {
        30
    }
    pub fn batch_size() -> usize {
        16
    }
    pub fn learning_rate() -> f64 {
        0.01
    }
    pub fn optimizer() -> OptimizerKind {
        OptimizerKind::Adam
    }
    pub fn step_size() -> usize {
        1
    }
    pub fn gamma() -> f64 {
        1.0
    }
    pub fn train_fraction() -> f64 {
        0.8
    }
    pub fn val_fraction() -> f64 {
        0.1
    }
    pub fn threshold() -> f64 {
        DEFAULT_THRESHOLD
    }
    pub fn reliability_bins() -> usize {
        DEFAULT_RELIABILITY_BINS
    }
    pub fn expressibility_samples() -> usize {
        DEFAULT_SAMPLES
    }
    pub fn expressibility_bins() -> usize {
        DEFAULT_BINS
    }
}

impl RunConfig {
    /// A config with every default and the given data path.
    pub fn with_data(data: impl Into<String>) -> Self {
        serde_json::from_value(serde_json::json!({ "data": data.into() }))
            .expect("defaults deserialize")
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            template: self.template,
            num_qubits: self.num_qubits,
            layers: self.layers,
            epochs: self.epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            optimizer: self.optimizer,
            momentum: self.momentum,
            step_size: self.step_size,
            gamma: self.gamma,
            freeze_pre_net: self.freeze_pre_net,
            seed: self.seed,
        }
    }

    /// Parses and validates; the error lists every problem found.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::Config(vec![format!("not valid JSON: {e}")]))?;
        let serde_json::Value::Object(map) = value else {
            return Err(Error::Config(vec!["config must be a JSON object".into()]));
        };

        let base = serde_json::to_value(RunConfig::with_data("")).expect("serializes");
        let known = base.as_object().expect("object");
        let mut problems = Vec::new();
        if !map.contains_key("data") {
            problems.push("data: required key is missing".to_string());
        }
        for (key, v) in &map {
            if !known.contains_key(key) {
                problems.push(format!("{key}: unknown key"));
                continue;
            }
            // Probe each key alone against an otherwise-valid config.
            let mut probe = known.clone();
            probe.insert(key.clone(), v.clone());
            if let Err(e) = serde_json::from_value::<RunConfig>(serde_json::Value::Object(probe)) {
                problems.push(format!("{key}: invalid value {v} ({e})"));
            }
        }
        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }
        let config: RunConfig = serde_json::from_value(serde_json::Value::Object(map))
            .map_err(|e| Error::Config(vec![e.to_string()]))?;
        let problems = config.problems(0);
        if problems.is_empty() {
            Ok(config)
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::from_json(&text)
    }

    /// Value constraints. `num_train = 0` skips the batch-size bound.
    pub fn problems(&self, num_train: usize) -> Vec<String> {
        let mut out = self.train_config().problems(num_train);
        if self.data.trim().is_empty() {
            out.push("data: path is empty".into());
        }
        if !(self.train_fraction > 0.0
            && self.val_fraction > 0.0
            && self.train_fraction + self.val_fraction < 1.0)
        {
            out.push(format!(
                "train_fraction/val_fraction: {}/{} must be positive and sum below 1",
                self.train_fraction, self.val_fraction
            ));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            out.push(format!("threshold: {} outside [0, 1]", self.threshold));
        }
        if self.reliability_bins < 2 {
            out.push("reliability_bins: must be >= 2".into());
        }
        if self.expressibility_samples < MIN_SAMPLES {
            out.push(format!("expressibility_samples: must be >= {MIN_SAMPLES}"));
        }
        if self.expressibility_bins < MIN_BINS {
            out.push(format!("expressibility_bins: must be >= {MIN_BINS}"));
        }
        out
    }

    pub fn data_path(&self, config_path: &Path) -> PathBuf {
        let p = Path::new(&self.data);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            config_path
                .parent()
                .unwrap_or_else(|| Path::new("."))
                .join(p)
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
