//! The five subcommands as library functions. Each writes its artifacts and
//! returns what it wrote; printing is left to the dispatcher.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::circuits::{builtin_template, CircuitTemplate, TemplateFamily};
use crate::data::{generate, DataSplits, Dataset, Split, SyntheticKind};
use crate::error::{Error, Result};
use crate::expressibility::{expressibility_score, ExpressibilityReport};
use crate::hybrid::{history_csv, predict_scores, train, HybridModel, TrainOutcome};
use crate::metrics::{evaluate, EvalReport};
use crate::seeding::{derive_seed, Stream};

pub const MODEL_FILE: &str = "model.json";
pub const HISTORY_FILE: &str = "history.csv";
pub const EVAL_FILE: &str = "eval.json";
pub const ROC_FILE: &str = "roc.csv";
pub const PR_FILE: &str = "pr.csv";
pub const RELIABILITY_FILE: &str = "reliability.csv";
pub const REPORT_FILE: &str = "report.json";
pub const EXPRESSIBILITY_FILE: &str = "expressibility.json";
pub const HISTOGRAM_FILE: &str = "expressibility_hist.csv";

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn cmd_gen_data(kind: SyntheticKind, n: usize, seed: u64, out: &Path) -> Result<Dataset> {
    let data = generate(kind, n, seed)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    data.write_csv(out)?;
    Ok(data)
}

/// One row in the style of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model: String,
    pub images: usize,
    pub train_samples: usize,
    pub val_samples: usize,
    pub test_samples: usize,
    pub acc: f64,
    pub auc: f64,
    pub vqc: TemplateFamily,
    pub layers: usize,
    pub exp_kl: f64,
    pub qubits: usize,
    pub best_epoch: Option<usize>,
}

impl RunReport {
    pub fn summary_line(&self) -> String {
        format!(
            "test_acc={:.4} test_auc={:.4} vqc={} qubits={} layers={} exp_kl={:.6}",
            self.acc, self.auc, self.vqc, self.qubits, self.layers, self.exp_kl
        )
    }
}

#[derive(Debug, Clone)]
pub struct TrainArtifacts {
    pub outcome: TrainOutcome,
    pub eval: EvalReport,
    pub expressibility: ExpressibilityReport,
    pub report: RunReport,
    pub out_dir: PathBuf,
}

/// Full pipeline: split, train, evaluate the best checkpoint on the test
/// split, score the template's expressibility, and write everything.
pub fn cmd_train(
    config_path: &Path,
    seed_override: Option<u64>,
    out_dir: &Path,
) -> Result<TrainArtifacts> {
    let mut config = RunConfig::load(config_path)?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    let data = Dataset::read_csv(&config.data_path(config_path))?;
    train_with_config(&config, &data, out_dir)
}

pub fn train_with_config(
    config: &RunConfig,
    data: &Dataset,
    out_dir: &Path,
) -> Result<TrainArtifacts> {
    let splits = data.split(config.train_fraction, config.val_fraction, config.seed)?;
    let problems = config.problems(splits.train.len());
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let train_config = config.train_config();
    let mut initial = HybridModel::from_config(data.feature_dim(), &train_config)?;
    initial.metadata.config = Some(serde_json::to_value(config).expect("config serializes"));
    let outcome = train(initial, &splits, &train_config)?;

    let eval = evaluate_on(
        &outcome.model,
        &splits.test,
        config.threshold,
        config.reliability_bins,
    )?;
    let expressibility = expressibility_score(
        outcome.model.template(),
        config.expressibility_samples,
        config.expressibility_bins,
        derive_seed(config.seed, Stream::Expressibility),
    )?;
    let report = RunReport {
        model: "hybrid".into(),
        images: data.len(),
        train_samples: splits.train.len(),
        val_samples: splits.val.len(),
        test_samples: splits.test.len(),
        acc: eval.accuracy,
        auc: eval.auc,
        vqc: config.template,
        layers: config.layers,
        exp_kl: expressibility.kl_score,
        qubits: config.num_qubits,
        best_epoch: outcome.best_epoch,
    };

    ensure_dir(out_dir)?;
    outcome.model.save(&out_dir.join(MODEL_FILE))?;
    write(&out_dir.join(HISTORY_FILE), &history_csv(&outcome.history))?;
    write_eval(&eval, out_dir)?;
    write_expressibility(&expressibility, out_dir)?;
    write(&out_dir.join(REPORT_FILE), &pretty(&report))?;
    Ok(TrainArtifacts {
        outcome,
        eval,
        expressibility,
        report,
        out_dir: out_dir.to_path_buf(),
    })
}

fn evaluate_on(
    model: &HybridModel,
    data: &Dataset,
    threshold: f64,
    bins: usize,
) -> Result<EvalReport> {
    if data.feature_dim() != model.feature_dim() {
        return Err(Error::Data(format!(
            "data has {} features but the model expects {}",
            data.feature_dim(),
            model.feature_dim()
        )));
    }
    let scores = predict_scores(model, data.features())?;
    evaluate(&scores, data.labels(), threshold, bins)
}

fn write_eval(eval: &EvalReport, out_dir: &Path) -> Result<()> {
    write(&out_dir.join(EVAL_FILE), &pretty(eval))?;
    write(&out_dir.join(ROC_FILE), &eval.roc_csv())?;
    write(&out_dir.join(PR_FILE), &eval.pr_csv())?;
    write(&out_dir.join(RELIABILITY_FILE), &eval.reliability_csv())
}

fn write_expressibility(report: &ExpressibilityReport, out_dir: &Path) -> Result<()> {
    write(&out_dir.join(EXPRESSIBILITY_FILE), &pretty(report))?;
    write(&out_dir.join(HISTOGRAM_FILE), &report.histogram_csv())
}

/// Rows of `data` to evaluate: everything, or one split recomputed from
/// the config snapshot stored in the model.
pub fn select_rows(model: &HybridModel, data: &Dataset, split: Option<Split>) -> Result<Dataset> {
    let Some(split) = split else {
        return Ok(data.clone());
    };
    let snapshot = model.metadata.config.as_ref().ok_or_else(|| {
        Error::Config(vec![
            "split: the model carries no config snapshot to split with".into(),
        ])
    })?;
    let config = RunConfig::from_json(&snapshot.to_string())?;
    let DataSplits {
        train, val, test, ..
    } = data.split(config.train_fraction, config.val_fraction, config.seed)?;
    Ok(match split {
        Split::Train => train,
        Split::Val => val,
        Split::Test => test,
    })
}

pub fn cmd_eval(
    model_path: &Path,
    data_path: &Path,
    out_dir: &Path,
    split: Option<Split>,
    threshold: f64,
    reliability_bins: usize,
) -> Result<EvalReport> {
    let model = HybridModel::load(model_path)?;
    let data = Dataset::read_csv(data_path)?;
    let rows = select_rows(&model, &data, split)?;
    let eval = evaluate_on(&model, &rows, threshold, reliability_bins)?;
    ensure_dir(out_dir)?;
    write_eval(&eval, out_dir)?;
    Ok(eval)
}

pub fn parse_template(name: &str) -> Result<TemplateFamily> {
    name.parse()
}

pub fn cmd_expressibility(
    family: TemplateFamily,
    qubits: usize,
    layers: usize,
    samples: usize,
    bins: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<ExpressibilityReport> {
    let template = builtin_template(family, qubits, layers)?;
    let report = expressibility_score(
        &template,
        samples,
        bins,
        derive_seed(seed, Stream::Expressibility),
    )?;
    ensure_dir(out_dir)?;
    write_expressibility(&report, out_dir)?;
    Ok(report)
}

pub fn expressibility_line(
    family: TemplateFamily,
    qubits: usize,
    layers: usize,
    report: &ExpressibilityReport,
) -> String {
    format!("{family} {qubits} {layers} {}", report.kl_score)
}

pub fn cmd_describe_circuit(
    family: TemplateFamily,
    qubits: usize,
    layers: usize,
    json: bool,
) -> Result<String> {
    let template: CircuitTemplate = builtin_template(family, qubits, layers)?;
    Ok(if json {
        let mut s = template.to_json();
        s.push('\n');
        s
    } else {
        template.describe()
    })
}
