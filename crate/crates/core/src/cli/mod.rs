//! Command-line front end.
//!
//! ```text
//! hqc gen-data --kind blobs --n 200 --seed 7 --out blobs.csv
//! hqc train --config run.json [--seed S] [--out-dir DIR]
//! hqc eval --model DIR/model.json --data blobs.csv [--split test] [--out-dir DIR]
//! hqc expressibility --template vqc1 --qubits 4 --layers 3 [--samples 5000] [--bins 75]
//! hqc describe-circuit --template vqc6 --qubits 3 --layers 2 [--json]
//! ```
//!
//! `--seed`, `--out-dir`, `--config` and `--threads` are accepted before or
//! after the subcommand.
//!
//! Files written by `train` into the output directory:
//!
//! | file | contents |
//! |------|----------|
//! | `model.json` | versioned model, best validation checkpoint, config snapshot |
//! | `history.csv` | `epoch,loss,train_acc,val_acc` |
//! | `eval.json` | metrics on the test split |
//! | `roc.csv` | `fpr,tpr` |
//! | `pr.csv` | `recall,precision` |
//! | `reliability.csv` | `mean_pred,frac_pos,count` |
//! | `expressibility.json`, `expressibility_hist.csv` | template expressibility |
//! | `report.json` | accuracy, AUC, template, `exp_kl`, qubit count |
//!
//! `eval` writes the four `eval.json`/curve files; `expressibility` writes
//! the two expressibility files.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
//! failure.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::data::{Split, SyntheticKind};
use crate::error::{Error, Result};
use crate::expressibility::{DEFAULT_BINS, DEFAULT_SAMPLES};
use crate::metrics::{DEFAULT_RELIABILITY_BINS, DEFAULT_THRESHOLD};

pub use config::RunConfig;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "hqc",
    version,
    about = "Hybrid quantum-classical classifier toolkit"
)]
pub struct Cli {
    /// Run configuration (JSON); required by `train`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config's seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default: current directory).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic two-class dataset as CSV.
    GenData {
        #[arg(long, value_enum)]
        kind: SyntheticKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a hybrid model from a config file.
    Train,
    /// Evaluate a saved model on a dataset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Evaluate one split, recomputed from the model's config snapshot.
        #[arg(long, value_enum)]
        split: Option<SplitArg>,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[arg(long, default_value_t = DEFAULT_RELIABILITY_BINS)]
        bins: usize,
    },
    /// Expressibility of a built-in template.
    Expressibility {
        #[arg(long)]
        template: String,
        #[arg(long)]
        qubits: usize,
        #[arg(long, default_value_t = 1)]
        layers: usize,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
    },
    /// Print a built-in template's gate listing.
    DescribeCircuit {
        #[arg(long)]
        template: String,
        #[arg(long)]
        qubits: usize,
        #[arg(long, default_value_t = 1)]
        layers: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SplitArg {
    Train,
    Val,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Val => Split::Val,
            SplitArg::Test => Split::Test,
        }
    }
}

/// Exit status for a failed command.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::UnknownTemplate { .. }
        | Error::InvalidArgument(_)
        | Error::QubitCount(_)
        | Error::InvalidTemplate(_) => EXIT_CONFIG,
        Error::Data(_)
        | Error::Io { .. }
        | Error::DimensionMismatch { .. }
        | Error::EmptyInput
        | Error::MissingClass(_)
        | Error::NonBinaryLabel(_)
        | Error::LabelOutOfRange { .. }
        | Error::MalformedModel(_)
        | Error::VersionMismatch { .. }
        | Error::ModelShape(_) => EXIT_DATA,
        Error::NonFinite(_)
        | Error::NonFiniteLoss { .. }
        | Error::EmbeddingRange { .. }
        | Error::QubitIndex { .. }
        | Error::InvalidGate(_)
        | Error::MissingAngle { .. }
        | Error::SuperfluousAngle { .. } => EXIT_NUMERIC,
    }
}

/// Runs one parsed invocation, returning what should go to stdout.
pub fn run(cli: Cli) -> Result<String> {
    match cli.threads {
        Some(0) => Err(Error::Config(vec!["threads: must be >= 1".into()])),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(vec![format!("threads: {e}")]))?
            .install(|| dispatch(cli)),
        None => dispatch(cli),
    }
}

fn dispatch(cli: Cli) -> Result<String> {
    let out_dir = cli.out_dir.unwrap_or_else(|| PathBuf::from("."));
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::GenData { kind, n, out } => {
            let data = commands::cmd_gen_data(kind, n, seed, &out)?;
            Ok(format!("wrote {} rows to {}\n", data.len(), out.display()))
        }
        Command::Train => {
            let config = cli
                .config
                .ok_or_else(|| Error::Config(vec!["--config is required for train".into()]))?;
            let artifacts = commands::cmd_train(&config, cli.seed, &out_dir)?;
            Ok(format!("{}\n", artifacts.report.summary_line()))
        }
        Command::Eval {
            model,
            data,
            split,
            threshold,
            bins,
        } => {
            let eval = commands::cmd_eval(
                &model,
                &data,
                &out_dir,
                split.map(Into::into),
                threshold,
                bins,
            )?;
            Ok(format!(
                "accuracy={:.4} auc={:.4} samples={}\n",
                eval.accuracy, eval.auc, eval.num_samples
            ))
        }
        Command::Expressibility {
            template,
            qubits,
            layers,
            samples,
            bins,
        } => {
            let family = commands::parse_template(&template)?;
            let report = commands::cmd_expressibility(
                family, qubits, layers, samples, bins, seed, &out_dir,
            )?;
            Ok(format!(
                "{}\n",
                commands::expressibility_line(family, qubits, layers, &report)
            ))
        }
        Command::DescribeCircuit {
            template,
            qubits,
            layers,
            json,
        } => {
            let family = commands::parse_template(&template)?;
            commands::cmd_describe_circuit(family, qubits, layers, json)
        }
    }
}
