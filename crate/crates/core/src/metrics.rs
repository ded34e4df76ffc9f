//! Binary-classifier evaluation: accuracy, ROC/AUC, precision–recall and
//! reliability curves.
//!
//! Scores are positive-class probabilities and labels are `0`/`1`. Curves
//! sweep the distinct scores in descending order; a sample counts as a
//! predicted positive when `score >= threshold`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.5;
pub const DEFAULT_RELIABILITY_BINS: usize = 10;

fn check_inputs(scores: &[f64], labels: &[u8]) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::EmptyInput);
    }
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            actual: labels.len(),
        });
    }
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::NonBinaryLabel(bad));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("score is NaN".into()));
    }
    Ok(())
}

/// Fraction of samples where `(score >= threshold) == label`.
pub fn accuracy(scores: &[f64], labels: &[u8], threshold: f64) -> Result<f64> {
    check_inputs(scores, labels)?;
    let correct = scores
        .iter()
        .zip(labels)
        .filter(|(&s, &l)| (s >= threshold) == (l == 1))
        .count();
    Ok(correct as f64 / scores.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// Starts at `(0, 0)` for the `+∞` threshold and ends at `(1, 1)`.
    pub points: Vec<RocPoint>,
    /// Threshold that produced each point after the first.
    pub thresholds: Vec<f64>,
    pub auc: f64,
}

/// Cumulative `(threshold, tp, fp)` after each distinct score, descending.
fn sweep(scores: &[f64], labels: &[u8]) -> Vec<(f64, u64, u64)> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut out = Vec::new();
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut k = 0;
    while k < order.len() {
        let threshold = scores[order[k]];
        while k < order.len() && scores[order[k]] == threshold {
            if labels[order[k]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        out.push((threshold, tp, fp));
    }
    out
}

fn class_counts(labels: &[u8]) -> (u64, u64) {
    let pos = labels.iter().filter(|&&l| l == 1).count() as u64;
    (pos, labels.len() as u64 - pos)
}

/// ROC curve and trapezoidal AUC. Tied scores share one threshold, which
/// makes the area equal to the Mann–Whitney statistic with half credit for
/// ties. The area is accumulated in integer units and divided once.
pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<RocCurve> {
    check_inputs(scores, labels)?;
    let (pos, neg) = class_counts(labels);
    if pos == 0 {
        return Err(Error::MissingClass(1));
    }
    if neg == 0 {
        return Err(Error::MissingClass(0));
    }
    let steps = sweep(scores, labels);
    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0 }];
    let mut thresholds = Vec::with_capacity(steps.len());
    // Twice the area, in units of (1/pos)·(1/neg).
    let mut doubled_area: u128 = 0;
    let (mut prev_tp, mut prev_fp) = (0u64, 0u64);
    for &(t, tp, fp) in &steps {
        doubled_area += u128::from(fp - prev_fp) * u128::from(tp + prev_tp);
        points.push(RocPoint {
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
        thresholds.push(t);
        prev_tp = tp;
        prev_fp = fp;
    }
    let auc = doubled_area as f64 / (2.0 * pos as f64 * neg as f64);
    Ok(RocCurve {
        points,
        thresholds,
        auc,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub recall: f64,
    pub precision: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
    pub thresholds: Vec<f64>,
}

/// `tp / (tp + fp)`, or 1 when nothing is predicted positive.
pub fn precision(tp: u64, fp: u64) -> f64 {
    if tp + fp == 0 {
        1.0
    } else {
        tp as f64 / (tp + fp) as f64
    }
}

/// One point per distinct score, highest threshold first.
pub fn pr_curve(scores: &[f64], labels: &[u8]) -> Result<PrCurve> {
    check_inputs(scores, labels)?;
    let (pos, _) = class_counts(labels);
    if pos == 0 {
        return Err(Error::MissingClass(1));
    }
    let steps = sweep(scores, labels);
    Ok(PrCurve {
        points: steps
            .iter()
            .map(|&(_, tp, fp)| PrPoint {
                recall: tp as f64 / pos as f64,
                precision: precision(tp, fp),
            })
            .collect(),
        thresholds: steps.iter().map(|&(t, _, _)| t).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityPoint {
    pub mean_predicted: f64,
    pub fraction_positive: f64,
    pub count: usize,
}

/// Uniform-width bins on `[0, 1]`; empty bins are omitted. A score of
/// exactly 1 lands in the last bin.
pub fn reliability_curve(
    scores: &[f64],
    labels: &[u8],
    num_bins: usize,
) -> Result<Vec<ReliabilityPoint>> {
    check_inputs(scores, labels)?;
    if num_bins < 2 {
        return Err(Error::InvalidArgument(format!(
            "reliability curve needs at least 2 bins, got {num_bins}"
        )));
    }
    if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::InvalidArgument(format!(
            "score {s} is not a probability"
        )));
    }
    let mut sums = vec![0.0; num_bins];
    let mut positives = vec![0usize; num_bins];
    let mut counts = vec![0usize; num_bins];
    for (&s, &l) in scores.iter().zip(labels) {
        let b = ((s * num_bins as f64) as usize).min(num_bins - 1);
        sums[b] += s;
        positives[b] += usize::from(l);
        counts[b] += 1;
    }
    Ok((0..num_bins)
        .filter(|&b| counts[b] > 0)
        .map(|b| ReliabilityPoint {
            mean_predicted: sums[b] / counts[b] as f64,
            fraction_positive: positives[b] as f64 / counts[b] as f64,
            count: counts[b],
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub num_samples: usize,
    pub threshold: f64,
    pub accuracy: f64,
    pub auc: f64,
    pub roc_points: Vec<RocPoint>,
    pub pr_points: Vec<PrPoint>,
    pub reliability_points: Vec<ReliabilityPoint>,
}

impl EvalReport {
    pub fn roc_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for p in &self.roc_points {
            writeln!(out, "{},{}", p.fpr, p.tpr).unwrap();
        }
        out
    }

    pub fn pr_csv(&self) -> String {
        let mut out = String::from("recall,precision\n");
        for p in &self.pr_points {
            writeln!(out, "{},{}", p.recall, p.precision).unwrap();
        }
        out
    }

    pub fn reliability_csv(&self) -> String {
        let mut out = String::from("mean_pred,frac_pos,count\n");
        for p in &self.reliability_points {
            writeln!(
                out,
                "{},{},{}",
                p.mean_predicted, p.fraction_positive, p.count
            )
            .unwrap();
        }
        out
    }
}

/// All metrics at once. Both classes must be present.
pub fn evaluate(
    scores: &[f64],
    labels: &[u8],
    threshold: f64,
    reliability_bins: usize,
) -> Result<EvalReport> {
    let roc = roc_curve(scores, labels)?;
    Ok(EvalReport {
        num_samples: scores.len(),
        threshold,
        accuracy: accuracy(scores, labels, threshold)?,
        auc: roc.auc,
        roc_points: roc.points,
        pr_points: pr_curve(scores, labels)?.points,
        reliability_points: reliability_curve(scores, labels, reliability_bins)?,
    })
}
