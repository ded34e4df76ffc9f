//! Feature datasets: CSV ingestion, seeded train/val/test splitting, and
//! synthetic generators.
//!
//! The CSV layout is a header `f0,f1,…,f{d-1},label` followed by one row
//! per sample, labels in `{0, 1}`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeding::{stream_rng, Stream};

pub const MIN_GENERATED: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    feature_dim: usize,
    features: Vec<Vec<f64>>,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<u8>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::Data(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        let feature_dim = features.first().map_or(0, Vec::len);
        if let Some(row) = features.iter().position(|r| r.len() != feature_dim) {
            return Err(Error::Data(format!(
                "row {row} has {} features, expected {feature_dim}",
                features[row].len()
            )));
        }
        if let Some(row) = labels.iter().position(|&l| l > 1) {
            return Err(Error::Data(format!(
                "row {row} has label {}, expected 0 or 1",
                labels[row]
            )));
        }
        if let Some(row) = features
            .iter()
            .position(|r| r.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::Data(format!("row {row} has a non-finite feature")));
        }
        Ok(Dataset {
            feature_dim,
            features,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            feature_dim: self.feature_dim,
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| Error::Data(format!("header: {e}")))?
            .clone();
        let cols: Vec<&str> = header.iter().collect();
        let Some((&last, feature_cols)) = cols.split_last() else {
            return Err(Error::Data("empty header".into()));
        };
        if last != "label" {
            return Err(Error::Data(format!(
                "last header column must be `label`, found `{last}`"
            )));
        }
        for (j, name) in feature_cols.iter().enumerate() {
            if *name != format!("f{j}") {
                return Err(Error::Data(format!(
                    "header column {j} must be `f{j}`, found `{name}`"
                )));
            }
        }
        let d = feature_cols.len();
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (i, record) in reader.records().enumerate() {
            // Row numbers are 1-based data rows; the header is row 0.
            let row = i + 1;
            let record = record.map_err(|e| Error::Data(format!("row {row}: {e}")))?;
            if record.len() != d + 1 {
                return Err(Error::Data(format!(
                    "row {row}: expected {} columns, found {}",
                    d + 1,
                    record.len()
                )));
            }
            let mut values = Vec::with_capacity(d);
            for (j, field) in record.iter().take(d).enumerate() {
                let v = f64::from_str(field).map_err(|_| {
                    Error::Data(format!("row {row}, column f{j}: cannot parse `{field}`"))
                })?;
                if !v.is_finite() {
                    return Err(Error::Data(format!(
                        "row {row}, column f{j}: non-finite value"
                    )));
                }
                values.push(v);
            }
            let label = match &record[d] {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(Error::Data(format!(
                        "row {row}: label must be 0 or 1, found `{other}`"
                    )))
                }
            };
            features.push(values);
            labels.push(label);
        }
        if labels.is_empty() {
            return Err(Error::Data("no data rows".into()));
        }
        Dataset::new(features, labels)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_csv_str(&text)
    }

    /// Shortest round-trip float formatting, so reading back is lossless.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for j in 0..self.feature_dim {
            write!(out, "f{j},").unwrap();
        }
        out.push_str("label\n");
        for (row, label) in self.features.iter().zip(&self.labels) {
            for v in row {
                write!(out, "{v},").unwrap();
            }
            writeln!(out, "{label}").unwrap();
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    /// Seeded shuffle into train/val/test. Counts are `round(n·train)`,
    /// `round(n·val)` and the remainder.
    pub fn split(&self, train_fraction: f64, val_fraction: f64, seed: u64) -> Result<DataSplits> {
        if !(train_fraction > 0.0 && val_fraction > 0.0 && train_fraction + val_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "split fractions train={train_fraction}, val={val_fraction} must be positive and sum below 1"
            )));
        }
        let n = self.len();
        let n_train = (n as f64 * train_fraction).round() as usize;
        let n_val = (n as f64 * val_fraction).round() as usize;
        if n_train == 0 || n_val == 0 || n_train + n_val >= n {
            return Err(Error::Data(format!(
                "{n} samples cannot fill train={n_train}, val={n_val} and a non-empty test split"
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut stream_rng(seed, Stream::Data));
        let mut assignment = vec![Split::Test; n];
        for &i in &order[..n_train] {
            assignment[i] = Split::Train;
        }
        for &i in &order[n_train..n_train + n_val] {
            assignment[i] = Split::Val;
        }
        Ok(DataSplits {
            train: self.subset(&order[..n_train]),
            val: self.subset(&order[n_train..n_train + n_val]),
            test: self.subset(&order[n_train + n_val..]),
            assignment,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSplits {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
    /// Split of each row of the source dataset.
    pub assignment: Vec<Split>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SyntheticKind {
    Blobs,
    Moons,
    BernoulliScores,
}

/// Blob centres and spread.
pub const BLOB_CENTRES: [[f64; 2]; 2] = [[-1.0, -1.0], [1.0, 1.0]];
pub const BLOB_STD: f64 = 0.5;
pub const MOON_NOISE: f64 = 0.1;

/// Synthetic two-class data. Labels alternate so classes differ in size by
/// at most one sample.
pub fn generate(kind: SyntheticKind, n: usize, seed: u64) -> Result<Dataset> {
    if n < MIN_GENERATED {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_GENERATED} samples, got {n}"
        )));
    }
    let mut rng = stream_rng(seed, Stream::Data);
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    match kind {
        SyntheticKind::Blobs => {
            let noise = Normal::new(0.0, BLOB_STD).expect("valid std");
            for i in 0..n {
                let label = (i % 2) as u8;
                let c = BLOB_CENTRES[label as usize];
                features.push(vec![
                    c[0] + noise.sample(&mut rng),
                    c[1] + noise.sample(&mut rng),
                ]);
                labels.push(label);
            }
        }
        SyntheticKind::Moons => {
            let noise = Normal::new(0.0, MOON_NOISE).expect("valid std");
            for i in 0..n {
                let label = (i % 2) as u8;
                let t = rng.random::<f64>() * PI;
                let (x, y) = if label == 0 {
                    (t.cos(), t.sin())
                } else {
                    (1.0 - t.cos(), 0.5 - t.sin())
                };
                features.push(vec![x + noise.sample(&mut rng), y + noise.sample(&mut rng)]);
                labels.push(label);
            }
        }
        SyntheticKind::BernoulliScores => {
            for _ in 0..n {
                let score: f64 = rng.random();
                let label = u8::from(rng.random::<f64>() < score);
                features.push(vec![score]);
                labels.push(label);
            }
        }
    }
    Dataset::new(features, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blobs_are_balanced_and_clustered() {
        let ds = generate(SyntheticKind::Blobs, 200, 7).unwrap();
        assert_eq!(ds.len(), 200);
        assert_eq!(ds.feature_dim(), 2);
        let ones = ds.labels().iter().filter(|&&l| l == 1).count();
        assert!((ones as i64 - 100).abs() <= 1);
        // Class means sit near their centres (std 0.5, 100 samples: SE 0.05).
        for label in [0u8, 1] {
            let rows: Vec<&Vec<f64>> = ds
                .features()
                .iter()
                .zip(ds.labels())
                .filter(|(_, &l)| l == label)
                .map(|(r, _)| r)
                .collect();
            for d in 0..2 {
                let mean = rows.iter().map(|r| r[d]).sum::<f64>() / rows.len() as f64;
                assert!((mean - BLOB_CENTRES[label as usize][d]).abs() < 0.2);
            }
        }
        let odd = generate(SyntheticKind::Blobs, 11, 1).unwrap();
        assert_eq!(odd.labels().iter().filter(|&&l| l == 0).count(), 6);
    }

    #[test]
    fn generators_are_deterministic() {
        for kind in [
            SyntheticKind::Blobs,
            SyntheticKind::Moons,
            SyntheticKind::BernoulliScores,
        ] {
            let a = generate(kind, 50, 3).unwrap().to_csv_string();
            let b = generate(kind, 50, 3).unwrap().to_csv_string();
            let c = generate(kind, 50, 4).unwrap().to_csv_string();
            assert_eq!(a, b);
            assert_ne!(a, c);
        }
        assert!(generate(SyntheticKind::Blobs, 5, 0).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let ds = generate(SyntheticKind::Moons, 40, 9).unwrap();
        let text = ds.to_csv_string();
        assert!(text.starts_with("f0,f1,label\n"));
        let back = Dataset::from_csv_str(&text).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.to_csv_string(), text);
    }

    #[test]
    fn csv_errors_name_rows() {
        let err = Dataset::from_csv_str("f0,label\n0.1,0\nabc,1\n").unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
        let err = Dataset::from_csv_str("f0,label\n0.1,0\n0.2,3\n").unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
        let err = Dataset::from_csv_str("x,label\n0.1,0\n").unwrap_err();
        assert!(err.to_string().contains("f0"));
        let err = Dataset::from_csv_str("f0,f1,label\n0.1,0\n").unwrap_err();
        assert!(err.to_string().contains("row 1"), "{err}");
    }

    #[test]
    fn split_sizes_and_determinism() {
        let ds = generate(SyntheticKind::Blobs, 200, 7).unwrap();
        let s = ds.split(0.8, 0.1, 1).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (160, 20, 20));
        assert_eq!(s, ds.split(0.8, 0.1, 1).unwrap());
        assert_ne!(s.train, ds.split(0.8, 0.1, 2).unwrap().train);
        assert_eq!(
            s.assignment.iter().filter(|&&a| a == Split::Val).count(),
            20
        );
        assert!(ds.split(0.9, 0.2, 1).is_err());
        let tiny = generate(SyntheticKind::Blobs, 10, 1).unwrap();
        assert!(tiny.split(0.95, 0.04, 1).is_err());
    }
}
