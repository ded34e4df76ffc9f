//! Expressibility of a circuit template: KL divergence between the sampled
//! pairwise state-fidelity distribution and the Haar-random law
//! `P(F) = (N−1)(1−F)^(N−2)`, `N = 2^n`.
//!
//! Lower scores mean the template's output states are spread more like
//! Haar-random states. Scores are in nats.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuits::{BoundCircuit, CircuitTemplate};
use crate::error::{Error, Result};
use crate::seeding::indexed_rng;

pub const DEFAULT_SAMPLES: usize = 5000;
pub const DEFAULT_BINS: usize = 75;
pub const MIN_SAMPLES: usize = 100;
pub const MIN_BINS: usize = 10;
/// Floor applied to reference-bin masses inside the log ratio.
pub const REFERENCE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpressibilityReport {
    pub template_id: String,
    pub num_qubits: usize,
    pub num_samples: usize,
    pub num_bins: usize,
    pub mean_fidelity: f64,
    pub histogram: Vec<f64>,
    pub haar_reference: Vec<f64>,
    #[serde(rename = "exp_kl")]
    pub kl_score: f64,
}

impl ExpressibilityReport {
    /// Two-column `bin_center,probability` listing of the empirical histogram.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("bin_center,probability\n");
        let width = 1.0 / self.num_bins as f64;
        for (b, p) in self.histogram.iter().enumerate() {
            let center = (b as f64 + 0.5) * width;
            writeln!(out, "{center},{p}").unwrap();
        }
        out
    }
}

/// Haar probability mass of fidelity bin `bin_index` out of `num_bins`
/// uniform bins on `[0, 1]`, for Hilbert-space dimension `dim`.
pub fn haar_fidelity_pdf_bin(bin_index: usize, num_bins: usize, dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidArgument(format!(
            "Hilbert-space dimension must be >= 2, got {dim}"
        )));
    }
    if num_bins == 0 || bin_index >= num_bins {
        return Err(Error::InvalidArgument(format!(
            "bin {bin_index} out of range for {num_bins} bins"
        )));
    }
    let lo = bin_index as f64 / num_bins as f64;
    let hi = (bin_index + 1) as f64 / num_bins as f64;
    let survival = |f: f64| (1.0 - f).powf((dim - 1) as f64);
    Ok(survival(lo) - survival(hi))
}

pub fn haar_reference(num_bins: usize, dim: usize) -> Result<Vec<f64>> {
    (0..num_bins)
        .map(|b| haar_fidelity_pdf_bin(b, num_bins, dim))
        .collect()
}

/// Fidelities `|⟨ψ(θ)|ψ(φ)⟩|²` for `num_samples` independent uniform pairs
/// `θ, φ ∈ [0, 2π)^P`, inputs held at zero. Sample `i` draws from its own
/// stream, so the output is independent of scheduling.
pub fn sample_fidelities(
    template: &CircuitTemplate,
    num_samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if num_samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_SAMPLES} fidelity samples, got {num_samples}"
        )));
    }
    let inputs = vec![0.0; template.num_inputs()];
    let p = template.num_params();
    (0..num_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = indexed_rng(seed, i as u64);
            let a: Vec<f64> = (0..p).map(|_| rng.random::<f64>() * TAU).collect();
            let b: Vec<f64> = (0..p).map(|_| rng.random::<f64>() * TAU).collect();
            let sa = BoundCircuit::new(template, &a, &inputs)?.run()?;
            let sb = BoundCircuit::new(template, &b, &inputs)?.run()?;
            Ok(sa.fidelity(&sb)?.clamp(0.0, 1.0))
        })
        .collect()
}

/// Normalized histogram over `num_bins` uniform bins; `F = 1` falls in the
/// last bin.
pub fn fidelity_histogram(fidelities: &[f64], num_bins: usize) -> Vec<f64> {
    let mut counts = vec![0usize; num_bins];
    for &f in fidelities {
        let b = ((f * num_bins as f64) as usize).min(num_bins - 1);
        counts[b] += 1;
    }
    let total = fidelities.len() as f64;
    counts.into_iter().map(|c| c as f64 / total).collect()
}

/// `Σ p_b ln(p_b / max(q_b, ε))` over bins with `p_b > 0`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(pb, _)| **pb > 0.0)
        .map(|(pb, qb)| pb * (pb / qb.max(REFERENCE_FLOOR)).ln())
        .sum::<f64>()
        .max(0.0)
}

pub fn expressibility_score(
    template: &CircuitTemplate,
    num_samples: usize,
    num_bins: usize,
    seed: u64,
) -> Result<ExpressibilityReport> {
    if num_bins < MIN_BINS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_BINS} histogram bins, got {num_bins}"
        )));
    }
    let fidelities = sample_fidelities(template, num_samples, seed)?;
    let histogram = fidelity_histogram(&fidelities, num_bins);
    let haar_reference = haar_reference(num_bins, 1 << template.num_qubits())?;
    let kl_score = kl_divergence(&histogram, &haar_reference);
    Ok(ExpressibilityReport {
        template_id: template.id().to_string(),
        num_qubits: template.num_qubits(),
        num_samples,
        num_bins,
        mean_fidelity: fidelities.iter().sum::<f64>() / num_samples as f64,
        histogram,
        haar_reference,
        kl_score,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{GateKind, GateOp, Slot};

    /// Haar CDF `1 − (1 − F)^(N−1)`, written independently of the bin helper.
    fn haar_cdf(f: f64, dim: usize) -> f64 {
        1.0 - (1.0 - f).powi(dim as i32 - 1)
    }

    #[test]
    fn haar_bins_against_cdf() {
        // N = 2: the law is uniform, so two bins carry half the mass each.
        let cdf_half = haar_cdf(0.5, 2);
        assert!((cdf_half - 0.5).abs() < 1e-15);
        assert!((haar_fidelity_pdf_bin(0, 2, 2).unwrap() - cdf_half).abs() < 1e-15);
        assert!((haar_fidelity_pdf_bin(1, 2, 2).unwrap() - (1.0 - cdf_half)).abs() < 1e-15);

        assert_eq!(haar_fidelity_pdf_bin(0, 1, 16).unwrap(), 1.0);

        let expected = haar_cdf(0.5, 4);
        assert!((expected - 0.875).abs() < 1e-15);
        assert!((haar_fidelity_pdf_bin(0, 2, 4).unwrap() - expected).abs() < 1e-15);

        assert!(haar_fidelity_pdf_bin(0, 2, 1).is_err());
    }

    #[test]
    fn haar_reference_sums_to_one() {
        for dim in [2, 4, 16, 128] {
            let q = haar_reference(75, dim).unwrap();
            assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn kl_of_reference_with_itself_is_zero() {
        let q = haar_reference(75, 16).unwrap();
        assert_eq!(kl_divergence(&q, &q), 0.0);
    }

    #[test]
    fn zero_parameter_template_is_degenerate() {
        let t = CircuitTemplate::new(
            "fixed",
            2,
            vec![
                GateOp::single(GateKind::H, 0),
                GateOp::controlled(GateKind::Cnot, 0, 1),
            ],
        )
        .unwrap();
        let f = sample_fidelities(&t, 200, 1).unwrap();
        assert!(f.iter().all(|&x| x == 1.0));
        let report = expressibility_score(&t, 200, 75, 1).unwrap();
        let q_last = (1.0f64 / 75.0).powi(3);
        assert!((report.kl_score - (1.0 / q_last).ln()).abs() < 1e-9);
    }

    #[test]
    fn self_fidelity_of_single_ry() {
        let t = CircuitTemplate::new(
            "ry",
            1,
            vec![GateOp::rotation(GateKind::Ry, 0, Slot::Param(0))],
        )
        .unwrap();
        let s = BoundCircuit::new(&t, &[1.234], &[]).unwrap().run().unwrap();
        assert!((s.fidelity(&s).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn preconditions() {
        let t =
            crate::circuits::builtin_template(crate::circuits::TemplateFamily::Vqc6, 2, 1).unwrap();
        assert!(sample_fidelities(&t, 50, 0).is_err());
        assert!(expressibility_score(&t, 200, 5, 0).is_err());
    }

    #[test]
    fn histogram_csv_layout() {
        let t =
            crate::circuits::builtin_template(crate::circuits::TemplateFamily::Vqc6, 2, 1).unwrap();
        let r = expressibility_score(&t, 100, 10, 3).unwrap();
        let csv = r.histogram_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("bin_center,probability"));
        assert_eq!(lines.count(), 10);
        assert!((r.histogram.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
