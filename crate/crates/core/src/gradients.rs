//! Parameter-shift Jacobians of `⟨Z_i⟩` with respect to circuit angles.
//!
//! Every gate occurrence is differentiated on its own and the results are
//! summed per slot, so tied angles need no special handling. Plain rotations
//! use the two-term rule `[f(θ+π/2) − f(θ−π/2)] / 2`. Controlled rotations
//! are rewritten as `R(θ/2) · CNOT · R(−θ/2) · CNOT` on the target; each of
//! the two half-angle rotations gets the two-term rule and a chain factor of
//! `±1/2`, giving four circuit evaluations per occurrence.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::circuits::{BoundCircuit, Perturbation};
use crate::error::Result;
use crate::qstate::{GateKind, Slot};

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumJacobian {
    /// `by_param[i][j] = ∂⟨Z_i⟩/∂θ_j`.
    pub by_param: Vec<Vec<f64>>,
    /// `by_input[i][j] = ∂⟨Z_i⟩/∂x_j`, inputs in radians.
    pub by_input: Vec<Vec<f64>>,
}

impl QuantumJacobian {
    fn zeros(num_qubits: usize, num_params: usize, num_inputs: usize) -> Self {
        QuantumJacobian {
            by_param: vec![vec![0.0; num_params]; num_qubits],
            by_input: vec![vec![0.0; num_inputs]; num_qubits],
        }
    }
}

/// Full Jacobian by parameter shift. Occurrences are evaluated in parallel;
/// accumulation happens afterwards in gate order, so results do not depend
/// on the thread count.
pub fn parameter_shift_jacobian(bound: &BoundCircuit<'_>) -> Result<QuantumJacobian> {
    let template = bound.template();
    let occurrences: Vec<(usize, Slot, GateKind)> = template
        .gates()
        .iter()
        .enumerate()
        .filter_map(|(k, g)| g.slot.map(|s| (k, s, g.kind)))
        .collect();

    let columns = occurrences
        .par_iter()
        .map(|&(k, _, kind)| occurrence_derivative(bound, k, kind))
        .collect::<Result<Vec<_>>>()?;

    let mut jac = QuantumJacobian::zeros(
        template.num_qubits(),
        template.num_params(),
        template.num_inputs(),
    );
    for ((_, slot, _), column) in occurrences.iter().zip(&columns) {
        for (i, d) in column.iter().enumerate() {
            match *slot {
                Slot::Param(j) => jac.by_param[i][j] += d,
                Slot::Input(j) => jac.by_input[i][j] += d,
            }
        }
    }
    Ok(jac)
}

/// `∂⟨Z_i⟩/∂(angle of gate k)` for every qubit `i`.
fn occurrence_derivative(bound: &BoundCircuit<'_>, k: usize, kind: GateKind) -> Result<Vec<f64>> {
    let eval = |p: Perturbation| -> Result<Vec<f64>> {
        Ok(bound.run_perturbed(Some((k, p)))?.expectation_z_all())
    };
    match kind {
        GateKind::Cry | GateKind::Crz => {
            let outer_plus = eval(Perturbation::Decomposed {
                outer: FRAC_PI_2,
                inner: 0.0,
            })?;
            let outer_minus = eval(Perturbation::Decomposed {
                outer: -FRAC_PI_2,
                inner: 0.0,
            })?;
            let inner_plus = eval(Perturbation::Decomposed {
                outer: 0.0,
                inner: FRAC_PI_2,
            })?;
            let inner_minus = eval(Perturbation::Decomposed {
                outer: 0.0,
                inner: -FRAC_PI_2,
            })?;
            Ok((0..outer_plus.len())
                .map(|i| {
                    0.25 * (outer_plus[i] - outer_minus[i])
                        - 0.25 * (inner_plus[i] - inner_minus[i])
                })
                .collect())
        }
        _ => {
            let plus = eval(Perturbation::Shift(FRAC_PI_2))?;
            let minus = eval(Perturbation::Shift(-FRAC_PI_2))?;
            Ok(plus
                .iter()
                .zip(&minus)
                .map(|(p, m)| 0.5 * (p - m))
                .collect())
        }
    }
}
