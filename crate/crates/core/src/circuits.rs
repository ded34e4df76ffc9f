//! Parameterized circuit templates and angle embedding.
//!
//! A [`CircuitTemplate`] is an ordered gate list whose rotation angles are
//! read from two disjoint slot spaces: trainable parameters and embedded
//! inputs. The built-in families all open with one `RY(input q)` per qubit,
//! followed by `layers` repetitions of the family's layer:
//!
//! | family | layer                                        | trainable slots      |
//! |--------|----------------------------------------------|----------------------|
//! | vqc1   | RY each, RZ each, CNOT ring                  | `2·n·L`              |
//! | vqc2   | RY each, CNOT chain `i → i+1`                | `n·L`                |
//! | vqc3   | RY each, CRZ ring                            | `(n + ring(n))·L`    |
//! | vqc4   | RX each, RZ each, CZ ring                    | `2·n·L`              |
//! | vqc5   | RY each, CNOT `i → j` for every `j > i`      | `n·L`                |
//! | vqc6   | RY each                                      | `n·L`                |
//!
//! `ring(n)` is `n` edges `i → (i+1) mod n` for `n ≥ 3`, and the single
//! edge `0 → 1` for `n = 2`.
//!
//! The family ids mirror the six circuit ids of the original experiment
//! table. The original gate diagrams were not recoverable, so these layouts
//! are a fresh definition that spans entangler-free to densely entangling
//! circuits.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{GateKind, GateOp, Slot, Statevector};

/// Default scale from tanh-bounded features to rotation angles.
pub const EMBEDDING_SCALE: f64 = FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemplateFamily {
    Vqc1,
    Vqc2,
    Vqc3,
    Vqc4,
    Vqc5,
    Vqc6,
}

impl TemplateFamily {
    pub const ALL: [TemplateFamily; 6] = [
        TemplateFamily::Vqc1,
        TemplateFamily::Vqc2,
        TemplateFamily::Vqc3,
        TemplateFamily::Vqc4,
        TemplateFamily::Vqc5,
        TemplateFamily::Vqc6,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TemplateFamily::Vqc1 => "vqc1",
            TemplateFamily::Vqc2 => "vqc2",
            TemplateFamily::Vqc3 => "vqc3",
            TemplateFamily::Vqc4 => "vqc4",
            TemplateFamily::Vqc5 => "vqc5",
            TemplateFamily::Vqc6 => "vqc6",
        }
    }

    pub fn is_entangling(self) -> bool {
        self != TemplateFamily::Vqc6
    }

    fn valid_names() -> String {
        Self::ALL
            .iter()
            .map(|f| f.name())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for TemplateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TemplateFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::UnknownTemplate {
                name: s.to_string(),
                valid: Self::valid_names(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTemplate", into = "RawTemplate")]
pub struct CircuitTemplate {
    id: String,
    num_qubits: usize,
    gates: Vec<GateOp>,
    num_params: usize,
    num_inputs: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTemplate {
    id: String,
    num_qubits: usize,
    num_params: usize,
    num_inputs: usize,
    gates: Vec<GateOp>,
}

impl TryFrom<RawTemplate> for CircuitTemplate {
    type Error = Error;

    fn try_from(raw: RawTemplate) -> Result<Self> {
        let t = CircuitTemplate::new(raw.id, raw.num_qubits, raw.gates)?;
        if t.num_params != raw.num_params || t.num_inputs != raw.num_inputs {
            return Err(Error::InvalidTemplate(format!(
                "declared slot counts ({}, {}) disagree with gates ({}, {})",
                raw.num_params, raw.num_inputs, t.num_params, t.num_inputs
            )));
        }
        Ok(t)
    }
}

impl From<CircuitTemplate> for RawTemplate {
    fn from(t: CircuitTemplate) -> Self {
        RawTemplate {
            id: t.id,
            num_qubits: t.num_qubits,
            num_params: t.num_params,
            num_inputs: t.num_inputs,
            gates: t.gates,
        }
    }
}

impl CircuitTemplate {
    /// Builds a template from an explicit gate list. Slot counts are derived
    /// from the gates; each slot space must be used contiguously from 0.
    pub fn new(id: impl Into<String>, num_qubits: usize, gates: Vec<GateOp>) -> Result<Self> {
        if num_qubits == 0 || num_qubits > crate::qstate::MAX_QUBITS {
            return Err(Error::QubitCount(num_qubits));
        }
        let mut params_seen = Vec::new();
        let mut inputs_seen = Vec::new();
        for (k, g) in gates.iter().enumerate() {
            g.validate(num_qubits)
                .map_err(|e| Error::InvalidTemplate(format!("gate {k}: {e}")))?;
            let (seen, idx) = match g.slot {
                Some(Slot::Param(i)) => (&mut params_seen, i),
                Some(Slot::Input(i)) => (&mut inputs_seen, i),
                None => continue,
            };
            if seen.len() <= idx {
                seen.resize(idx + 1, false);
            }
            seen[idx] = true;
        }
        for (space, seen) in [("param", &params_seen), ("input", &inputs_seen)] {
            if let Some(gap) = seen.iter().position(|used| !used) {
                return Err(Error::InvalidTemplate(format!(
                    "{space} slot {gap} is never referenced"
                )));
            }
        }
        Ok(CircuitTemplate {
            id: id.into(),
            num_qubits,
            gates,
            num_params: params_seen.len(),
            num_inputs: inputs_seen.len(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("template serializes")
    }

    /// Human-readable gate listing.
    pub fn describe(&self) -> String {
        let mut out = format!(
            "template {}: {} qubits, {} gates, {} trainable slots, {} input slots\n",
            self.id,
            self.num_qubits,
            self.gates.len(),
            self.num_params,
            self.num_inputs
        );
        for (k, g) in self.gates.iter().enumerate() {
            let wires = match g.control {
                Some(c) => format!("q{c} -> q{}", g.target),
                None => format!("q{}", g.target),
            };
            let slot = match g.slot {
                Some(Slot::Param(i)) => format!(" theta[{i}]"),
                Some(Slot::Input(i)) => format!(" x[{i}]"),
                None => String::new(),
            };
            out.push_str(&format!("{k:>4}  {:<4} {wires}{slot}\n", g.kind.name()));
        }
        out
    }
}

fn ring_edges(n: usize) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        _ => (0..n).map(|i| (i, (i + 1) % n)).collect(),
    }
}

/// Instantiates one of the built-in families.
pub fn builtin_template(
    family: TemplateFamily,
    num_qubits: usize,
    layers: usize,
) -> Result<CircuitTemplate> {
    if layers == 0 {
        return Err(Error::InvalidArgument("layers must be >= 1".into()));
    }
    if family.is_entangling() && num_qubits < 2 {
        return Err(Error::InvalidArgument(format!(
            "{family} needs at least 2 qubits, got {num_qubits}"
        )));
    }
    let n = num_qubits;
    let mut gates: Vec<GateOp> = (0..n)
        .map(|q| GateOp::rotation(GateKind::Ry, q, Slot::Input(q)))
        .collect();
    let mut next = 0usize;
    let mut slot = || {
        next += 1;
        Slot::Param(next - 1)
    };
    for _ in 0..layers {
        match family {
            TemplateFamily::Vqc1 => {
                gates.extend((0..n).map(|q| GateOp::rotation(GateKind::Ry, q, slot())));
                gates.extend((0..n).map(|q| GateOp::rotation(GateKind::Rz, q, slot())));
                gates.extend(
                    ring_edges(n)
                        .into_iter()
                        .map(|(c, t)| GateOp::controlled(GateKind::Cnot, c, t)),
                );
            }
            TemplateFamily::Vqc2 => {
                gates.extend((0..n).map(|q| GateOp::rotation(GateKind::Ry, q, slot())));
                gates.extend((0..n - 1).map(|q| GateOp::controlled(GateKind::Cnot, q, q + 1)));
            }
            TemplateFamily::Vqc3 => {
                gates.extend((0..n).map(|q| GateOp::rotation(GateKind::Ry, q, slot())));
                for (c, t) in ring_edges(n) {
                    gates.push(GateOp::controlled_rotation(GateKind::Crz, c, t, slot()));
                }
            }
            TemplateFamily::Vqc4 => {
                gates.extend((0..n).map(|q| GateOp::rotation(GateKind::Rx, q, slot())));
                gates.extend((0..n).map(|q| GateOp::rotation(GateKind::Rz, q, slot())));
                gates.extend(
                    ring_edges(n)
                        .into_iter()
                        .map(|(c, t)| GateOp::controlled(GateKind::Cz, c, t)),
                );
            }
            TemplateFamily::Vqc5 => {
                gates.extend((0..n).map(|q| GateOp::rotation(GateKind::Ry, q, slot())));
                for i in 0..n {
                    for j in i + 1..n {
                        gates.push(GateOp::controlled(GateKind::Cnot, i, j));
                    }
                }
            }
            TemplateFamily::Vqc6 => {
                gates.extend((0..n).map(|q| GateOp::rotation(GateKind::Ry, q, slot())));
            }
        }
    }
    CircuitTemplate::new(format!("{family}-q{n}-l{layers}"), n, gates)
}

/// Maps tanh-bounded features to angles in `(-π/2, π/2)`.
pub fn embed_inputs(features: &[f64]) -> Result<Vec<f64>> {
    embed_inputs_scaled(features, EMBEDDING_SCALE)
}

pub fn embed_inputs_scaled(features: &[f64], scale: f64) -> Result<Vec<f64>> {
    features
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            if value.abs() < 1.0 {
                Ok(value * scale)
            } else {
                Err(Error::EmbeddingRange { index, value })
            }
        })
        .collect()
}

/// Modification of a single gate occurrence, used by the gradient engine.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Perturbation {
    /// Add to the gate's angle.
    Shift(f64),
    /// Replace a controlled rotation `CR(θ)` by
    /// `R(θ/2 + outer) · CNOT · R(−θ/2 + inner) · CNOT` on the target.
    Decomposed { outer: f64, inner: f64 },
}

/// A template together with concrete parameter and input angles.
#[derive(Debug, Clone, Copy)]
pub struct BoundCircuit<'a> {
    template: &'a CircuitTemplate,
    params: &'a [f64],
    inputs: &'a [f64],
}

impl<'a> BoundCircuit<'a> {
    pub fn new(
        template: &'a CircuitTemplate,
        params: &'a [f64],
        inputs: &'a [f64],
    ) -> Result<Self> {
        if params.len() != template.num_params {
            return Err(Error::DimensionMismatch {
                expected: template.num_params,
                actual: params.len(),
            });
        }
        if inputs.len() != template.num_inputs {
            return Err(Error::DimensionMismatch {
                expected: template.num_inputs,
                actual: inputs.len(),
            });
        }
        Ok(BoundCircuit {
            template,
            params,
            inputs,
        })
    }

    pub fn template(&self) -> &'a CircuitTemplate {
        self.template
    }

    pub fn params(&self) -> &'a [f64] {
        self.params
    }

    pub fn inputs(&self) -> &'a [f64] {
        self.inputs
    }

    pub fn angle(&self, slot: Slot) -> f64 {
        match slot {
            Slot::Param(i) => self.params[i],
            Slot::Input(i) => self.inputs[i],
        }
    }

    /// Simulates the circuit from `|0…0⟩`.
    pub fn run(&self) -> Result<Statevector> {
        self.run_perturbed(None)
    }

    /// `⟨Z_i⟩` for every qubit.
    pub fn measure_outputs(&self) -> Result<Vec<f64>> {
        Ok(self.run()?.expectation_z_all())
    }

    pub(crate) fn run_perturbed(
        &self,
        perturb: Option<(usize, Perturbation)>,
    ) -> Result<Statevector> {
        let mut state = Statevector::zero(self.template.num_qubits)?;
        for (k, gate) in self.template.gates.iter().enumerate() {
            let angle = gate.slot.map(|s| self.angle(s));
            match perturb {
                Some((at, p)) if at == k => apply_perturbed(&mut state, gate, angle, p)?,
                _ => state.apply_gate_in_place(gate, angle)?,
            }
        }
        Ok(state)
    }
}

fn apply_perturbed(
    state: &mut Statevector,
    gate: &GateOp,
    angle: Option<f64>,
    p: Perturbation,
) -> Result<()> {
    let theta = angle.ok_or(Error::MissingAngle {
        kind: gate.kind.name(),
    })?;
    match p {
        Perturbation::Shift(s) => state.apply_gate_in_place(gate, Some(theta + s)),
        Perturbation::Decomposed { outer, inner } => {
            let (control, rot) = match (gate.kind, gate.control) {
                (GateKind::Cry, Some(c)) => (c, GateKind::Ry),
                (GateKind::Crz, Some(c)) => (c, GateKind::Rz),
                _ => {
                    return Err(Error::InvalidGate(format!(
                        "{} has no controlled-rotation decomposition",
                        gate.kind
                    )))
                }
            };
            let cnot = GateOp::controlled(GateKind::Cnot, control, gate.target);
            let r = GateOp::single(rot, gate.target);
            state.apply_gate_in_place(&cnot, None)?;
            state.apply_gate_in_place(&r, Some(-theta / 2.0 + inner))?;
            state.apply_gate_in_place(&cnot, None)?;
            state.apply_gate_in_place(&r, Some(theta / 2.0 + outer))
        }
    }
}

/// Free-function form of [`BoundCircuit::run`].
pub fn run(bound: &BoundCircuit<'_>) -> Result<Statevector> {
    bound.run()
}

pub fn measure_outputs(bound: &BoundCircuit<'_>) -> Result<Vec<f64>> {
    bound.measure_outputs()
}
