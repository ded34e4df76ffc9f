//! Dense statevector simulation.
//!
//! Amplitudes are stored big-endian: qubit 0 is the most significant bit of
//! the basis-state index, so for two qubits `|10⟩` lives at index 2.
//!
//! Gates are applied in place by pairing amplitudes that differ only in the
//! target bit; no `2^n × 2^n` matrix is ever built.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Resource guard on the dense representation.
pub const MAX_QUBITS: usize = 20;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    H,
    X,
    Z,
    Cnot,
    Cz,
    Cry,
    Crz,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Cry => "CRY",
            GateKind::Crz => "CRZ",
        }
    }

    pub fn is_rotation(self) -> bool {
        matches!(
            self,
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Cry | GateKind::Crz
        )
    }

    pub fn is_two_qubit(self) -> bool {
        matches!(
            self,
            GateKind::Cnot | GateKind::Cz | GateKind::Cry | GateKind::Crz
        )
    }

    /// The single-qubit block acting on the target (conditioned on the
    /// control for two-qubit kinds).
    pub fn target_block(self, angle: f64) -> [[Complex64; 2]; 2] {
        let (s, c) = (angle / 2.0).sin_cos();
        match self {
            GateKind::Rx => [
                [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
            ],
            GateKind::Ry | GateKind::Cry => [
                [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
            ],
            GateKind::Rz | GateKind::Crz => {
                [[Complex64::new(c, -s), ZERO], [ZERO, Complex64::new(c, s)]]
            }
            GateKind::H => {
                let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                [[r, r], [r, -r]]
            }
            GateKind::X | GateKind::Cnot => [[ZERO, ONE], [ONE, ZERO]],
            GateKind::Z | GateKind::Cz => [[ONE, ZERO], [ZERO, -ONE]],
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a rotation gate reads its angle from. Trainable parameters and
/// embedded inputs live in disjoint index spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "space", content = "index")]
pub enum Slot {
    Param(usize),
    Input(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateOp {
    pub kind: GateKind,
    pub target: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<Slot>,
}

impl GateOp {
    pub fn single(kind: GateKind, target: usize) -> Self {
        GateOp {
            kind,
            target,
            control: None,
            slot: None,
        }
    }

    pub fn rotation(kind: GateKind, target: usize, slot: Slot) -> Self {
        GateOp {
            kind,
            target,
            control: None,
            slot: Some(slot),
        }
    }

    pub fn controlled(kind: GateKind, control: usize, target: usize) -> Self {
        GateOp {
            kind,
            target,
            control: Some(control),
            slot: None,
        }
    }

    pub fn controlled_rotation(kind: GateKind, control: usize, target: usize, slot: Slot) -> Self {
        GateOp {
            kind,
            target,
            control: Some(control),
            slot: Some(slot),
        }
    }

    /// Checks the structural invariants of the op against a register width.
    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        self.check_wiring(num_qubits)?;
        match (self.kind.is_rotation(), self.slot) {
            (true, None) => Err(Error::InvalidGate(format!(
                "{} on qubit {} has no angle slot",
                self.kind, self.target
            ))),
            (false, Some(_)) => Err(Error::InvalidGate(format!(
                "{} on qubit {} cannot carry an angle slot",
                self.kind, self.target
            ))),
            _ => Ok(()),
        }
    }

    /// Qubit indices and control presence only; slots are not inspected.
    pub fn check_wiring(&self, num_qubits: usize) -> Result<()> {
        if self.target >= num_qubits {
            return Err(Error::QubitIndex {
                index: self.target,
                num_qubits,
            });
        }
        match (self.kind.is_two_qubit(), self.control) {
            (true, None) => {
                return Err(Error::InvalidGate(format!(
                    "{} requires a control qubit",
                    self.kind
                )))
            }
            (false, Some(_)) => {
                return Err(Error::InvalidGate(format!(
                    "{} does not take a control qubit",
                    self.kind
                )))
            }
            (true, Some(c)) => {
                if c >= num_qubits {
                    return Err(Error::QubitIndex {
                        index: c,
                        num_qubits,
                    });
                }
                if c == self.target {
                    return Err(Error::InvalidGate(format!(
                        "{} control and target are both qubit {c}",
                        self.kind
                    )));
                }
            }
            (false, None) => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

/// `|0…0⟩` on `num_qubits` qubits.
pub fn init_zero(num_qubits: usize) -> Result<Statevector> {
    Statevector::zero(num_qubits)
}

impl Statevector {
    pub fn zero(num_qubits: usize) -> Result<Self> {
        check_width(num_qubits)?;
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[0] = ONE;
        Ok(Statevector {
            num_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes. The length must be a power of two and the
    /// vector must be normalized to within 1e-9.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_width(num_qubits)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "amplitudes have squared norm {norm}, expected 1"
            )));
        }
        Ok(Statevector {
            num_qubits,
            amplitudes,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Returns a new state with `gate` applied; `self` is left untouched.
    pub fn apply_gate(&self, gate: &GateOp, angle: Option<f64>) -> Result<Statevector> {
        let mut out = self.clone();
        out.apply_gate_in_place(gate, angle)?;
        Ok(out)
    }

    pub fn apply_gate_in_place(&mut self, gate: &GateOp, angle: Option<f64>) -> Result<()> {
        gate.check_wiring(self.num_qubits)?;
        let angle = match (gate.kind.is_rotation(), angle) {
            (true, Some(a)) => a,
            (true, None) => {
                return Err(Error::MissingAngle {
                    kind: gate.kind.name(),
                })
            }
            (false, Some(_)) => {
                return Err(Error::SuperfluousAngle {
                    kind: gate.kind.name(),
                })
            }
            (false, None) => 0.0,
        };
        let block = gate.kind.target_block(angle);
        self.apply_block(gate.target, gate.control, &block);
        Ok(())
    }

    /// Applies a 2×2 block to `target`, optionally conditioned on `control`
    /// being `|1⟩`. Indices must already be validated.
    pub(crate) fn apply_block(
        &mut self,
        target: usize,
        control: Option<usize>,
        m: &[[Complex64; 2]; 2],
    ) {
        let t_mask = self.bit_mask(target);
        let c_mask = control.map_or(0, |c| self.bit_mask(c));
        let dim = self.amplitudes.len();
        // Walk blocks of size 2*t_mask; the lower half has the target bit clear.
        let stride = t_mask << 1;
        let mut base = 0;
        while base < dim {
            for i in base..base + t_mask {
                if i & c_mask != c_mask {
                    continue;
                }
                let j = i | t_mask;
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[j];
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[j] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += stride;
        }
    }

    /// Exact `⟨Z⟩` on one qubit.
    pub fn expectation_z(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = self.bit_mask(qubit);
        let value = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if i & mask == 0 {
                    a.norm_sqr()
                } else {
                    -a.norm_sqr()
                }
            })
            .sum::<f64>();
        Ok(value.clamp(-1.0, 1.0))
    }

    /// `⟨Z_i⟩` for every qubit, in qubit order.
    pub fn expectation_z_all(&self) -> Vec<f64> {
        let n = self.num_qubits;
        let mut out = vec![0.0; n];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            for (q, acc) in out.iter_mut().enumerate() {
                if i & (1 << (n - 1 - q)) == 0 {
                    *acc += p;
                } else {
                    *acc -= p;
                }
            }
        }
        out.iter_mut().for_each(|v| *v = v.clamp(-1.0, 1.0));
        out
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &Statevector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                actual: other.num_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Statevector) -> Result<f64> {
        Ok(self.inner_product(other)?.norm_sqr())
    }

    fn bit_mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            Err(Error::QubitIndex {
                index: qubit,
                num_qubits: self.num_qubits,
            })
        } else {
            Ok(())
        }
    }
}

/// Free-function form of [`Statevector::apply_gate`].
pub fn apply_gate(state: &Statevector, gate: &GateOp, angle: Option<f64>) -> Result<Statevector> {
    state.apply_gate(gate, angle)
}

pub fn expectation_z(state: &Statevector, qubit: usize) -> Result<f64> {
    state.expectation_z(qubit)
}

pub fn inner_product(a: &Statevector, b: &Statevector) -> Result<Complex64> {
    a.inner_product(b)
}

fn check_width(num_qubits: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&num_qubits) {
        Ok(())
    } else {
        Err(Error::QubitCount(num_qubits))
    }
}
