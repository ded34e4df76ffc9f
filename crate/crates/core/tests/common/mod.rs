//! Independent oracles shared by the integration tests. Nothing here calls
//! into the simulator's gate kernels.
#![allow(dead_code)]

use hqc::circuits::{builtin_template, BoundCircuit, CircuitTemplate, TemplateFamily};
use hqc::qstate::{GateKind, GateOp};
use num_complex::Complex64 as C;
use rand::Rng;

pub type Matrix = Vec<Vec<C>>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// The 2×2 matrix acting on the target wire, written out from the gate
/// definitions (half-angle rotations).
pub fn single_matrix(kind: GateKind, angle: f64) -> [[C; 2]; 2] {
    let (s, co) = (angle / 2.0).sin_cos();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        GateKind::Rx => [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]],
        GateKind::Ry | GateKind::Cry => [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]],
        GateKind::Rz | GateKind::Crz => [[c(co, -s), c(0.0, 0.0)], [c(0.0, 0.0), c(co, s)]],
        GateKind::H => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
        GateKind::X | GateKind::Cnot => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        GateKind::Z | GateKind::Cz => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
    }
}

fn to_matrix(m: [[C; 2]; 2]) -> Matrix {
    m.iter().map(|r| r.to_vec()).collect()
}

fn identity(dim: usize) -> Matrix {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| c(f64::from(u8::from(i == j)), 0.0))
                .collect()
        })
        .collect()
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn kron_all(factors: &[Matrix]) -> Matrix {
    factors[1..]
        .iter()
        .fold(factors[0].clone(), |acc, f| kron(&acc, f))
}

fn add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

/// Full `2^n × 2^n` operator; qubit 0 is the leftmost Kronecker factor.
pub fn full_matrix(n: usize, gate: &GateOp, angle: f64) -> Matrix {
    let u = to_matrix(single_matrix(gate.kind, angle));
    match gate.control {
        None => kron_all(
            &(0..n)
                .map(|q| {
                    if q == gate.target {
                        u.clone()
                    } else {
                        identity(2)
                    }
                })
                .collect::<Vec<_>>(),
        ),
        Some(ctl) => {
            let p0 = to_matrix([[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 0.0)]]);
            let p1 = to_matrix([[c(0.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]);
            let idle: Vec<Matrix> = (0..n)
                .map(|q| if q == ctl { p0.clone() } else { identity(2) })
                .collect();
            let active: Vec<Matrix> = (0..n)
                .map(|q| match q {
                    _ if q == ctl => p1.clone(),
                    _ if q == gate.target => u.clone(),
                    _ => identity(2),
                })
                .collect();
            add(&kron_all(&idle), &kron_all(&active))
        }
    }
}

pub fn matvec(m: &Matrix, v: &[C]) -> Vec<C> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub const ALL_KINDS: [GateKind; 10] = [
    GateKind::Rx,
    GateKind::Ry,
    GateKind::Rz,
    GateKind::H,
    GateKind::X,
    GateKind::Z,
    GateKind::Cnot,
    GateKind::Cz,
    GateKind::Cry,
    GateKind::Crz,
];

/// A random gate valid on `n` qubits, with an angle for rotations.
pub fn random_gate<R: Rng>(rng: &mut R, n: usize) -> (GateOp, Option<f64>) {
    use hqc::qstate::Slot;
    let pool: Vec<GateKind> = ALL_KINDS
        .into_iter()
        .filter(|k| n >= 2 || !k.is_two_qubit())
        .collect();
    let kind = pool[rng.random_range(0..pool.len())];
    let target = rng.random_range(0..n);
    let angle = rng.random_range(-7.0..7.0);
    let mut control = || {
        let mut ctl = rng.random_range(0..n - 1);
        if ctl >= target {
            ctl += 1;
        }
        ctl
    };
    match (kind.is_two_qubit(), kind.is_rotation()) {
        (false, false) => (GateOp::single(kind, target), None),
        (false, true) => (GateOp::rotation(kind, target, Slot::Param(0)), Some(angle)),
        (true, false) => (GateOp::controlled(kind, control(), target), None),
        (true, true) => (
            GateOp::controlled_rotation(kind, control(), target, Slot::Param(0)),
            Some(angle),
        ),
    }
}

/// A random normalized amplitude vector.
pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> Vec<C> {
    let v: Vec<C> = (0..1usize << n)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|a| a / norm).collect()
}

pub fn max_abs_diff(a: &[C], b: &[C]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Central difference of every output with respect to entry `i` of `x`.
pub fn central_difference<F>(f: F, x: &[f64], i: usize, h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut plus = x.to_vec();
    let mut minus = x.to_vec();
    plus[i] += h;
    minus[i] -= h;
    let (fp, fm) = (f(&plus), f(&minus));
    fp.iter()
        .zip(&fm)
        .map(|(a, b)| (a - b) / (2.0 * h))
        .collect()
}

/// Fraction of (positive, negative) pairs ranked correctly, ties counted ½.
pub fn pairwise_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if labels[i] != 1 {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] != 0 {
                continue;
            }
            den += 1.0;
            if si > sj {
                num += 1.0;
            } else if si == sj {
                num += 0.5;
            }
        }
    }
    num / den
}

/// Trainable-slot count of a built-in family, from its layer recipe.
pub fn expected_param_count(family: TemplateFamily, n: usize, layers: usize) -> usize {
    let ring = match n {
        0 | 1 => 0,
        2 => 1,
        _ => n,
    };
    let per_layer = match family {
        TemplateFamily::Vqc1 | TemplateFamily::Vqc4 => 2 * n,
        TemplateFamily::Vqc2 | TemplateFamily::Vqc5 | TemplateFamily::Vqc6 => n,
        TemplateFamily::Vqc3 => n + ring,
    };
    per_layer * layers
}

pub fn random_template<R: Rng>(
    rng: &mut R,
    max_qubits: usize,
    max_layers: usize,
) -> CircuitTemplate {
    let family = TemplateFamily::ALL[rng.random_range(0..TemplateFamily::ALL.len())];
    let lo = if family.is_entangling() { 2 } else { 1 };
    let n = rng.random_range(lo..=max_qubits);
    let layers = rng.random_range(1..=max_layers);
    builtin_template(family, n, layers).unwrap()
}

pub fn random_angles<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-3.2..3.2)).collect()
}

/// Embedded-input angles in the open interval `(-π/2, π/2)`.
pub fn random_inputs<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-1.5..1.5)).collect()
}

pub fn outputs(template: &CircuitTemplate, params: &[f64], inputs: &[f64]) -> Vec<f64> {
    BoundCircuit::new(template, params, inputs)
        .unwrap()
        .measure_outputs()
        .unwrap()
}
