mod common;

use common::*;
use hqc::circuits::{builtin_template, BoundCircuit, CircuitTemplate, TemplateFamily};
use hqc::gradients::parameter_shift_jacobian;
use hqc::qstate::{GateOp, Slot};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H: f64 = 1e-5;

/// Random gate list where rotation angles are drawn from a small pool of
/// slots, so some slots are shared by several gates. Also returns the same
/// circuit with every occurrence given its own slot, and the map from
/// those slots back to the shared ones.
fn tied_circuit(rng: &mut ChaCha8Rng) -> (CircuitTemplate, CircuitTemplate, Vec<usize>) {
    let n = rng.random_range(1..=4);
    let len = rng.random_range(2..=14);
    let pool = rng.random_range(1..=3);
    let mut gates: Vec<GateOp> = Vec::new();
    let mut raw_slots = Vec::new();
    while gates.len() < len {
        let (mut g, angle) = random_gate(rng, n);
        if angle.is_some() {
            let s = rng.random_range(0..pool);
            g.slot = Some(Slot::Param(s));
            raw_slots.push(s);
        }
        gates.push(g);
    }
    // Renumber shared slots in first-use order so they are contiguous.
    let mut order: Vec<usize> = Vec::new();
    for &s in &raw_slots {
        if !order.contains(&s) {
            order.push(s);
        }
    }
    let mut tied_gates = gates.clone();
    let mut split_gates = gates;
    let mut owner = Vec::new();
    let mut next = 0;
    for (tg, sg) in tied_gates.iter_mut().zip(split_gates.iter_mut()) {
        if let Some(Slot::Param(s)) = tg.slot {
            let shared = order.iter().position(|&o| o == s).unwrap();
            tg.slot = Some(Slot::Param(shared));
            sg.slot = Some(Slot::Param(next));
            owner.push(shared);
            next += 1;
        }
    }
    (
        CircuitTemplate::new("tied", n, tied_gates).unwrap(),
        CircuitTemplate::new("split", n, split_gates).unwrap(),
        owner,
    )
}

fn assert_matches_fd(
    t: &CircuitTemplate,
    p: &[f64],
    x: &[f64],
    tol: f64,
) -> Result<(), TestCaseError> {
    let jac = parameter_shift_jacobian(&BoundCircuit::new(t, p, x).unwrap()).unwrap();
    for j in 0..p.len() {
        let fd = central_difference(|q| outputs(t, q, x), p, j, H);
        for (i, d) in fd.iter().enumerate() {
            prop_assert!(
                (jac.by_param[i][j] - d).abs() <= tol,
                "param {j} qubit {i}: {} vs {d}",
                jac.by_param[i][j]
            );
        }
    }
    for j in 0..x.len() {
        let fd = central_difference(|y| outputs(t, p, y), x, j, H);
        for (i, d) in fd.iter().enumerate() {
            prop_assert!((jac.by_input[i][j] - d).abs() <= tol, "input {j} qubit {i}");
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn builtin_templates_match_finite_differences(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_template(&mut rng, 4, 3);
        let p = random_angles(&mut rng, t.num_params());
        let x = random_inputs(&mut rng, t.num_inputs());
        assert_matches_fd(&t, &p, &x, 1e-6)?;
    }

    #[test]
    fn arbitrary_gate_mixes_match_finite_differences(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (t, _, _) = tied_circuit(&mut rng);
        let p = random_angles(&mut rng, t.num_params());
        assert_matches_fd(&t, &p, &[], 1e-6)?;
    }

    #[test]
    fn shared_slot_gradient_is_sum_over_occurrences(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (tied, split, owner) = tied_circuit(&mut rng);
        let p = random_angles(&mut rng, tied.num_params());
        let p_split: Vec<f64> = owner.iter().map(|&s| p[s]).collect();
        let jt = parameter_shift_jacobian(&BoundCircuit::new(&tied, &p, &[]).unwrap()).unwrap();
        let js = parameter_shift_jacobian(&BoundCircuit::new(&split, &p_split, &[]).unwrap()).unwrap();
        for i in 0..tied.num_qubits() {
            for s in 0..tied.num_params() {
                let summed: f64 = owner
                    .iter()
                    .enumerate()
                    .filter(|(_, &o)| o == s)
                    .map(|(k, _)| js.by_param[i][k])
                    .sum();
                prop_assert!((jt.by_param[i][s] - summed).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn unentangled_jacobian_is_block_diagonal(seed in any::<u64>(), n in 1usize..=5, layers in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = builtin_template(TemplateFamily::Vqc6, n, layers).unwrap();
        let p = random_angles(&mut rng, t.num_params());
        let x = random_inputs(&mut rng, n);
        let jac = parameter_shift_jacobian(&BoundCircuit::new(&t, &p, &x).unwrap()).unwrap();
        let mut acting = vec![usize::MAX; t.num_params()];
        for g in t.gates() {
            if let Some(Slot::Param(j)) = g.slot {
                acting[j] = g.target;
            }
        }
        for i in 0..n {
            for (j, &q) in acting.iter().enumerate() {
                if q != i {
                    prop_assert!(jac.by_param[i][j].abs() < 1e-14);
                }
            }
            for j in (0..n).filter(|&j| j != i) {
                prop_assert!(jac.by_input[i][j].abs() < 1e-14);
            }
        }
    }
}
