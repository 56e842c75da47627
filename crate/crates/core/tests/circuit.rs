mod common;

use common::*;
use qreservoir::circuit::{apply_layer, build_layer, export_qasm, format_angle, SubsystemLayout};
use qreservoir::quantum::{ComplexMatrix, DensityMatrix, UnitaryGate};

/// Full-register layer operator: the product of each gate's full matrix.
fn layer_operator(u: f64, layout: &SubsystemLayout, a: f64) -> ComplexMatrix {
    let n = layout.num_qubits();
    build_layer(u, layout, a)
        .unwrap()
        .gates()
        .iter()
        .fold(ComplexMatrix::identity(1 << n), |acc, g| {
            embed(g.matrix(), g.targets(), n).matmul(&acc).unwrap()
        })
}

#[test]
fn two_layers_match_brute_force() {
    let layout = SubsystemLayout::adjacent(2).unwrap();
    let mut rho = DensityMatrix::plus_state(2).unwrap();
    let mut oracle = rho.matrix().clone();
    for u in [0.1, 0.1] {
        rho = apply_layer(&rho, &build_layer(u, &layout, 2.0).unwrap()).unwrap();
        oracle = conjugate(&layer_operator(u, &layout, 2.0), &oracle);
    }
    assert_close(rho.matrix(), &oracle, 1e-12);
    for q in 0..2 {
        assert!((rho.pauli_z_expectations()[q] - naive_z(&oracle, q)).abs() < 1e-12);
    }
}

#[test]
fn layer_matches_textbook_block_on_random_state() {
    // U = CX · RZ_j · CX · RX_i · RX_j, written as explicit 4×4 matrices.
    let s = 0.7;
    let rx = UnitaryGate::rx(0, s).matrix().clone();
    let rz = UnitaryGate::rz(0, s).matrix().clone();
    let id = ComplexMatrix::identity(2);
    let cx = UnitaryGate::cx(0, 1).unwrap().matrix().clone();
    // Local index: qubit 0 is the high bit, matching embed's convention for targets [0, 1].
    let u = cx
        .matmul(&id.kron(&rz))
        .unwrap()
        .matmul(&cx)
        .unwrap()
        .matmul(&rx.kron(&rx))
        .unwrap();
    let full = embed(&u, &[0, 1], 2);
    let rho = random_density(2, 5);
    let layer = build_layer(s, &SubsystemLayout::adjacent(2).unwrap(), 1.0).unwrap();
    assert_close(apply_layer(&rho, &layer).unwrap().matrix(), &conjugate(&full, rho.matrix()), 1e-12);
}

#[test]
fn custom_pairing_is_respected() {
    let layout = SubsystemLayout::new(4, vec![(3, 0), (2, 1)]).unwrap();
    let rho = random_density(4, 8);
    let out = apply_layer(&rho, &build_layer(0.4, &layout, 2.0).unwrap()).unwrap();
    assert_close(out.matrix(), &conjugate(&layer_operator(0.4, &layout, 2.0), rho.matrix()), 1e-12);
}

#[test]
fn qasm_gate_count_formula() {
    let layout = SubsystemLayout::adjacent(6).unwrap();
    let inputs: Vec<f64> = (0..7).map(|k| 0.05 * k as f64).collect();
    for k in 1..=inputs.len() {
        let text = export_qasm(&inputs[..k], &layout, 2.0).unwrap();
        let body: Vec<&str> = text
            .lines()
            .skip(4)
            .take_while(|l| !l.starts_with("measure"))
            .collect();
        assert_eq!(body.len(), 6 + 5 * 3 * k);
        assert_eq!(text.lines().filter(|l| l.starts_with("measure")).count(), 6);
    }
}

/// Minimal interpreter for the emitted subset of OpenQASM.
fn simulate_qasm(text: &str, n: usize) -> ComplexMatrix {
    let mut rho = DensityMatrix::basis_state(n, 0).unwrap().into_matrix();
    let qubit = |s: &str| -> usize {
        s.trim().trim_end_matches(';').trim_start_matches("q[").trim_end_matches(']').parse().unwrap()
    };
    for line in text.lines() {
        let gate = if let Some(rest) = line.strip_prefix("h ") {
            UnitaryGate::hadamard(qubit(rest))
        } else if let Some(rest) = line.strip_prefix("cx ") {
            let (a, b) = rest.split_once(',').unwrap();
            UnitaryGate::cx(qubit(a), qubit(b)).unwrap()
        } else if line.starts_with("rx(") || line.starts_with("rz(") {
            let open = line.find('(').unwrap();
            let close = line.find(')').unwrap();
            let angle: f64 = line[open + 1..close].parse().unwrap();
            let q = qubit(&line[close + 1..]);
            if line.starts_with("rx") {
                UnitaryGate::rx(q, angle)
            } else {
                UnitaryGate::rz(q, angle)
            }
        } else {
            continue;
        };
        rho = conjugate(&embed(gate.matrix(), gate.targets(), n), &rho);
    }
    rho
}

#[test]
fn qasm_replays_to_the_simulated_state() {
    let layout = SubsystemLayout::adjacent(4).unwrap();
    let inputs = [0.1, 0.1835, -0.02, 1.0 / 3.0];
    let text = export_qasm(&inputs, &layout, 2.0).unwrap();
    let mut rho = DensityMatrix::plus_state(4).unwrap();
    for &u in &inputs {
        rho = apply_layer(&rho, &build_layer(u, &layout, 2.0).unwrap()).unwrap();
    }
    assert_close(&simulate_qasm(&text, 4), rho.matrix(), 1e-12);
}

#[test]
fn angle_text_is_exact() {
    for x in [0.2 * 0.1, 2.0 * 0.10078, std::f64::consts::PI * -0.0417, 1e-300] {
        assert_eq!(format_angle(x).parse::<f64>().unwrap(), x);
    }
    assert_eq!(format_angle(0.0), "0");
}
