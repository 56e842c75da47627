//! Input-dependent reservoir layer and its OpenQASM export.
//!
//! Each subsystem pair `(i, j)` receives the block
//! `CX_{i,j} · RZ_j(s) · CX_{i,j} · RX_i(s) · RX_j(s)` with `s = a·u`.
//! Operators act right to left, so the gates are applied in the order
//! `RX_i, RX_j, CX, RZ_j, CX`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{DensityMatrix, UnitaryGate, MAX_QUBITS};

/// Disjoint qubit pairs covering the whole register.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemLayout {
    num_qubits: usize,
    pairs: Vec<(usize, usize)>,
}

impl SubsystemLayout {
    pub fn new(num_qubits: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if num_qubits == 0 || num_qubits % 2 != 0 {
            return Err(Error::InvalidLayout(format!(
                "qubit count {num_qubits} must be even and positive"
            )));
        }
        if num_qubits > MAX_QUBITS {
            return Err(Error::Capacity(format!(
                "{num_qubits} qubits exceeds {MAX_QUBITS}"
            )));
        }
        if pairs.len() * 2 != num_qubits {
            return Err(Error::InvalidLayout(format!(
                "{} pairs cannot cover {num_qubits} qubits",
                pairs.len()
            )));
        }
        let mut seen = vec![false; num_qubits];
        for &(i, j) in &pairs {
            if i == j {
                return Err(Error::InvalidLayout(format!("pair ({i},{j}) repeats a qubit")));
            }
            for q in [i, j] {
                if q >= num_qubits {
                    return Err(Error::InvalidLayout(format!(
                        "qubit {q} out of range for {num_qubits} qubits"
                    )));
                }
                if std::mem::replace(&mut seen[q], true) {
                    return Err(Error::InvalidLayout(format!("qubit {q} used twice")));
                }
            }
        }
        Ok(Self { num_qubits, pairs })
    }

    /// Pairs `(0,1), (2,3), …, (n−2, n−1)`.
    pub fn adjacent(num_qubits: usize) -> Result<Self> {
        let pairs = (0..num_qubits / 2).map(|k| (2 * k, 2 * k + 1)).collect();
        Self::new(num_qubits, pairs)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

/// Gates of one reservoir timestep.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitLayer {
    gates: Vec<UnitaryGate>,
    input_value: f64,
    scale: f64,
    num_qubits: usize,
}

impl CircuitLayer {
    pub fn gates(&self) -> &[UnitaryGate] {
        &self.gates
    }

    pub fn input_value(&self) -> f64 {
        self.input_value
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Rotation angle `s = a·u` shared by every RX/RZ in the layer.
    pub fn angle(&self) -> f64 {
        self.scale * self.input_value
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }
}

/// The five gates of one pair block, in application order.
pub fn pair_block(i: usize, j: usize, angle: f64) -> Result<[UnitaryGate; 5]> {
    Ok([
        UnitaryGate::rx(i, angle),
        UnitaryGate::rx(j, angle),
        UnitaryGate::cx(i, j)?,
        UnitaryGate::rz(j, angle),
        UnitaryGate::cx(i, j)?,
    ])
}

pub fn build_layer(u: f64, layout: &SubsystemLayout, a: f64) -> Result<CircuitLayer> {
    if !u.is_finite() || !a.is_finite() {
        return Err(Error::NonFinite(format!("input {u} or scale {a}")));
    }
    let angle = a * u;
    let mut gates = Vec::with_capacity(5 * layout.num_pairs());
    for &(i, j) in layout.pairs() {
        gates.extend(pair_block(i, j, angle)?);
    }
    Ok(CircuitLayer {
        gates,
        input_value: u,
        scale: a,
        num_qubits: layout.num_qubits(),
    })
}

/// Noiseless `U(u) ρ U(u)†` for one layer.
pub fn apply_layer(state: &DensityMatrix, layer: &CircuitLayer) -> Result<DensityMatrix> {
    if state.num_qubits() != layer.num_qubits() {
        return Err(Error::Dimension(format!(
            "layer built for {} qubits applied to {}",
            layer.num_qubits(),
            state.num_qubits()
        )));
    }
    let mut out = state.clone();
    for gate in layer.gates() {
        out.apply_unitary_mut(gate)?;
    }
    Ok(out)
}

/// Shortest text that parses back to exactly `x`.
pub fn format_angle(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

/// OpenQASM 2.0 program: Hadamard preparation, one layer per input, and a
/// terminal Z-basis measurement of every qubit.
pub fn export_qasm(inputs: &[f64], layout: &SubsystemLayout, a: f64) -> Result<String> {
    if inputs.is_empty() {
        return Err(Error::Length("export_qasm needs at least one input".into()));
    }
    let n = layout.num_qubits();
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\n");
    out.push_str("include \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{n}];");
    let _ = writeln!(out, "creg c[{n}];");
    for q in 0..n {
        let _ = writeln!(out, "h q[{q}];");
    }
    for &u in inputs {
        let layer = build_layer(u, layout, a)?;
        for gate in layer.gates() {
            let t = gate.targets();
            match gate.name() {
                "cx" => {
                    let _ = writeln!(out, "cx q[{}],q[{}];", t[0], t[1]);
                }
                name => {
                    let angle = format_angle(gate.angle().unwrap_or(0.0));
                    let _ = writeln!(out, "{name}({angle}) q[{}];", t[0]);
                }
            }
        }
    }
    for q in 0..n {
        let _ = writeln!(out, "measure q[{q}] -> c[{q}];");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_validation() {
        assert!(SubsystemLayout::new(3, vec![(0, 1)]).is_err());
        assert!(SubsystemLayout::new(4, vec![(0, 1), (1, 2)]).is_err());
        assert!(SubsystemLayout::new(4, vec![(0, 0), (2, 3)]).is_err());
        assert!(SubsystemLayout::new(4, vec![(0, 4), (2, 3)]).is_err());
        assert!(SubsystemLayout::new(4, vec![(0, 1)]).is_err());
        let l = SubsystemLayout::new(4, vec![(3, 0), (1, 2)]).unwrap();
        assert_eq!(l.num_pairs(), 2);
    }

    #[test]
    fn block_order_and_angles() {
        let layout = SubsystemLayout::adjacent(2).unwrap();
        let layer = build_layer(0.1, &layout, 2.0).unwrap();
        let names: Vec<_> = layer.gates().iter().map(|g| g.name()).collect();
        assert_eq!(names, ["rx", "rx", "cx", "rz", "cx"]);
        assert_eq!(layer.gates()[0].targets(), &[0]);
        assert_eq!(layer.gates()[1].targets(), &[1]);
        assert_eq!(layer.gates()[2].targets(), &[0, 1]);
        assert_eq!(layer.gates()[3].targets(), &[1]);
        for g in layer.gates() {
            if let Some(angle) = g.angle() {
                assert_eq!(angle, 2.0 * 0.1);
            }
        }
    }

    #[test]
    fn gate_count_is_five_per_pair() {
        let layout = SubsystemLayout::adjacent(6).unwrap();
        assert_eq!(build_layer(0.3, &layout, 1.0).unwrap().gates().len(), 15);
    }

    #[test]
    fn zero_input_layer_is_identity() {
        let layout = SubsystemLayout::adjacent(4).unwrap();
        let layer = build_layer(0.0, &layout, 7.0).unwrap();
        let rho = DensityMatrix::basis_state(4, 0b0110)
            .unwrap()
            .apply_unitary(&UnitaryGate::hadamard(0))
            .unwrap();
        let out = apply_layer(&rho, &layer).unwrap();
        assert!(out.matrix().max_abs_diff(rho.matrix()) < 1e-14);
    }

    #[test]
    fn layer_size_mismatch() {
        let layer = build_layer(0.1, &SubsystemLayout::adjacent(2).unwrap(), 1.0).unwrap();
        let rho = DensityMatrix::plus_state(4).unwrap();
        assert!(matches!(apply_layer(&rho, &layer), Err(Error::Dimension(_))));
    }

    #[test]
    fn qasm_single_step_structure() {
        let layout = SubsystemLayout::adjacent(2).unwrap();
        let text = export_qasm(&[0.0], &layout, 2.0).unwrap();
        let count = |p: &str| text.lines().filter(|l| l.starts_with(p)).count();
        assert!(text.starts_with("OPENQASM 2.0;\n"));
        assert!(text.contains("qreg q[2];\ncreg c[2];\n"));
        assert_eq!(count("h "), 2);
        assert_eq!(count("rx(0) "), 2);
        assert_eq!(count("cx "), 2);
        assert_eq!(count("rz(0) "), 1);
        assert_eq!(count("measure "), 2);
    }

    #[test]
    fn qasm_rejects_empty_inputs() {
        let layout = SubsystemLayout::adjacent(2).unwrap();
        assert!(export_qasm(&[], &layout, 1.0).is_err());
    }

    #[test]
    fn format_angle_round_trips() {
        for x in [0.2, -1.0 / 3.0, std::f64::consts::PI * 0.0123456789, 1e-17, -0.0] {
            let back: f64 = format_angle(x).parse().unwrap();
            assert_eq!(back, x);
        }
    }
}
