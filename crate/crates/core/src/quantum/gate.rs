use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

const UNITARITY_TOL: f64 = 1e-12;

/// A one- or two-qubit unitary acting on the listed qubits.
///
/// The gate matrix is indexed with `targets[0]` as the most significant bit,
/// so `CX` with `targets = [control, target]` has the textbook matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryGate {
    name: &'static str,
    targets: Vec<usize>,
    matrix: ComplexMatrix,
    angle: Option<f64>,
}

impl UnitaryGate {
    /// Validates shape, target distinctness and unitarity.
    pub fn new(targets: Vec<usize>, matrix: ComplexMatrix) -> Result<Self> {
        Self::build("unitary", targets, matrix, None)
    }

    fn build(
        name: &'static str,
        targets: Vec<usize>,
        matrix: ComplexMatrix,
        angle: Option<f64>,
    ) -> Result<Self> {
        if targets.is_empty() || targets.len() > 2 {
            return Err(Error::InvalidGate(format!(
                "gates act on 1 or 2 qubits, got {}",
                targets.len()
            )));
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(Error::InvalidGate(format!(
                "repeated target qubit {}",
                targets[0]
            )));
        }
        let dim = 1usize << targets.len();
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::Dimension(format!(
                "{}-qubit gate needs a {dim}x{dim} matrix",
                targets.len()
            )));
        }
        let err = matrix.unitarity_error();
        if err > UNITARITY_TOL {
            return Err(Error::InvalidGate(format!("not unitary (error {err:e})")));
        }
        Ok(Self {
            name,
            targets,
            matrix,
            angle,
        })
    }

    pub fn hadamard(q: usize) -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let m = ComplexMatrix::from_vec(2, 2, vec![h, h, h, -h]).expect("2x2");
        Self::build("h", vec![q], m, None).expect("hadamard is unitary")
    }

    /// `exp(-i θ X / 2)`.
    pub fn rx(q: usize, theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        let m = ComplexMatrix::from_vec(
            2,
            2,
            vec![
                Complex64::new(c, 0.0),
                Complex64::new(0.0, -s),
                Complex64::new(0.0, -s),
                Complex64::new(c, 0.0),
            ],
        )
        .expect("2x2");
        Self::build("rx", vec![q], m, Some(theta)).expect("rx is unitary")
    }

    /// `exp(-i θ Z / 2)`.
    pub fn rz(q: usize, theta: f64) -> Self {
        let m = ComplexMatrix::from_vec(
            2,
            2,
            vec![
                Complex64::from_polar(1.0, -theta / 2.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::from_polar(1.0, theta / 2.0),
            ],
        )
        .expect("2x2");
        Self::build("rz", vec![q], m, Some(theta)).expect("rz is unitary")
    }

    pub fn cx(control: usize, target: usize) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let m = ComplexMatrix::from_vec(
            4,
            4,
            vec![
                one, zero, zero, zero, //
                zero, one, zero, zero, //
                zero, zero, zero, one, //
                zero, zero, one, zero,
            ],
        )?;
        Self::build("cx", vec![control, target], m, None)
    }

    /// `exp(-i θ Z⊗Z / 2)` on a qubit pair.
    pub fn zz(a: usize, b: usize, theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::NonFinite("zz angle".into()));
        }
        let minus = Complex64::from_polar(1.0, -theta / 2.0);
        let plus = Complex64::from_polar(1.0, theta / 2.0);
        let m = ComplexMatrix::from_vec(
            4,
            4,
            {
                let mut d = vec![Complex64::new(0.0, 0.0); 16];
                d[0] = minus;
                d[5] = plus;
                d[10] = plus;
                d[15] = minus;
                d
            },
        )?;
        Self::build("zz", vec![a, b], m, Some(theta))
    }

    /// Gate mnemonic (`h`, `rx`, `rz`, `cx`, `zz`, or `unitary`).
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Rotation angle for parameterized gates.
    pub fn angle(&self) -> Option<f64> {
        self.angle
    }

    pub fn num_targets(&self) -> usize {
        self.targets.len()
    }
}
