use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Completeness tolerance `max |Σ K†K − I|`.
pub const COMPLETENESS_TOL: f64 = 1e-12;

/// A CPTP map on one or two qubits given by its Kraus operators.
///
/// Operators follow the same local bit ordering as [`super::UnitaryGate`].
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    targets: Vec<usize>,
    operators: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(targets: Vec<usize>, operators: Vec<ComplexMatrix>) -> Result<Self> {
        if targets.is_empty() || targets.len() > 2 {
            return Err(Error::InvalidChannel(format!(
                "channels act on 1 or 2 qubits, got {}",
                targets.len()
            )));
        }
        if targets.len() == 2 && targets[0] == targets[1] {
            return Err(Error::InvalidChannel("repeated target qubit".into()));
        }
        if operators.is_empty() {
            return Err(Error::InvalidChannel("no Kraus operators".into()));
        }
        let dim = 1usize << targets.len();
        if operators.iter().any(|k| k.rows() != dim || k.cols() != dim) {
            return Err(Error::InvalidChannel(format!(
                "every Kraus operator must be {dim}x{dim}"
            )));
        }
        let channel = Self { targets, operators };
        let err = channel.completeness_error();
        if err > COMPLETENESS_TOL {
            return Err(Error::InvalidChannel(format!(
                "completeness violated by {err:e}"
            )));
        }
        Ok(channel)
    }

    pub fn identity(targets: Vec<usize>) -> Result<Self> {
        let dim = 1usize << targets.len();
        Self::new(targets, vec![ComplexMatrix::identity(dim)])
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    /// `max |Σ_k K_k†K_k − I|`.
    pub fn completeness_error(&self) -> f64 {
        let dim = 1usize << self.targets.len();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for k in &self.operators {
            let kk = k.adjoint().matmul(k).expect("square operators");
            sum = sum.add(&kk).expect("same shape");
        }
        sum.max_abs_diff(&ComplexMatrix::identity(dim))
    }
}
