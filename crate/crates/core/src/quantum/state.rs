use num_complex::Complex64;

use super::{ComplexMatrix, KrausChannel, UnitaryGate};
use crate::error::{Error, Result};

/// Largest register the dense simulator accepts (`d² = 2^28` complex entries).
pub const MAX_QUBITS: usize = 14;

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;

type Block = [[Complex64; 4]; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Density matrix of an `n`-qubit register.
///
/// Basis index bit `q` holds the state of qubit `q` (qubit 0 is the least
/// significant bit), so `Z_q` reads bit `q` of the diagonal index.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// `|+⟩⟨+|^⊗n`: every entry equals `1/2^n`.
    pub fn plus_state(num_qubits: usize) -> Result<Self> {
        let dim = check_capacity(num_qubits)?;
        let v = Complex64::new(1.0 / dim as f64, 0.0);
        let matrix = ComplexMatrix::from_vec(dim, dim, vec![v; dim * dim])?;
        Ok(Self { num_qubits, matrix })
    }

    /// Computational basis projector `|b⟩⟨b|`.
    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        let dim = check_capacity(num_qubits)?;
        if index >= dim {
            return Err(Error::Dimension(format!(
                "basis index {index} for dimension {dim}"
            )));
        }
        let mut matrix = ComplexMatrix::zeros(dim, dim);
        matrix.set(index, index, Complex64::new(1.0, 0.0));
        Ok(Self { num_qubits, matrix })
    }

    /// `I/d`.
    pub fn maximally_mixed(num_qubits: usize) -> Result<Self> {
        let dim = check_capacity(num_qubits)?;
        let matrix = ComplexMatrix::from_real_diagonal(&vec![1.0 / dim as f64; dim]);
        Ok(Self { num_qubits, matrix })
    }

    /// `|ψ⟩⟨ψ|` for a normalized state vector.
    pub fn from_pure(amplitudes: &[Complex64]) -> Result<Self> {
        let num_qubits = qubits_for_dim(amplitudes.len())?;
        let dim = amplitudes.len();
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("state vector norm² {norm}")));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for r in amplitudes {
            for c in amplitudes {
                data.push(r * c.conj());
            }
        }
        Ok(Self {
            num_qubits,
            matrix: ComplexMatrix::from_vec(dim, dim, data)?,
        })
    }

    /// Wraps a matrix after checking shape, Hermiticity and trace (PSD is not checked).
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension("density matrix must be square".into()));
        }
        let num_qubits = qubits_for_dim(matrix.rows())?;
        let state = Self { num_qubits, matrix };
        state.validate(false)?;
        Ok(state)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Tensor product `self ⊗ other`; `other`'s qubits become the low indices.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let num_qubits = self.num_qubits + other.num_qubits;
        check_capacity(num_qubits)?;
        Ok(Self {
            num_qubits,
            matrix: self.matrix.kron(&other.matrix),
        })
    }

    /// Checks Hermiticity and unit trace, and positivity when `check_psd` is set.
    pub fn validate(&self, check_psd: bool) -> Result<()> {
        let herm = self.matrix.hermiticity_error();
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (error {herm:e})")));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        if check_psd {
            let min = self.min_eigenvalue();
            if min < -PSD_TOL {
                return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .hermitian_eigenvalues()
            .first()
            .copied()
            .unwrap_or(0.0)
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Real parts of the diagonal, i.e. the computational-basis distribution.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix.get(i, i).re).collect()
    }

    /// `ρ → UρU†`.
    pub fn apply_unitary(&self, gate: &UnitaryGate) -> Result<Self> {
        let mut out = self.clone();
        out.apply_unitary_mut(gate)?;
        Ok(out)
    }

    /// In-place form of [`Self::apply_unitary`].
    pub fn apply_unitary_mut(&mut self, gate: &UnitaryGate) -> Result<()> {
        self.check_targets(gate.targets())?;
        let u = load_local(gate.matrix());
        let k = gate.num_targets();
        let dim_local = 1usize << k;
        self.for_each_block(gate.targets(), |block| {
            *block = sandwich(&u, block, dim_local);
        });
        self.debug_check();
        Ok(())
    }

    /// `ρ → Σ_k K_k ρ K_k†`, followed by re-Hermitization.
    pub fn apply_channel(&self, channel: &KrausChannel) -> Result<Self> {
        let mut out = self.clone();
        out.apply_channel_mut(channel)?;
        Ok(out)
    }

    /// In-place form of [`Self::apply_channel`].
    pub fn apply_channel_mut(&mut self, channel: &KrausChannel) -> Result<()> {
        let err = channel.completeness_error();
        if err > super::channel::COMPLETENESS_TOL {
            return Err(Error::InvalidChannel(format!(
                "completeness violated by {err:e}"
            )));
        }
        self.check_targets(channel.targets())?;
        let ops: Vec<Block> = channel.operators().iter().map(load_local).collect();
        let dim_local = 1usize << channel.targets().len();
        self.for_each_block(channel.targets(), |block| {
            let mut acc = [[ZERO; 4]; 4];
            for k in &ops {
                let term = sandwich(k, block, dim_local);
                for r in 0..dim_local {
                    for c in 0..dim_local {
                        acc[r][c] += term[r][c];
                    }
                }
            }
            *block = acc;
        });
        self.rehermitize();
        self.debug_check();
        Ok(())
    }

    /// `[Tr(Z_0 ρ), …, Tr(Z_{n−1} ρ)]`, read from the diagonal only.
    pub fn pauli_z_expectations(&self) -> Vec<f64> {
        let diag = self.diagonal();
        z_expectations_from_probabilities(&diag, self.num_qubits)
    }

    /// `½‖a − b‖₁`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(format!(
                "trace distance between dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let diff = self.matrix.sub(&other.matrix)?;
        let sum: f64 = diff.hermitian_eigenvalues().iter().map(|l| l.abs()).sum();
        Ok((0.5 * sum).clamp(0.0, 1.0))
    }

    /// `ρ ← (ρ + ρ†)/2`.
    pub fn rehermitize(&mut self) {
        let dim = self.dim();
        let data = self.matrix.as_mut_slice();
        for r in 0..dim {
            let d = &mut data[r * dim + r];
            *d = Complex64::new(d.re, 0.0);
            for c in (r + 1)..dim {
                let avg = (data[r * dim + c] + data[c * dim + r].conj()) * 0.5;
                data[r * dim + c] = avg;
                data[c * dim + r] = avg.conj();
            }
        }
    }

    fn check_targets(&self, targets: &[usize]) -> Result<()> {
        for &t in targets {
            if t >= self.num_qubits {
                return Err(Error::QubitIndex {
                    index: t,
                    num_qubits: self.num_qubits,
                });
            }
        }
        Ok(())
    }

    /// Visits every `2^k × 2^k` sub-block whose rows and columns differ only
    /// in the target bits, so a local operator never needs the full `d × d` form.
    fn for_each_block(&mut self, targets: &[usize], mut f: impl FnMut(&mut Block)) {
        let k = targets.len();
        let dim = self.dim();
        let dim_local = 1usize << k;
        let mut offsets = [0usize; 4];
        for (a, off) in offsets.iter_mut().enumerate().take(dim_local) {
            *off = local_to_global(a, targets);
        }
        let mask: usize = targets.iter().map(|t| 1usize << t).sum();
        let bases: Vec<usize> = (0..dim).filter(|i| i & mask == 0).collect();
        let data = self.matrix.as_mut_slice();
        let mut block = [[ZERO; 4]; 4];
        for &rb in &bases {
            for &cb in &bases {
                for r in 0..dim_local {
                    let row = (rb + offsets[r]) * dim + cb;
                    for c in 0..dim_local {
                        block[r][c] = data[row + offsets[c]];
                    }
                }
                f(&mut block);
                for r in 0..dim_local {
                    let row = (rb + offsets[r]) * dim + cb;
                    for c in 0..dim_local {
                        data[row + offsets[c]] = block[r][c];
                    }
                }
            }
        }
    }

    #[inline]
    fn debug_check(&self) {
        #[cfg(debug_assertions)]
        {
            let herm = self.matrix.hermiticity_error();
            let tr = self.matrix.trace();
            debug_assert!(herm <= 1e-8, "Hermiticity drift {herm:e}");
            debug_assert!((tr.re - 1.0).abs() <= 1e-8, "trace drift {tr}");
        }
    }
}

/// Converts computational-basis probabilities into per-qubit `⟨Z⟩`.
pub fn z_expectations_from_probabilities(probs: &[f64], num_qubits: usize) -> Vec<f64> {
    let mut out = vec![0.0; num_qubits];
    for (b, &p) in probs.iter().enumerate() {
        for (q, z) in out.iter_mut().enumerate() {
            if (b >> q) & 1 == 0 {
                *z += p;
            } else {
                *z -= p;
            }
        }
    }
    out
}

/// Maps a local gate index (`targets[0]` most significant) to global basis offsets.
pub(crate) fn local_to_global(local: usize, targets: &[usize]) -> usize {
    let k = targets.len();
    targets
        .iter()
        .enumerate()
        .map(|(j, &t)| ((local >> (k - 1 - j)) & 1) << t)
        .sum()
}

fn load_local(m: &ComplexMatrix) -> Block {
    let mut b = [[ZERO; 4]; 4];
    for (r, row) in b.iter_mut().enumerate().take(m.rows()) {
        for (c, v) in row.iter_mut().enumerate().take(m.cols()) {
            *v = m.get(r, c);
        }
    }
    b
}

/// `K B K†` on the leading `n × n` corner.
fn sandwich(k: &Block, b: &Block, n: usize) -> Block {
    let mut kb = [[ZERO; 4]; 4];
    for r in 0..n {
        for c in 0..n {
            let mut s = ZERO;
            for j in 0..n {
                s += k[r][j] * b[j][c];
            }
            kb[r][c] = s;
        }
    }
    let mut out = [[ZERO; 4]; 4];
    for r in 0..n {
        for c in 0..n {
            let mut s = ZERO;
            for j in 0..n {
                s += kb[r][j] * k[c][j].conj();
            }
            out[r][c] = s;
        }
    }
    out
}

fn check_capacity(num_qubits: usize) -> Result<usize> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "{num_qubits} qubits; supported range is 1..={MAX_QUBITS}"
        )));
    }
    Ok(1usize << num_qubits)
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "dimension {dim} is not a power of two ≥ 2"
        )));
    }
    let n = dim.trailing_zeros() as usize;
    check_capacity(n)?;
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const TOL: f64 = 1e-12;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn plus_state_entries() {
        let one = DensityMatrix::plus_state(1).unwrap();
        assert!(one.matrix().as_slice().iter().all(|&z| z == c(0.5)));
        let two = DensityMatrix::plus_state(2).unwrap();
        assert_eq!(two.dim(), 4);
        assert!(two.matrix().as_slice().iter().all(|&z| z == c(0.25)));
        let three = DensityMatrix::plus_state(3).unwrap();
        assert!(three.pauli_z_expectations().iter().all(|z| z.abs() < TOL));
    }

    #[test]
    fn plus_state_capacity() {
        assert!(matches!(DensityMatrix::plus_state(0), Err(Error::Capacity(_))));
        assert!(matches!(DensityMatrix::plus_state(15), Err(Error::Capacity(_))));
    }

    #[test]
    fn identity_gate_leaves_state() {
        let rho = DensityMatrix::plus_state(2).unwrap();
        let id = UnitaryGate::new(vec![1], ComplexMatrix::identity(2)).unwrap();
        assert_eq!(rho.apply_unitary(&id).unwrap(), rho);
    }

    #[test]
    fn rx_pi_flips_zero_to_one() {
        let zero = DensityMatrix::basis_state(1, 0).unwrap();
        let one = DensityMatrix::basis_state(1, 1).unwrap();
        let out = zero.apply_unitary(&UnitaryGate::rx(0, PI)).unwrap();
        assert!(out.matrix().max_abs_diff(one.matrix()) < TOL);
    }

    #[test]
    fn cx_makes_bell_state() {
        // Control 0 in |+⟩, target 1 in |0⟩.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![Complex64::new(0.0, 0.0); 4];
        amps[0b00] = c(s);
        amps[0b01] = c(s);
        let rho = DensityMatrix::from_pure(&amps).unwrap();
        let out = rho.apply_unitary(&UnitaryGate::cx(0, 1).unwrap()).unwrap();
        // Oracle: |Φ+⟩ = (|00⟩ + |11⟩)/√2.
        let mut bell = vec![Complex64::new(0.0, 0.0); 4];
        bell[0b00] = c(s);
        bell[0b11] = c(s);
        let expected = DensityMatrix::from_pure(&bell).unwrap();
        assert!(out.matrix().max_abs_diff(expected.matrix()) < TOL);
        assert!(out.pauli_z_expectations().iter().all(|z| z.abs() < TOL));
    }

    #[test]
    fn out_of_range_target() {
        let rho = DensityMatrix::plus_state(2).unwrap();
        let err = rho.apply_unitary(&UnitaryGate::rx(2, 0.1)).unwrap_err();
        assert!(matches!(err, Error::QubitIndex { index: 2, .. }));
    }

    #[test]
    fn identity_channel_leaves_state() {
        let rho = DensityMatrix::plus_state(2).unwrap();
        let ch = KrausChannel::identity(vec![0]).unwrap();
        assert!(rho.apply_channel(&ch).unwrap().matrix().max_abs_diff(rho.matrix()) < TOL);
    }

    #[test]
    fn z_expectations_of_reference_states() {
        let n = 3;
        let zero = DensityMatrix::basis_state(n, 0).unwrap();
        assert!(zero.pauli_z_expectations().iter().all(|&z| (z - 1.0).abs() < TOL));
        let mixed = DensityMatrix::maximally_mixed(n).unwrap();
        assert!(mixed.pauli_z_expectations().iter().all(|z| z.abs() < TOL));
        // |b⟩ with b = 0b101: qubits 0 and 2 are |1⟩.
        let b = DensityMatrix::basis_state(n, 0b101).unwrap();
        assert_eq!(b.pauli_z_expectations(), vec![-1.0, 1.0, -1.0]);
    }

    #[test]
    fn trace_distance_examples() {
        let zero = DensityMatrix::basis_state(1, 0).unwrap();
        let one = DensityMatrix::basis_state(1, 1).unwrap();
        let mixed = DensityMatrix::maximally_mixed(1).unwrap();
        assert!(zero.trace_distance(&zero).unwrap() < TOL);
        assert!((zero.trace_distance(&one).unwrap() - 1.0).abs() < TOL);
        assert!((zero.trace_distance(&mixed).unwrap() - 0.5).abs() < TOL);
        let two = DensityMatrix::plus_state(2).unwrap();
        assert!(matches!(zero.trace_distance(&two), Err(Error::Dimension(_))));
    }

    #[test]
    fn from_matrix_rejects_bad_trace() {
        let m = ComplexMatrix::from_real_diagonal(&[1.0, 1.0]);
        assert!(DensityMatrix::from_matrix(m).is_err());
    }

    #[test]
    fn local_index_mapping() {
        // targets [3, 1]: local bit 1 (MSB) -> qubit 3, local bit 0 -> qubit 1.
        assert_eq!(local_to_global(0b10, &[3, 1]), 1 << 3);
        assert_eq!(local_to_global(0b01, &[3, 1]), 1 << 1);
        assert_eq!(local_to_global(0b1, &[2]), 1 << 2);
    }
}
