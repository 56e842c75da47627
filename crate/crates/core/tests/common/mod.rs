//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use qreservoir::quantum::{ComplexMatrix, DensityMatrix, KrausChannel, UnitaryGate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Full `2^n × 2^n` operator for `local` acting on `targets` (`targets[0]`
/// is the most significant local bit), built entry by entry.
pub fn embed(local: &ComplexMatrix, targets: &[usize], n: usize) -> ComplexMatrix {
    let d = 1usize << n;
    let k = targets.len();
    let mask: usize = targets.iter().map(|&q| 1 << q).sum();
    let local_index = |i: usize| -> usize {
        (0..k).fold(0, |acc, pos| acc | (((i >> targets[pos]) & 1) << (k - 1 - pos)))
    };
    let mut data = vec![c(0.0, 0.0); d * d];
    for r in 0..d {
        for col in 0..d {
            if r & !mask == col & !mask {
                data[r * d + col] = local.get(local_index(r), local_index(col));
            }
        }
    }
    ComplexMatrix::from_vec(d, d, data).unwrap()
}

pub fn conjugate(op: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    op.matmul(rho).unwrap().matmul(&op.adjoint()).unwrap()
}

pub fn naive_unitary(rho: &DensityMatrix, gate: &UnitaryGate) -> ComplexMatrix {
    conjugate(&embed(gate.matrix(), gate.targets(), rho.num_qubits()), rho.matrix())
}

pub fn naive_channel(rho: &DensityMatrix, ch: &KrausChannel) -> ComplexMatrix {
    let n = rho.num_qubits();
    let d = rho.dim();
    ch.operators()
        .iter()
        .map(|k| conjugate(&embed(k, ch.targets(), n), rho.matrix()))
        .fold(ComplexMatrix::zeros(d, d), |acc, m| acc.add(&m).unwrap())
}

/// `Tr(Z_q ρ)` straight from the diagonal.
pub fn naive_z(rho: &ComplexMatrix, q: usize) -> f64 {
    (0..rho.rows())
        .map(|i| {
            let sign = if (i >> q) & 1 == 0 { 1.0 } else { -1.0 };
            sign * rho.get(i, i).re
        })
        .sum()
}

/// Ginibre-distributed mixed state `A A† / Tr(A A†)`.
pub fn random_density(n: usize, seed: u64) -> DensityMatrix {
    let d = 1usize << n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<Complex64> = (0..d * d)
        .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let a = ComplexMatrix::from_vec(d, d, data).unwrap();
    let m = a.matmul(&a.adjoint()).unwrap();
    let tr = m.trace().re;
    DensityMatrix::from_matrix(m.scale(c(1.0 / tr, 0.0))).unwrap()
}

/// Random pure state.
pub fn random_pure(n: usize, seed: u64) -> DensityMatrix {
    let d = 1usize << n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut amps: Vec<Complex64> = (0..d)
        .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    DensityMatrix::from_pure(&amps).unwrap()
}

pub fn assert_close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) {
    let diff = a.max_abs_diff(b);
    assert!(diff <= tol, "max |Δ| = {diff:e} > {tol:e}");
}
