//! Dense density-matrix simulation.
//!
//! Gates and channels act on one or two qubits and are applied block by
//! block over the targeted axes; the full `2^n × 2^n` operator is never built.

mod channel;
mod gate;
mod matrix;
mod state;

pub use channel::{KrausChannel, COMPLETENESS_TOL};
pub use gate::UnitaryGate;
pub use matrix::ComplexMatrix;
pub use state::{
    z_expectations_from_probabilities, DensityMatrix, HERMITICITY_TOL, MAX_QUBITS, PSD_TOL,
    TRACE_TOL,
};
