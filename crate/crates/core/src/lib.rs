//! Quantum reservoir computing on a noisy density-matrix simulator.
//!
//! The pipeline is: encode a scalar input series into layers of rotation and
//! entangling gates ([`circuit`]), evolve a density matrix through them with
//! optional device noise ([`noise`], [`engine`]), read out per-qubit `⟨Z⟩`
//! features, and train a linear readout on them ([`readout`]).

pub mod analysis;
pub mod benchmarks;
pub mod circuit;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod noise;
pub mod quantum;
pub mod readout;

pub use error::{Error, Result};
