//! Reservoir trajectories and feature extraction.
//!
//! The density matrix is always evolved exactly. Sampled features are drawn
//! afterwards from each timestep's diagonal: every timestep corresponds to a
//! fresh circuit execution, so measurement never feeds back into `ρ_t`.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_layer, SubsystemLayout};
use crate::error::{Error, Result};
use crate::noise::{DeviceNoiseProfile, NoiseModel};
use crate::quantum::{z_expectations_from_probabilities, DensityMatrix};

/// Clipping tolerance for slightly negative diagonal probabilities.
pub const NEGATIVE_MASS_TOL: f64 = 1e-9;
/// Largest tolerated deviation of the diagonal sum from one.
pub const MASS_TOL: f64 = 1e-6;

/// Measurement mode for features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shots {
    Exact,
    Finite(u64),
}

impl Shots {
    pub fn parse(text: &str) -> Result<Self> {
        if text.eq_ignore_ascii_case("exact") {
            return Ok(Shots::Exact);
        }
        let s: u64 = text
            .parse()
            .map_err(|_| Error::Config(format!("shots must be `exact` or a positive integer, got `{text}`")))?;
        if s == 0 {
            return Err(Error::range("shots", "must be ≥ 1"));
        }
        Ok(Shots::Finite(s))
    }
}

impl std::fmt::Display for Shots {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Shots::Exact => f.write_str("exact"),
            Shots::Finite(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirConfig {
    pub layout: SubsystemLayout,
    /// Input scale `a` in `s = a·u`.
    pub scale: f64,
    pub profile: DeviceNoiseProfile,
    pub shots: Shots,
    pub seed: u64,
}

impl ReservoirConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.scale.is_finite() {
            return Err(Error::range("scale", "must be finite"));
        }
        if self.shots == Shots::Finite(0) {
            return Err(Error::range("shots", "must be ≥ 1"));
        }
        self.profile.validate()?;
        if self.profile.topology.num_qubits() != self.layout.num_qubits() {
            return Err(Error::Config(format!(
                "noise topology has {} qubits but the layout has {}",
                self.profile.topology.num_qubits(),
                self.layout.num_qubits()
            )));
        }
        Ok(())
    }
}

/// Per-timestep readout vectors; the bias column is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSeries {
    timesteps: usize,
    width: usize,
    values: Vec<f64>,
}

impl FeatureSeries {
    pub fn new(timesteps: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != timesteps * width {
            return Err(Error::Dimension(format!(
                "{} values for {timesteps}x{width} features",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature value".into()));
        }
        Ok(Self {
            timesteps,
            width,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::Dimension("ragged feature rows".into()));
        }
        Self::new(rows.len(), width, rows.iter().flatten().copied().collect())
    }

    pub fn timesteps(&self) -> usize {
        self.timesteps
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row for 1-based timestep `t`.
    pub fn row(&self, t: usize) -> &[f64] {
        assert!(t >= 1 && t <= self.timesteps, "timestep {t} out of 1..={}", self.timesteps);
        &self.values[(t - 1) * self.width..t * self.width]
    }

    /// Column `channel` restricted to `window`.
    pub fn channel(&self, channel: usize, window: Window) -> Vec<f64> {
        (window.first..=window.last)
            .map(|t| self.row(t)[channel])
            .collect()
    }

    /// Rows `window.first..=window.last` as a new series.
    pub fn slice(&self, window: Window) -> Result<Self> {
        window.check(self.timesteps)?;
        let lo = (window.first - 1) * self.width;
        let hi = window.last * self.width;
        Self::new(window.len(), self.width, self.values[lo..hi].to_vec())
    }

    /// Horizontal concatenation (same number of timesteps).
    pub fn concat(parts: &[FeatureSeries]) -> Result<Self> {
        let timesteps = parts.first().map_or(0, |p| p.timesteps);
        if parts.iter().any(|p| p.timesteps != timesteps) {
            return Err(Error::Dimension("series lengths differ".into()));
        }
        let width: usize = parts.iter().map(|p| p.width).sum();
        let mut values = Vec::with_capacity(timesteps * width);
        for t in 1..=timesteps {
            for p in parts {
                values.extend_from_slice(p.row(t));
            }
        }
        Self::new(timesteps, width, values)
    }

    /// CSV with header `t,z0,z1,…` and 1-based `t`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for q in 0..self.width {
            let _ = write!(out, ",z{q}");
        }
        out.push('\n');
        for t in 1..=self.timesteps {
            let _ = write!(out, "{t}");
            for v in self.row(t) {
                let _ = write!(out, ",{v:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty features CSV".into()))?;
        let width = header.split(',').count().saturating_sub(1);
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != width + 1 {
                return Err(Error::Parse(format!(
                    "features CSV line {}: expected {} fields, found {}",
                    i + 2,
                    width + 1,
                    fields.len()
                )));
            }
            let row = fields[1..]
                .iter()
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|_| {
                        Error::Parse(format!("features CSV line {}: bad number `{f}`", i + 2))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Inclusive 1-based timestep window `[first, last]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub first: usize,
    pub last: usize,
}

impl Window {
    pub fn new(first: usize, last: usize) -> Self {
        Self { first, last }
    }

    pub fn len(&self) -> usize {
        if self.last >= self.first {
            self.last - self.first + 1
        } else {
            0
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn check(&self, timesteps: usize) -> Result<()> {
        if self.first == 0 || self.is_empty() || self.last > timesteps {
            return Err(Error::Window(format!(
                "window [{}, {}] does not fit 1..={timesteps}",
                self.first, self.last
            )));
        }
        Ok(())
    }

    /// 0-based index range for slicing sequences.
    pub fn range(&self) -> std::ops::Range<usize> {
        self.first - 1..self.last
    }
}

/// Washout / train / test partition of a length-`M` series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub washout: usize,
    pub train: usize,
    pub test: usize,
}

impl Split {
    pub const NARMA: Split = Split {
        washout: 10,
        train: 70,
        test: 20,
    };

    pub fn train_window(&self) -> Window {
        Window::new(self.washout + 1, self.washout + self.train)
    }

    pub fn test_window(&self) -> Window {
        Window::new(self.washout + self.train + 1, self.washout + self.train + self.test)
    }

    pub fn total(&self) -> usize {
        self.washout + self.train + self.test
    }
}

/// Train and test windows for `features`; an empty window has `last < first`.
pub fn split_series(
    features: &FeatureSeries,
    washout: usize,
    train: usize,
    test: usize,
) -> Result<(Window, Window)> {
    let split = Split {
        washout,
        train,
        test,
    };
    if split.total() > features.timesteps() {
        return Err(Error::Window(format!(
            "washout {washout} + train {train} + test {test} exceeds {} timesteps",
            features.timesteps()
        )));
    }
    Ok((split.train_window(), split.test_window()))
}

/// Seed for an independent substream identified by `path`.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mut h = splitmix64(base ^ 0x5155_4152_4553_4552);
    for &p in path {
        h = splitmix64(h ^ splitmix64(p.wrapping_add(0x9E37_79B9_7F4A_7C15)));
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for timestep `t`: the seed picks the key, `t` the ChaCha stream.
pub fn timestep_rng(seed: u64, t: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t as u64);
    rng
}

/// Draws `shots` bitstrings (bit `q` = qubit `q`) from `diag(ρ)` and applies
/// independent readout flips `(P(0→1), P(1→0))`.
pub fn sample_bitstrings<R: Rng + ?Sized>(
    state: &DensityMatrix,
    shots: u64,
    readout_flip: (f64, f64),
    rng: &mut R,
) -> Result<Vec<u32>> {
    let probs = clean_distribution(&state.diagonal())?;
    sample_from_distribution(&probs, state.num_qubits(), shots, readout_flip, rng)
}

/// Checks and clips a computational-basis distribution taken from `diag(ρ)`.
pub fn clean_distribution(diag: &[f64]) -> Result<Vec<f64>> {
    let total: f64 = diag.iter().sum();
    if (total - 1.0).abs() > MASS_TOL || !total.is_finite() {
        return Err(Error::CorruptedState(format!("diagonal mass {total}")));
    }
    let negative: f64 = diag.iter().filter(|&&p| p < 0.0).map(|p| -p).sum();
    if negative >= NEGATIVE_MASS_TOL {
        return Err(Error::CorruptedState(format!(
            "negative probability mass {negative:e}"
        )));
    }
    let clipped: Vec<f64> = diag.iter().map(|&p| p.max(0.0)).collect();
    let sum: f64 = clipped.iter().sum();
    Ok(clipped.into_iter().map(|p| p / sum).collect())
}

fn sample_from_distribution<R: Rng + ?Sized>(
    probs: &[f64],
    num_qubits: usize,
    shots: u64,
    (r01, r10): (f64, f64),
    rng: &mut R,
) -> Result<Vec<u32>> {
    if shots == 0 {
        return Err(Error::range("shots", "must be ≥ 1"));
    }
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p;
        cdf.push(acc);
    }
    let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let flips = r01 > 0.0 || r10 > 0.0;
    let mut out = Vec::with_capacity(shots as usize);
    for _ in 0..shots {
        let x: f64 = rng.random::<f64>() * acc;
        let idx = cdf.partition_point(|&c| c <= x).min(last);
        let mut bits = idx as u32;
        if flips {
            for q in 0..num_qubits {
                let bit = (bits >> q) & 1;
                let p_flip = if bit == 0 { r01 } else { r10 };
                if p_flip > 0.0 && rng.random::<f64>() < p_flip {
                    bits ^= 1 << q;
                }
            }
        }
        out.push(bits);
    }
    Ok(out)
}

/// Per-qubit means of `+1` (bit 0) / `−1` (bit 1).
pub fn bitstring_means(bitstrings: &[u32], num_qubits: usize) -> Vec<f64> {
    let mut ones = vec![0u64; num_qubits];
    for &b in bitstrings {
        for (q, c) in ones.iter_mut().enumerate() {
            *c += u64::from((b >> q) & 1);
        }
    }
    let s = bitstrings.len() as f64;
    ones.iter().map(|&c| 1.0 - 2.0 * c as f64 / s).collect()
}

/// Finite-shot estimate of `[⟨Z_0⟩, …]` for one state.
pub fn sampled_z_expectations<R: Rng + ?Sized>(
    state: &DensityMatrix,
    shots: u64,
    readout_flip: (f64, f64),
    rng: &mut R,
) -> Result<Vec<f64>> {
    let bits = sample_bitstrings(state, shots, readout_flip, rng)?;
    Ok(bitstring_means(&bits, state.num_qubits()))
}

/// A configured reservoir with its noise channels prebuilt.
#[derive(Debug, Clone)]
pub struct Reservoir {
    config: ReservoirConfig,
    noise: NoiseModel,
}

impl Reservoir {
    pub fn new(config: ReservoirConfig) -> Result<Self> {
        config.validate()?;
        let noise = NoiseModel::new(config.profile.clone())?;
        Ok(Self { config, noise })
    }

    pub fn config(&self) -> &ReservoirConfig {
        &self.config
    }

    pub fn initial_state(&self) -> Result<DensityMatrix> {
        DensityMatrix::plus_state(self.config.layout.num_qubits())
    }

    /// One noisy timestep `ρ ← E_device(U(u) ρ U(u)†)`.
    pub fn step(&self, state: &mut DensityMatrix, u: f64) -> Result<()> {
        let layer = build_layer(u, &self.config.layout, self.config.scale)?;
        self.noise.step(state, &layer)
    }

    /// States `ρ_1..ρ_M` starting from `initial`.
    pub fn trajectory(&self, initial: &DensityMatrix, inputs: &[f64]) -> Result<Vec<DensityMatrix>> {
        let mut state = initial.clone();
        let mut out = Vec::with_capacity(inputs.len());
        for &u in inputs {
            self.step(&mut state, u)?;
            out.push(state.clone());
        }
        Ok(out)
    }

    /// Features of the trajectory from `|+⟩⟨+|^⊗n`.
    pub fn run(&self, inputs: &[f64]) -> Result<FeatureSeries> {
        self.run_from(&self.initial_state()?, inputs)
    }

    pub fn run_from(&self, initial: &DensityMatrix, inputs: &[f64]) -> Result<FeatureSeries> {
        if inputs.is_empty() {
            return Err(Error::Length("reservoir needs at least one input".into()));
        }
        if let Some(u) = inputs.iter().find(|u| !u.is_finite()) {
            return Err(Error::NonFinite(format!("input {u}")));
        }
        let n = self.config.layout.num_qubits();
        if initial.num_qubits() != n {
            return Err(Error::Dimension(format!(
                "initial state has {} qubits, layout {n}",
                initial.num_qubits()
            )));
        }
        let mut state = initial.clone();
        let mut diagonals = Vec::with_capacity(inputs.len());
        for &u in inputs {
            self.step(&mut state, u)?;
            diagonals.push(state.diagonal());
        }
        let rows: Vec<Vec<f64>> = match self.config.shots {
            Shots::Exact => diagonals
                .iter()
                .map(|d| z_expectations_from_probabilities(d, n))
                .collect(),
            Shots::Finite(s) => diagonals
                .par_iter()
                .enumerate()
                .map(|(i, d)| {
                    let probs = clean_distribution(d)
                        .map_err(|e| e.context(format!("timestep {}", i + 1)))?;
                    let mut rng = timestep_rng(self.config.seed, i + 1);
                    let bits =
                        sample_from_distribution(&probs, n, s, self.config.profile.readout_flip, &mut rng)?;
                    Ok(bitstring_means(&bits, n))
                })
                .collect::<Result<_>>()?,
        };
        FeatureSeries::from_rows(&rows)
    }
}

/// Runs the reservoir over `inputs` from the `|+⟩` state.
pub fn run_reservoir(inputs: &[f64], config: &ReservoirConfig) -> Result<FeatureSeries> {
    Reservoir::new(config.clone())?.run(inputs)
}
