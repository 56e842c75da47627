//! Task data (triple-sine input, NARMA targets, synthetic sensor pulses) and
//! the echo state network baseline.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{derive_seed, FeatureSeries, Split};
use crate::error::{Error, Result};
use crate::readout::{fit_regression, mean_std, nmse_of, predict_scalar};

/// `u_t = A·(sin(2πᾱt/T)·sin(2πβ̄t/T)·sin(2πγ̄t/T) + 1)` sampled at
/// `t = origin, origin+1, …, origin+M−1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputSignalSpec {
    pub alpha_bar: f64,
    pub beta_bar: f64,
    pub gamma_bar: f64,
    pub period: f64,
    pub amplitude: f64,
    pub length: usize,
    /// Time at which the first sample is evaluated.
    #[serde(default = "one")]
    pub origin: i64,
}

fn one() -> i64 {
    1
}

impl InputSignalSpec {
    /// `(2.11, 3.73, 4.11, 100)`, amplitude 0.1, `M = 100`, starting at `t = 0`.
    pub fn standard() -> Self {
        Self {
            alpha_bar: 2.11,
            beta_bar: 3.73,
            gamma_bar: 4.11,
            period: 100.0,
            amplitude: 0.1,
            length: 100,
            origin: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0) || !self.period.is_finite() {
            return Err(Error::range("period", "must be positive and finite"));
        }
        if self.length == 0 {
            return Err(Error::range("length", "must be at least 1"));
        }
        for (name, v) in [
            ("alpha_bar", self.alpha_bar),
            ("beta_bar", self.beta_bar),
            ("gamma_bar", self.gamma_bar),
            ("amplitude", self.amplitude),
        ] {
            if !v.is_finite() {
                return Err(Error::range(name, "must be finite"));
            }
        }
        Ok(())
    }

    /// The formula at an arbitrary time `t`.
    pub fn value_at(&self, t: f64) -> f64 {
        let w = 2.0 * PI * t / self.period;
        self.amplitude
            * ((self.alpha_bar * w).sin() * (self.beta_bar * w).sin() * (self.gamma_bar * w).sin()
                + 1.0)
    }
}

pub fn gen_input(spec: &InputSignalSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    Ok((0..spec.length)
        .map(|k| spec.value_at((spec.origin + k as i64) as f64))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NarmaVariant {
    /// `y_{t+1} = α y_t + β y_t y_{t−1} + γ u_t³ + δ`
    Narma2,
    /// `y_{t+1} = α y_t + β y_t Σ_{j<n_o} y_{t−j} + γ u_{t−n_o+1} u_t + δ`
    General,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NarmaSpec {
    pub variant: NarmaVariant,
    pub order: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    /// `y_1, y_0, y_{−1}, …`, most recent first; missing entries are zero.
    #[serde(default)]
    pub initial_history: Vec<f64>,
}

/// `|y|` beyond this aborts generation.
pub const DIVERGENCE_BOUND: f64 = 1e6;

impl NarmaSpec {
    pub fn narma2() -> Self {
        Self {
            variant: NarmaVariant::Narma2,
            order: 2,
            alpha: 0.4,
            beta: 0.4,
            gamma: 0.6,
            delta: 0.1,
            initial_history: Vec::new(),
        }
    }

    /// General form with `(α, β, γ, δ) = (0.3, 0.05, 1.5, 0.1)`.
    pub fn narma(order: usize) -> Self {
        Self {
            variant: NarmaVariant::General,
            order,
            alpha: 0.3,
            beta: 0.05,
            gamma: 1.5,
            delta: 0.1,
            initial_history: Vec::new(),
        }
    }

    /// `narma2`, `narma5`, `narma10`, or any `narma<k>`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "narma2" => Ok(Self::narma2()),
            _ => name
                .strip_prefix("narma")
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|&k| k >= 1)
                .map(Self::narma)
                .ok_or_else(|| Error::Config(format!("unknown NARMA task `{name}`"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.variant == NarmaVariant::General && self.order == 0 {
            return Err(Error::range("order", "must be at least 1"));
        }
        let all = [self.alpha, self.beta, self.gamma, self.delta];
        if all.iter().chain(&self.initial_history).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("NARMA coefficient or history".into()));
        }
        Ok(())
    }
}

/// Targets `y_1..y_M` for inputs `u_1..u_M`.
pub fn gen_narma(spec: &NarmaSpec, inputs: &[f64]) -> Result<Vec<f64>> {
    spec.validate()?;
    let m = inputs.len();
    if m == 0 {
        return Err(Error::Length("NARMA needs at least one input".into()));
    }
    let depth = spec.order.max(2).max(spec.initial_history.len());
    // y[depth - 1 + t] holds y_t, so times down to 2 − depth are addressable.
    let mut y = vec![0.0; depth - 1 + m + 1];
    for (k, &h) in spec.initial_history.iter().enumerate() {
        y[depth - k] = h;
    }
    let yt = |y: &[f64], t: i64| -> f64 { y[(depth as i64 - 1 + t) as usize] };
    let u = |t: i64| -> f64 {
        if t >= 1 {
            inputs[(t - 1) as usize]
        } else {
            0.0
        }
    };
    for t in 1..m as i64 {
        let cur = yt(&y, t);
        let next = match spec.variant {
            NarmaVariant::Narma2 => {
                spec.alpha * cur + spec.beta * cur * yt(&y, t - 1) + spec.gamma * u(t).powi(3) + spec.delta
            }
            NarmaVariant::General => {
                let no = spec.order as i64;
                let sum: f64 = (0..no).map(|j| yt(&y, t - j)).sum();
                spec.alpha * cur + spec.beta * cur * sum + spec.gamma * u(t - no + 1) * u(t) + spec.delta
            }
        };
        if !next.is_finite() || next.abs() > DIVERGENCE_BOUND {
            return Err(Error::Divergence {
                t: (t + 1) as usize,
                value: next,
            });
        }
        y[(depth as i64 + t) as usize] = next;
    }
    Ok(y[depth..].to_vec())
}

/// `u_t = u′_{t+1} − u′_t`.
pub fn preprocess_diff(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.len() < 2 {
        return Err(Error::Length(format!(
            "finite difference needs ≥ 2 samples, got {}",
            raw.len()
        )));
    }
    Ok(raw.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Shape of one class's pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseShape {
    pub onset: f64,
    pub rise: f64,
    pub peak: f64,
    pub decay: f64,
}

impl PulseShape {
    /// `peak · (1 − e^{−(t−onset)/rise}) · e^{−(t−onset)/decay}` for `t ≥ onset`.
    pub fn value_at(&self, t: f64) -> f64 {
        let s = t - self.onset;
        if s <= 0.0 {
            0.0
        } else {
            self.peak * (1.0 - (-s / self.rise).exp()) * (-s / self.decay).exp()
        }
    }
}

/// Classes 0 and 1 differ only slightly; class 2 is clearly distinct.
/// Over 90 noiseless steps the class waveforms differ in max-norm by ≥ 0.1
/// for the similar pair and by ≥ 0.2 between class 2 and either other.
/// Further classes vary onset and decay.
pub fn pulse_shape(class: usize) -> PulseShape {
    match class {
        0 => PulseShape { onset: 5.0, rise: 3.0, peak: 1.0, decay: 15.0 },
        1 => PulseShape { onset: 5.0, rise: 4.0, peak: 0.85, decay: 18.0 },
        2 => PulseShape { onset: 5.0, rise: 10.0, peak: 0.6, decay: 45.0 },
        k => PulseShape {
            onset: 5.0 + 4.0 * (k - 2) as f64,
            rise: 2.0 + (k % 3) as f64,
            peak: 1.0 - 0.05 * (k % 4) as f64,
            decay: 10.0 + 6.0 * (k - 2) as f64,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorSpec {
    pub classes: usize,
    pub samples_per_class: usize,
    pub timesteps: usize,
    /// Standard deviation of the additive Gaussian noise.
    pub noise: f64,
    pub seed: u64,
}

impl SensorSpec {
    /// Three classes of twenty 90-step samples.
    pub fn standard(noise: f64, seed: u64) -> Self {
        Self {
            classes: 3,
            samples_per_class: 20,
            timesteps: 90,
            noise,
            seed,
        }
    }
}

/// Raw per-sample series with labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSeriesDataset {
    pub classes: usize,
    pub timesteps: usize,
    pub series: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl LabeledSeriesDataset {
    pub fn new(classes: usize, series: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self> {
        if series.len() != labels.len() {
            return Err(Error::Length(format!(
                "{} series vs {} labels",
                series.len(),
                labels.len()
            )));
        }
        let timesteps = series.first().map_or(0, Vec::len);
        if series.iter().any(|s| s.len() != timesteps) {
            return Err(Error::Length("series lengths differ".into()));
        }
        if let Some(l) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::Classification(format!("label {l} ≥ {classes} classes")));
        }
        Ok(Self {
            classes,
            timesteps,
            series,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    /// Finite-differences every series.
    pub fn preprocessed(&self) -> Result<Self> {
        let series = self
            .series
            .iter()
            .map(|s| preprocess_diff(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.classes, series, self.labels.clone())
    }

    /// Per-class mean waveform.
    pub fn class_means(&self) -> Vec<Vec<f64>> {
        let mut sums = vec![vec![0.0; self.timesteps]; self.classes];
        let mut counts = vec![0usize; self.classes];
        for (s, &l) in self.series.iter().zip(&self.labels) {
            counts[l] += 1;
            for (a, v) in sums[l].iter_mut().zip(s) {
                *a += v;
            }
        }
        for (s, &c) in sums.iter_mut().zip(&counts) {
            if c > 0 {
                s.iter_mut().for_each(|v| *v /= c as f64);
            }
        }
        sums
    }

    /// `header` is written as a leading `#` comment line.
    pub fn to_csv(&self, header: &str) -> String {
        let mut out = format!("# {header}\nlabel");
        for t in 1..=self.timesteps {
            let _ = write!(out, ",u{t}");
        }
        out.push('\n');
        for (s, l) in self.series.iter().zip(&self.labels) {
            let _ = write!(out, "{l}");
            for v in s {
                let _ = write!(out, ",{v:?}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn gen_synthetic_sensor(spec: &SensorSpec) -> Result<LabeledSeriesDataset> {
    if spec.classes < 2 {
        return Err(Error::range("classes", "need at least 2"));
    }
    if spec.timesteps < 2 || spec.samples_per_class == 0 {
        return Err(Error::range("timesteps", "need ≥ 2 timesteps and ≥ 1 sample per class"));
    }
    if !(spec.noise >= 0.0) || !spec.noise.is_finite() {
        return Err(Error::range("noise", "must be finite and non-negative"));
    }
    let mut series = Vec::new();
    let mut labels = Vec::new();
    for class in 0..spec.classes {
        let shape = pulse_shape(class);
        for s in 0..spec.samples_per_class {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[class as u64, s as u64]));
            let x = (1..=spec.timesteps)
                .map(|t| {
                    let eps: f64 = StandardNormal.sample(&mut rng);
                    shape.value_at(t as f64) + spec.noise * eps
                })
                .collect();
            series.push(x);
            labels.push(class);
        }
    }
    LabeledSeriesDataset::new(spec.classes, series, labels)
}

impl SensorSpec {
    pub fn header(&self) -> String {
        format!(
            "synthetic-sensor classes={} samples_per_class={} timesteps={} noise={} seed={}",
            self.classes, self.samples_per_class, self.timesteps, self.noise, self.seed
        )
    }
}

/// Entries of `W_in`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputWeightStyle {
    /// Uniform over `{0, 1}`.
    #[default]
    ZeroOne,
    /// Uniform over `{−1, +1}`.
    PlusMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EsnConfig {
    pub nodes: usize,
    pub spectral_radius: f64,
    pub input_weights: InputWeightStyle,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Esn {
    pub w: DMatrix<f64>,
    pub w_in: DVector<f64>,
}

const SCHUR_EPS: f64 = 1e-14;
const SCHUR_MAX_ITER: usize = 100_000;

/// Largest eigenvalue magnitude. The Schur iteration is capped; some random
/// matrices never settle at machine precision.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    let schur = m
        .clone()
        .try_schur(SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::InvalidState("Schur decomposition did not converge".into()))?;
    Ok(schur
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

/// Rescales `w` to the requested spectral radius.
pub fn rescale_to_radius(w: &DMatrix<f64>, radius: f64) -> Result<DMatrix<f64>> {
    let current = spectral_radius(w)?;
    if !(current > 0.0) || !current.is_finite() {
        return Err(Error::InvalidState(format!("spectral radius {current} cannot be rescaled")));
    }
    Ok(w * (radius / current))
}

const ESN_RETRIES: usize = 16;

pub fn build_esn(config: &EsnConfig) -> Result<Esn> {
    if config.nodes == 0 {
        return Err(Error::range("nodes", "must be at least 1"));
    }
    if !(config.spectral_radius > 0.0) || !config.spectral_radius.is_finite() {
        return Err(Error::range("spectral_radius", "must be positive"));
    }
    let n = config.nodes;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..ESN_RETRIES {
        let w = DMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
        let w_in = DVector::from_fn(n, |_, _| {
            let bit = rng.random_bool(0.5);
            match (config.input_weights, bit) {
                (InputWeightStyle::ZeroOne, b) => f64::from(u8::from(b)),
                (InputWeightStyle::PlusMinus, true) => 1.0,
                (InputWeightStyle::PlusMinus, false) => -1.0,
            }
        });
        if let Ok(w) = rescale_to_radius(&w, config.spectral_radius) {
            return Ok(Esn { w, w_in });
        }
    }
    Err(Error::InvalidState(format!(
        "no non-degenerate W after {ESN_RETRIES} draws"
    )))
}

/// `x_t = tanh(Wᵀ x_{t−1} + W_in u_t)`.
pub fn esn_step(x: &DVector<f64>, u: f64, w: &DMatrix<f64>, w_in: &DVector<f64>) -> Result<DVector<f64>> {
    let n = x.len();
    if w.nrows() != n || w.ncols() != n || w_in.len() != n {
        return Err(Error::Dimension(format!(
            "state {n}, W {}x{}, W_in {}",
            w.nrows(),
            w.ncols(),
            w_in.len()
        )));
    }
    Ok((w.tr_mul(x) + w_in * u).map(f64::tanh))
}

impl Esn {
    /// States `x_1..x_M` from `x_0 = 0`.
    pub fn run(&self, inputs: &[f64]) -> Result<FeatureSeries> {
        let n = self.w_in.len();
        let mut x = DVector::zeros(n);
        let mut values = Vec::with_capacity(n * inputs.len());
        for &u in inputs {
            x = esn_step(&x, u, &self.w, &self.w_in)?;
            values.extend(x.iter());
        }
        FeatureSeries::new(inputs.len(), n, values)
    }
}

/// Trains on the split's training rows and returns the test NMSE.
pub fn readout_nmse(features: &FeatureSeries, targets: &[f64], split: Split) -> Result<f64> {
    let train = split.train_window();
    let test = split.test_window();
    test.check(targets.len())?;
    let weights = fit_regression(&features.slice(train)?, &targets[train.range()])?;
    let predictions = predict_scalar(&weights, &features.slice(test)?)?;
    nmse_of(&predictions, &targets[test.range()])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub nodes: Vec<usize>,
    pub radii: Vec<f64>,
    pub trials: usize,
    pub input_weights: InputWeightStyle,
    pub seed: u64,
}

impl SweepGrid {
    /// `N ∈ {2,5,10,20,50}`, radii `0.01..=1.00` in steps of 0.01, 100 trials.
    pub fn standard(seed: u64) -> Self {
        Self {
            nodes: vec![2, 5, 10, 20, 50],
            radii: (1..=100).map(|k| k as f64 / 100.0).collect(),
            trials: 100,
            input_weights: InputWeightStyle::ZeroOne,
            seed,
        }
    }
}

/// Sweep statistics for one task and node count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub task: String,
    pub nodes: usize,
    /// Mean NMSE over every (radius, trial).
    pub global_average: f64,
    /// Smallest per-radius trial-mean NMSE.
    pub global_minimum: f64,
    pub best_radius: f64,
    /// Per radius: (mean, std) over trials.
    pub per_radius: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub grid: SweepGrid,
    pub cells: Vec<SweepCell>,
}

impl SweepReport {
    pub fn cell(&self, task: &str, nodes: usize) -> Option<&SweepCell> {
        self.cells.iter().find(|c| c.task == task && c.nodes == nodes)
    }

    /// Summary rows `task,nodes,global_average,global_minimum,best_radius`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("task,nodes,global_average,global_minimum,best_radius\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{:?},{:?},{:?}",
                c.task, c.nodes, c.global_average, c.global_minimum, c.best_radius
            );
        }
        out
    }

    /// Long-format rows `task,nodes,radius,mean,std`.
    pub fn per_radius_csv(&self) -> String {
        let mut out = String::from("task,nodes,radius,mean,std\n");
        for c in &self.cells {
            for (r, (m, s)) in self.grid.radii.iter().zip(&c.per_radius) {
                let _ = writeln!(out, "{},{},{r:?},{m:?},{s:?}", c.task, c.nodes);
            }
        }
        out
    }
}

/// Every reservoir in the grid is scored on all `tasks` (name, targets);
/// the `(N, radius, trial)` reservoir is seeded from `derive_seed(seed, [N, r, trial])`.
pub fn esn_sweep(inputs: &[f64], tasks: &[(String, Vec<f64>)], grid: &SweepGrid, split: Split) -> Result<SweepReport> {
    if grid.nodes.is_empty() || grid.radii.is_empty() || grid.trials == 0 || tasks.is_empty() {
        return Err(Error::Config("sweep grid and task list must be non-empty".into()));
    }
    for (name, y) in tasks {
        if y.len() != inputs.len() {
            return Err(Error::Length(format!(
                "task {name}: {} targets vs {} inputs",
                y.len(),
                inputs.len()
            )));
        }
    }
    let points: Vec<(usize, usize, usize)> = grid
        .nodes
        .iter()
        .enumerate()
        .flat_map(|(a, _)| {
            (0..grid.radii.len()).flat_map(move |r| (0..grid.trials).map(move |k| (a, r, k)))
        })
        .collect();
    let scores: Vec<Vec<f64>> = points
        .par_iter()
        .map(|&(a, r, k)| {
            let nodes = grid.nodes[a];
            let radius = grid.radii[r];
            let ctx = || format!("N={nodes} radius={radius} trial={k}");
            let esn = build_esn(&EsnConfig {
                nodes,
                spectral_radius: radius,
                input_weights: grid.input_weights,
                seed: derive_seed(grid.seed, &[nodes as u64, r as u64, k as u64]),
            })
            .map_err(|e| e.context(ctx()))?;
            let features = esn.run(inputs).map_err(|e| e.context(ctx()))?;
            tasks
                .iter()
                .map(|(_, y)| readout_nmse(&features, y, split).map_err(|e| e.context(ctx())))
                .collect()
        })
        .collect::<Result<_>>()?;

    let per_node = grid.radii.len() * grid.trials;
    let mut cells = Vec::new();
    for (ti, (task, _)) in tasks.iter().enumerate() {
        for (a, &nodes) in grid.nodes.iter().enumerate() {
            let block = &scores[a * per_node..(a + 1) * per_node];
            let per_radius: Vec<(f64, f64)> = block
                .chunks(grid.trials)
                .map(|trials| mean_std(&trials.iter().map(|s| s[ti]).collect::<Vec<_>>()))
                .collect();
            let global_average = block.iter().map(|s| s[ti]).sum::<f64>() / per_node as f64;
            let (best, &(global_minimum, _)) = per_radius
                .iter()
                .enumerate()
                .min_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
                .expect("non-empty radius grid");
            cells.push(SweepCell {
                task: task.clone(),
                nodes,
                global_average,
                global_minimum,
                best_radius: grid.radii[best],
                per_radius,
            });
        }
    }
    Ok(SweepReport {
        grid: grid.clone(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn input_formula_points() {
        let spec = InputSignalSpec::standard();
        assert!((spec.value_at(0.0) - 0.1).abs() < 1e-15);
        assert!((spec.value_at(1.0) - 0.10078).abs() < 5e-6);
        let u = gen_input(&spec).unwrap();
        assert_eq!(u.len(), 100);
        assert_eq!(u[0], spec.value_at(0.0));
        assert!(u.iter().all(|&v| (0.0..=0.2).contains(&v)));
    }

    #[test]
    fn input_validation() {
        let mut spec = InputSignalSpec::standard();
        spec.period = 0.0;
        assert!(gen_input(&spec).is_err());
        spec = InputSignalSpec::standard();
        spec.length = 0;
        assert!(gen_input(&spec).is_err());
    }

    #[test]
    fn narma2_first_step() {
        let u = [0.3, 0.1, 0.2];
        let y = gen_narma(&NarmaSpec::narma2(), &u).unwrap();
        assert_eq!(y[0], 0.0);
        assert!((y[1] - (0.6 * 0.027 + 0.1)).abs() < 1e-15);
    }

    #[test]
    fn narma2_fixed_point() {
        let y = gen_narma(&NarmaSpec::narma2(), &[0.0; 200]).unwrap();
        let fixed = (3.0 - 5f64.sqrt()) / 4.0;
        assert!((y[199] - fixed).abs() < 1e-12);
    }

    #[test]
    fn narma_general_uses_zero_padding() {
        let u = [0.2, 0.2, 0.2, 0.2];
        let y = gen_narma(&NarmaSpec::narma(3), &u).unwrap();
        // u_{t-2} is padding for t < 3, so the input term vanishes.
        assert!((y[1] - 0.1).abs() < 1e-15);
        assert!(y[3] > y[2]);
    }

    #[test]
    fn narma_history_is_used() {
        let mut spec = NarmaSpec::narma2();
        spec.initial_history = vec![0.5, 0.25];
        let y = gen_narma(&spec, &[0.0, 0.0]).unwrap();
        assert_eq!(y[0], 0.5);
        assert!((y[1] - (0.4 * 0.5 + 0.4 * 0.5 * 0.25 + 0.1)).abs() < 1e-15);
    }

    #[test]
    fn narma_divergence() {
        let mut spec = NarmaSpec::narma2();
        spec.beta = 5.0;
        let err = gen_narma(&spec, &[1.0; 50]).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
    }

    #[test]
    fn narma_names() {
        assert_eq!(NarmaSpec::by_name("narma10").unwrap().order, 10);
        assert_eq!(NarmaSpec::by_name("narma2").unwrap().variant, NarmaVariant::Narma2);
        assert!(NarmaSpec::by_name("narmax").is_err());
    }

    #[test]
    fn diff_examples() {
        assert_eq!(preprocess_diff(&[1.0, 3.0, 6.0]).unwrap(), vec![2.0, 3.0]);
        assert_eq!(preprocess_diff(&[4.0; 5]).unwrap(), vec![0.0; 4]);
        let ramp: Vec<f64> = (0..6).map(|t| 0.5 * t as f64).collect();
        assert!(preprocess_diff(&ramp).unwrap().iter().all(|&d| d == 0.5));
        assert!(preprocess_diff(&[1.0]).is_err());
    }

    #[test]
    fn sensor_without_noise_repeats_class_waveform() {
        let d = gen_synthetic_sensor(&SensorSpec::standard(0.0, 3)).unwrap();
        assert_eq!(d.len(), 60);
        for (s, &l) in d.series.iter().zip(&d.labels) {
            assert_eq!(s, &d.series[l * 20]);
        }
    }

    #[test]
    fn sensor_is_seeded() {
        let a = gen_synthetic_sensor(&SensorSpec::standard(0.02, 9)).unwrap();
        let b = gen_synthetic_sensor(&SensorSpec::standard(0.02, 9)).unwrap();
        let c = gen_synthetic_sensor(&SensorSpec::standard(0.02, 10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(gen_synthetic_sensor(&SensorSpec { classes: 1, ..SensorSpec::standard(0.0, 0) }).is_err());
    }

    #[test]
    fn esn_step_examples() {
        let x0 = DVector::zeros(3);
        let zero_w = DMatrix::zeros(3, 3);
        let x = esn_step(&x0, 0.7, &zero_w, &DVector::zeros(3)).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
        let w = DMatrix::from_element(1, 1, 0.5);
        let w_in = DVector::from_element(1, 1.0);
        let x1 = esn_step(&DVector::zeros(1), 1.0, &w, &w_in).unwrap();
        assert!((x1[0] - 1f64.tanh()).abs() < 1e-15);
        assert!(esn_step(&DVector::zeros(1), 0.0, &w, &DVector::zeros(2)).is_err());
    }

    #[test]
    fn diagonal_rescale() {
        let w = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        let r = rescale_to_radius(&w, 0.5).unwrap();
        assert!((r[(0, 0)] - 0.5).abs() < 1e-15 && (r[(1, 1)] - 0.25).abs() < 1e-15);
        assert!(rescale_to_radius(&DMatrix::zeros(2, 2), 0.5).is_err());
    }

    #[test]
    fn build_esn_radius_and_determinism() {
        for style in [InputWeightStyle::ZeroOne, InputWeightStyle::PlusMinus] {
            let cfg = EsnConfig { nodes: 20, spectral_radius: 0.73, input_weights: style, seed: 4 };
            let a = build_esn(&cfg).unwrap();
            assert_eq!(a, build_esn(&cfg).unwrap());
            assert!((spectral_radius(&a.w).unwrap() - 0.73).abs() < 1e-9 * 0.73);
            let allowed: &[f64] = match style {
                InputWeightStyle::ZeroOne => &[0.0, 1.0],
                InputWeightStyle::PlusMinus => &[-1.0, 1.0],
            };
            assert!(a.w_in.iter().all(|v| allowed.contains(v)));
        }
    }

    #[test]
    fn degenerate_sweep_average_equals_minimum() {
        let u = gen_input(&InputSignalSpec::standard()).unwrap();
        let y = gen_narma(&NarmaSpec::narma2(), &u).unwrap();
        let grid = SweepGrid { nodes: vec![3], radii: vec![0.5], trials: 1, input_weights: InputWeightStyle::ZeroOne, seed: 1 };
        let report = esn_sweep(&u, &[("narma2".into(), y)], &grid, Split::NARMA).unwrap();
        let c = report.cell("narma2", 3).unwrap();
        assert_eq!(c.global_average, c.global_minimum);
    }
}
