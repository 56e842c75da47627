//! Experiment configs and the batch runner behind the `qreservoir` binary.
//!
//! A config is a TOML document. Only `task` is required:
//!
//! ```toml
//! task = "narma2"            # narma2 | narma5 | narma10 | classify | esn-sweep | stationarity
//! noise = "preset:strong-dense"   # or a path to a profile file
//! seed = 2024
//! trials = 10
//!
//! [reservoir]
//! qubits = 8
//! scale = 2.0                # defaults to 2 for NARMA, π for classify
//! shots = 8192               # or "exact"
//! ```
//!
//! Every unset field takes the default listed in [`ExperimentConfig::defaults`].

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{gap_summary, stationarity_report, target_conventions, VarianceConvention};
use crate::benchmarks::{
    esn_sweep, gen_input, gen_narma, gen_synthetic_sensor, InputSignalSpec, InputWeightStyle,
    LabeledSeriesDataset, NarmaSpec, SensorSpec, SweepGrid,
};
use crate::circuit::{build_layer, export_qasm, SubsystemLayout};
use crate::engine::{derive_seed, FeatureSeries, ReservoirConfig, Shots, Split, Window};
use crate::error::{Error, Result};
use crate::noise::{load_noise_profile, DeviceNoiseProfile};
use crate::readout::{
    classify_blocks_cv, fit_linear_baseline, fit_linear_classifier_baseline, fit_regression,
    mean_std, nmse_of, predict_scalar, Alignment, CvReport,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Narma2,
    Narma5,
    Narma10,
    Classify,
    EsnSweep,
    Stationarity,
}

pub const TASK_NAMES: [&str; 6] = ["narma2", "narma5", "narma10", "classify", "esn-sweep", "stationarity"];

impl Task {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "narma2" => Task::Narma2,
            "narma5" => Task::Narma5,
            "narma10" => Task::Narma10,
            "classify" => Task::Classify,
            "esn-sweep" => Task::EsnSweep,
            "stationarity" => Task::Stationarity,
            other => {
                return Err(Error::Config(format!(
                    "task: unknown task `{other}`; valid tasks are {}",
                    TASK_NAMES.join(", ")
                )))
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Narma2 => "narma2",
            Task::Narma5 => "narma5",
            Task::Narma10 => "narma10",
            Task::Classify => "classify",
            Task::EsnSweep => "esn-sweep",
            Task::Stationarity => "stationarity",
        }
    }

    pub fn is_narma(self) -> bool {
        matches!(self, Task::Narma2 | Task::Narma5 | Task::Narma10)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReservoirSettings {
    pub qubits: usize,
    pub pairs: Vec<(usize, usize)>,
    pub scale: f64,
    pub shots: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifySettings {
    pub classes: usize,
    pub samples_per_class: usize,
    /// Raw samples per series, before finite differencing.
    pub timesteps: usize,
    pub sensor_noise: f64,
    pub sensor_seed: u64,
    pub washout: usize,
    pub folds: usize,
    pub shuffle_labels: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EsnSettings {
    pub nodes: Vec<usize>,
    pub radii: Vec<f64>,
    pub trials: usize,
    pub input_weights: InputWeightStyle,
    pub tasks: Vec<String>,
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub task: Task,
    pub seed: u64,
    pub trials: usize,
    /// Profile path or `preset:<name>`.
    pub noise: String,
    pub output_dir: PathBuf,
    pub reservoir: ReservoirSettings,
    pub split: Split,
    pub input: InputSignalSpec,
    pub narma_history: Vec<f64>,
    pub baseline_alignment: Alignment,
    pub variance: VarianceConvention,
    pub classify: ClassifySettings,
    pub esn: EsnSettings,
    /// Thread count; never affects results.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    /// Reference settings for `task`: split 10/70/20, `S = 8192`, `a = 2` (NARMA)
    /// or `π` (classify), 10 trials, 8 qubits, noiseless profile.
    pub fn defaults(task: Task) -> Self {
        let qubits = 8;
        Self {
            task,
            seed: 0,
            trials: 10,
            noise: "preset:noiseless".into(),
            output_dir: PathBuf::from("out"),
            reservoir: ReservoirSettings {
                qubits,
                pairs: adjacent_pairs(qubits),
                scale: if task == Task::Classify { PI } else { 2.0 },
                shots: "8192".into(),
            },
            split: Split::NARMA,
            input: InputSignalSpec::standard(),
            narma_history: Vec::new(),
            baseline_alignment: Alignment::Concurrent,
            variance: VarianceConvention::Population,
            classify: ClassifySettings {
                classes: 3,
                samples_per_class: 20,
                timesteps: 90,
                sensor_noise: 0.02,
                sensor_seed: 0,
                washout: 40,
                folds: 10,
                shuffle_labels: false,
            },
            esn: EsnSettings {
                nodes: vec![2, 5, 10, 20, 50],
                radii: (1..=100).map(|k| k as f64 / 100.0).collect(),
                trials: 100,
                input_weights: InputWeightStyle::ZeroOne,
                tasks: vec!["narma2".into(), "narma5".into(), "narma10".into()],
            },
            workers: None,
        }
    }

    pub fn shots(&self) -> Result<Shots> {
        Shots::parse(&self.reservoir.shots).map_err(|e| e.context("reservoir.shots"))
    }

    pub fn layout(&self) -> Result<SubsystemLayout> {
        SubsystemLayout::new(self.reservoir.qubits, self.reservoir.pairs.clone())
            .map_err(|e| e.context("reservoir.pairs"))
    }

    pub fn noise_profile(&self) -> Result<DeviceNoiseProfile> {
        load_noise_profile(&self.noise, self.reservoir.qubits).map_err(|e| e.context("noise"))
    }

    /// Reservoir settings for one trial, seeded from the trial substream.
    pub fn reservoir_config(&self, trial: usize) -> Result<ReservoirConfig> {
        let config = ReservoirConfig {
            layout: self.layout()?,
            scale: self.reservoir.scale,
            profile: self.noise_profile()?,
            shots: self.shots()?,
            seed: derive_seed(self.seed, &[trial as u64]),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::range("trials", "must be at least 1"));
        }
        self.input.validate().map_err(|e| e.context("input"))?;
        if self.split.total() > self.input.length {
            return Err(Error::Config(format!(
                "split: washout+train+test = {} exceeds input.length {}",
                self.split.total(),
                self.input.length
            )));
        }
        if self.split.train == 0 || self.split.test == 0 {
            return Err(Error::range("split", "train and test must be non-empty"));
        }
        match self.task {
            Task::EsnSweep => {
                if self.esn.nodes.is_empty() || self.esn.radii.is_empty() || self.esn.trials == 0 {
                    return Err(Error::range("esn", "nodes, radii and trials must be non-empty"));
                }
                for t in &self.esn.tasks {
                    NarmaSpec::by_name(t).map_err(|e| e.context("esn.tasks"))?;
                }
            }
            _ => {
                self.reservoir_config(0)?;
            }
        }
        if self.task == Task::Classify {
            let c = &self.classify;
            if c.timesteps < 3 || c.washout + 1 >= c.timesteps {
                return Err(Error::range(
                    "classify.washout",
                    format!("washout {} leaves no window in {} timesteps", c.washout, c.timesteps),
                ));
            }
            if c.folds < 2 {
                return Err(Error::range("classify.folds", "need at least 2"));
            }
        }
        Ok(())
    }

    /// Classification window `t_s..t_e` on the differenced series.
    pub fn classify_window(&self) -> Window {
        Window::new(self.classify.washout + 1, self.classify.timesteps - 1)
    }
}

fn adjacent_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n / 2).map(|k| (2 * k, 2 * k + 1)).collect()
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ShotsDoc {
    Count(i64),
    Text(String),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReservoirDoc {
    qubits: Option<i64>,
    pairs: Option<Vec<(usize, usize)>>,
    scale: Option<f64>,
    shots: Option<ShotsDoc>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SplitDoc {
    washout: Option<usize>,
    train: Option<usize>,
    test: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputDoc {
    alpha_bar: Option<f64>,
    beta_bar: Option<f64>,
    gamma_bar: Option<f64>,
    period: Option<f64>,
    amplitude: Option<f64>,
    length: Option<usize>,
    origin: Option<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NarmaDoc {
    initial_history: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BaselineDoc {
    alignment: Option<Alignment>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnalysisDoc {
    variance: Option<VarianceConvention>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassifyDoc {
    classes: Option<usize>,
    samples_per_class: Option<usize>,
    timesteps: Option<usize>,
    sensor_noise: Option<f64>,
    sensor_seed: Option<u64>,
    washout: Option<usize>,
    folds: Option<usize>,
    shuffle_labels: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EsnDoc {
    nodes: Option<Vec<usize>>,
    radii: Option<Vec<f64>>,
    trials: Option<usize>,
    input_weights: Option<InputWeightStyle>,
    tasks: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    task: String,
    seed: Option<u64>,
    trials: Option<i64>,
    noise: Option<String>,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    reservoir: ReservoirDoc,
    #[serde(default)]
    split: SplitDoc,
    #[serde(default)]
    input: InputDoc,
    #[serde(default)]
    narma: NarmaDoc,
    #[serde(default)]
    baseline: BaselineDoc,
    #[serde(default)]
    analysis: AnalysisDoc,
    #[serde(default)]
    classify: ClassifyDoc,
    #[serde(default)]
    esn: EsnDoc,
}

/// Parses and validates a config document. Relative profile paths resolve
/// against `base_dir`.
pub fn parse_config(text: &str, base_dir: Option<&Path>) -> Result<ExperimentConfig> {
    let doc: ConfigDoc = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let task = Task::parse(&doc.task)?;
    let mut c = ExperimentConfig::defaults(task);
    if let Some(v) = doc.seed {
        c.seed = v;
    }
    if let Some(v) = doc.trials {
        if v < 1 {
            return Err(Error::range("trials", format!("{v} is not a positive count")));
        }
        c.trials = v as usize;
    }
    if let Some(v) = doc.noise {
        c.noise = match (v.starts_with("preset:"), base_dir) {
            (false, Some(dir)) if Path::new(&v).is_relative() => dir.join(&v).display().to_string(),
            _ => v,
        };
        if !c.noise.starts_with("preset:") && !Path::new(&c.noise).is_file() {
            return Err(Error::Config(format!("noise: profile file `{}` does not exist", c.noise)));
        }
    }
    if let Some(v) = doc.output_dir {
        c.output_dir = v;
    }

    let r = doc.reservoir;
    if let Some(q) = r.qubits {
        if q < 2 {
            return Err(Error::range("reservoir.qubits", format!("{q} is below 2")));
        }
        c.reservoir.qubits = q as usize;
        c.reservoir.pairs = adjacent_pairs(q as usize);
    }
    if let Some(p) = r.pairs {
        c.reservoir.pairs = p;
    }
    if let Some(a) = r.scale {
        c.reservoir.scale = a;
    }
    match r.shots {
        Some(ShotsDoc::Count(s)) if s < 1 => {
            return Err(Error::range("reservoir.shots", format!("{s} is not a positive count")))
        }
        Some(ShotsDoc::Count(s)) => c.reservoir.shots = s.to_string(),
        Some(ShotsDoc::Text(s)) => c.reservoir.shots = s,
        None => {}
    }

    let s = doc.split;
    c.split = Split {
        washout: s.washout.unwrap_or(c.split.washout),
        train: s.train.unwrap_or(c.split.train),
        test: s.test.unwrap_or(c.split.test),
    };

    let i = doc.input;
    c.input = InputSignalSpec {
        alpha_bar: i.alpha_bar.unwrap_or(c.input.alpha_bar),
        beta_bar: i.beta_bar.unwrap_or(c.input.beta_bar),
        gamma_bar: i.gamma_bar.unwrap_or(c.input.gamma_bar),
        period: i.period.unwrap_or(c.input.period),
        amplitude: i.amplitude.unwrap_or(c.input.amplitude),
        length: i.length.unwrap_or(c.input.length),
        origin: i.origin.unwrap_or(c.input.origin),
    };
    if let Some(h) = doc.narma.initial_history {
        c.narma_history = h;
    }
    if let Some(a) = doc.baseline.alignment {
        c.baseline_alignment = a;
    }
    if let Some(v) = doc.analysis.variance {
        c.variance = v;
    }

    let k = doc.classify;
    let d = &mut c.classify;
    d.classes = k.classes.unwrap_or(d.classes);
    d.samples_per_class = k.samples_per_class.unwrap_or(d.samples_per_class);
    d.timesteps = k.timesteps.unwrap_or(d.timesteps);
    d.sensor_noise = k.sensor_noise.unwrap_or(d.sensor_noise);
    d.sensor_seed = k.sensor_seed.unwrap_or(d.sensor_seed);
    d.washout = k.washout.unwrap_or(d.washout);
    d.folds = k.folds.unwrap_or(d.folds);
    d.shuffle_labels = k.shuffle_labels.unwrap_or(d.shuffle_labels);

    let e = doc.esn;
    let d = &mut c.esn;
    if let Some(v) = e.nodes {
        d.nodes = v;
    }
    if let Some(v) = e.radii {
        d.radii = v;
    }
    d.trials = e.trials.unwrap_or(d.trials);
    d.input_weights = e.input_weights.unwrap_or(d.input_weights);
    if let Some(v) = e.tasks {
        d.tasks = v;
    }

    c.validate()?;
    Ok(c)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path.parent()).map_err(|e| e.context(path.display().to_string()))
}

/// Provenance embedded in every report.
pub fn manifest(config: &ExperimentConfig) -> Value {
    json!({
        "tool": "qreservoir",
        "version": VERSION,
        "task": config.task.name(),
        "seed": config.seed,
        "config": serde_json::to_value(config).expect("config serializes"),
        "noise_profile": config.noise_profile().ok().map(|p| p.to_toml_string()),
        "seed_derivation": "trial k uses derive_seed(seed, [k]); timestep t draws from ChaCha8 stream t",
    })
}

/// Two significant digits, e.g. `1.8e-5`.
pub fn two_sig(x: f64) -> String {
    format!("{x:.1e}")
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json serializes");
    text.push('\n');
    write(path, &text)
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub summary: Value,
    pub files: Vec<PathBuf>,
}

/// Runs the configured task, writing reports into `config.output_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome> {
    config.validate()?;
    let out = &config.output_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    with_workers(config.workers, || match config.task {
        Task::Narma2 | Task::Narma5 | Task::Narma10 => run_narma(config),
        Task::Classify => run_classify(config),
        Task::EsnSweep => run_esn_sweep(config),
        Task::Stationarity => run_stationarity(config),
    })?
}

fn narma_data(config: &ExperimentConfig, task: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    let u = gen_input(&config.input)?;
    let mut spec = NarmaSpec::by_name(task)?;
    spec.initial_history = config.narma_history.clone();
    let y = gen_narma(&spec, &u)?;
    Ok((u, y))
}

fn trial_features(config: &ExperimentConfig, inputs: &[f64]) -> Result<Vec<FeatureSeries>> {
    (0..config.trials)
        .into_par_iter()
        .map(|k| {
            let rc = config.reservoir_config(k)?;
            crate::engine::run_reservoir(inputs, &rc).map_err(|e| e.context(format!("trial {k}")))
        })
        .collect()
}

/// Per-trial NARMA results.
#[derive(Debug, Clone, PartialEq)]
pub struct NarmaTrial {
    pub features: FeatureSeries,
    /// Predictions for every timestep.
    pub predictions: Vec<f64>,
    pub nmse: f64,
}

/// Reservoir features, readout and test NMSE for each trial.
pub fn narma_trials(config: &ExperimentConfig, inputs: &[f64], targets: &[f64]) -> Result<Vec<NarmaTrial>> {
    let split = config.split;
    trial_features(config, inputs)?
        .into_iter()
        .map(|features| {
            let train = split.train_window();
            let test = split.test_window();
            let w = fit_regression(&features.slice(train)?, &targets[train.range()])?;
            let predictions = predict_scalar(&w, &features)?;
            let nmse = nmse_of(&predictions[test.range()], &targets[test.range()])?;
            Ok(NarmaTrial {
                features,
                predictions,
                nmse,
            })
        })
        .collect()
}

fn run_narma(config: &ExperimentConfig) -> Result<RunOutcome> {
    let out = &config.output_dir;
    let (u, y) = narma_data(config, config.task.name())?;
    let trials = narma_trials(config, &u, &y)?;
    let lr = fit_linear_baseline(&u, &y, config.split, config.baseline_alignment)?;
    let mut files = Vec::new();

    for (k, t) in trials.iter().enumerate() {
        let path = out.join(format!("features_trial{k:02}.csv"));
        write(&path, &t.features.to_csv())?;
        files.push(path);
    }

    let mut csv = String::from("t,u,y");
    for k in 0..trials.len() {
        let _ = write!(csv, ",qr_trial{k:02}");
    }
    csv.push('\n');
    for t in 0..u.len() {
        let _ = write!(csv, "{},{:?},{:?}", t + 1, u[t], y[t]);
        for tr in &trials {
            let _ = write!(csv, ",{:?}", tr.predictions[t]);
        }
        csv.push('\n');
    }
    let path = out.join("predictions.csv");
    write(&path, &csv)?;
    files.push(path);

    let stationarity = stationarity_report(
        &trials[0].features,
        config.split.train_window(),
        config.split.test_window(),
        config.variance,
    )?;
    let manifest = manifest(config);
    let target_stats: Vec<Value> = target_conventions(&y, config.split)?
        .into_iter()
        .map(|(phase, r)| {
            let c = &r.channels[0];
            json!({
                "phase": phase, "variance": r.convention,
                "train": {"first": r.train.first, "last": r.train.last, "mean": c.mean_train, "variance": c.var_train},
                "test": {"first": r.test.first, "last": r.test.last, "mean": c.mean_test, "variance": c.var_test},
            })
        })
        .collect();
    let stat_json = json!({
        "manifest": manifest,
        "features_trial": 0,
        "features": stationarity,
        "gaps": gap_summary(&stationarity),
        "targets": target_stats,
    });
    let path = out.join("stationarity.json");
    write_json(&path, &stat_json)?;
    files.push(path);
    let path = out.join("stationarity.txt");
    write(&path, &format!("# qreservoir {VERSION} task={} seed={}\n{}", config.task.name(), config.seed, stationarity.to_table()))?;
    files.push(path);

    let nmses: Vec<f64> = trials.iter().map(|t| t.nmse).collect();
    let (mean, std) = mean_std(&nmses);
    let summary = json!({
        "manifest": manifest,
        "task": config.task.name(),
        "qr": {
            "nmse_mean": mean, "nmse_std": std,
            "nmse_mean_display": two_sig(mean), "nmse_std_display": two_sig(std),
            "nmse_per_trial": nmses,
        },
        "lr": {
            "nmse": lr.nmse, "nmse_display": two_sig(lr.nmse),
            "w": lr.w, "b0": lr.b0, "alignment": lr.alignment,
        },
        "files": file_names(&files),
    });
    let path = out.join("summary.json");
    write_json(&path, &summary)?;
    files.push(path);
    Ok(RunOutcome { summary, files })
}

fn file_names(files: &[PathBuf]) -> Vec<String> {
    files
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect()
}

/// Synthetic sensor data, differenced, with labels optionally shuffled.
pub fn classification_data(config: &ExperimentConfig) -> Result<LabeledSeriesDataset> {
    let c = &config.classify;
    let raw = gen_synthetic_sensor(&SensorSpec {
        classes: c.classes,
        samples_per_class: c.samples_per_class,
        timesteps: c.timesteps,
        noise: c.sensor_noise,
        seed: c.sensor_seed,
    })?;
    let mut data = raw.preprocessed()?;
    if c.shuffle_labels {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &[u64::MAX]));
        data.labels.shuffle(&mut rng);
    }
    Ok(data)
}

/// Reservoir feature blocks `t_s..t_e` for every sample of one trial; each
/// sample starts from `|+⟩` and uses its own shot substream.
pub fn classification_blocks(
    config: &ExperimentConfig,
    data: &LabeledSeriesDataset,
    trial: usize,
) -> Result<Vec<FeatureSeries>> {
    let window = config.classify_window();
    let base = config.reservoir_config(trial)?;
    data.series
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut rc = base.clone();
            rc.seed = derive_seed(base.seed, &[i as u64]);
            crate::engine::run_reservoir(s, &rc)?
                .slice(window)
                .map_err(|e| e.context(format!("trial {trial} sample {i}")))
        })
        .collect()
}

fn cv_json(r: &CvReport) -> Value {
    json!({
        "accuracy_mean": r.mean_accuracy,
        "accuracy_std": r.std_accuracy,
        "accuracy_mean_display": two_sig(r.mean_accuracy),
        "accuracy_std_display": two_sig(r.std_accuracy),
        "fold_accuracies": r.fold_accuracies,
        "confusion": r.confusion.counts(),
        "ties": r.ties,
    })
}

fn run_classify(config: &ExperimentConfig) -> Result<RunOutcome> {
    let out = &config.output_dir;
    let c = &config.classify;
    let data = classification_data(config)?;
    let cv_seed = derive_seed(config.seed, &[u64::MAX - 1]);
    let reports: Vec<CvReport> = (0..config.trials)
        .map(|k| {
            let blocks = classification_blocks(config, &data, k)?;
            classify_blocks_cv(&blocks, &data.labels, c.classes, c.folds, cv_seed)
                .map_err(|e| e.context(format!("trial {k}")))
        })
        .collect::<Result<_>>()?;
    let lr = fit_linear_classifier_baseline(
        &data.series,
        &data.labels,
        c.classes,
        config.classify_window(),
        c.folds,
        cv_seed,
    )?;
    let mut files = Vec::new();
    let path = out.join("dataset.csv");
    let header = format!(
        "differenced synthetic-sensor classes={} samples_per_class={} timesteps={} noise={} seed={} shuffled={}",
        c.classes, c.samples_per_class, c.timesteps, c.sensor_noise, c.sensor_seed, c.shuffle_labels
    );
    write(&path, &data.to_csv(&header))?;
    files.push(path);

    let mut csv = String::from("trial,sample,label,predicted\n");
    for (k, r) in reports.iter().enumerate() {
        for (i, p) in r.predictions.iter().enumerate() {
            let _ = writeln!(csv, "{k},{i},{},{p}", data.labels[i]);
        }
    }
    let path = out.join("predictions.csv");
    write(&path, &csv)?;
    files.push(path);

    let pooled: Vec<f64> = reports.iter().flat_map(|r| r.fold_accuracies.iter().copied()).collect();
    let (mean, std) = mean_std(&pooled);
    let summary = json!({
        "manifest": manifest(config),
        "task": "classify",
        "window": {"first": config.classify_window().first, "last": config.classify_window().last},
        "qr": {
            "accuracy_mean": mean, "accuracy_std": std,
            "accuracy_mean_display": two_sig(mean), "accuracy_std_display": two_sig(std),
            "trials": reports.iter().map(cv_json).collect::<Vec<_>>(),
        },
        "lr": cv_json(&lr),
        "files": file_names(&files),
    });
    let path = out.join("summary.json");
    write_json(&path, &summary)?;
    files.push(path);
    Ok(RunOutcome { summary, files })
}

fn run_esn_sweep(config: &ExperimentConfig) -> Result<RunOutcome> {
    let out = &config.output_dir;
    let u = gen_input(&config.input)?;
    let tasks = config
        .esn
        .tasks
        .iter()
        .map(|t| Ok((t.clone(), narma_data(config, t)?.1)))
        .collect::<Result<Vec<_>>>()?;
    let grid = SweepGrid {
        nodes: config.esn.nodes.clone(),
        radii: config.esn.radii.clone(),
        trials: config.esn.trials,
        input_weights: config.esn.input_weights,
        seed: config.seed,
    };
    let report = esn_sweep(&u, &tasks, &grid, config.split)?;
    let mut files = Vec::new();
    let path = out.join("esn_sweep.csv");
    write(&path, &report.to_csv())?;
    files.push(path);
    let path = out.join("esn_per_radius.csv");
    write(&path, &report.per_radius_csv())?;
    files.push(path);
    let cells: Vec<Value> = report
        .cells
        .iter()
        .map(|c| {
            json!({
                "task": c.task, "nodes": c.nodes,
                "global_average": c.global_average, "global_minimum": c.global_minimum,
                "global_average_display": two_sig(c.global_average),
                "global_minimum_display": two_sig(c.global_minimum),
                "best_radius": c.best_radius,
            })
        })
        .collect();
    let summary = json!({
        "manifest": manifest(config),
        "task": "esn-sweep",
        "cells": cells,
        "files": file_names(&files),
    });
    let path = out.join("summary.json");
    write_json(&path, &summary)?;
    files.push(path);
    Ok(RunOutcome { summary, files })
}

fn run_stationarity(config: &ExperimentConfig) -> Result<RunOutcome> {
    let out = &config.output_dir;
    let u = gen_input(&config.input)?;
    let features = trial_features(config, &u)?;
    let mut files = Vec::new();
    let mut reports = Vec::new();
    let mut table = format!("# qreservoir {VERSION} task=stationarity seed={}\n", config.seed);
    for (k, f) in features.iter().enumerate() {
        let path = out.join(format!("features_trial{k:02}.csv"));
        write(&path, &f.to_csv())?;
        files.push(path);
        let r = stationarity_report(f, config.split.train_window(), config.split.test_window(), config.variance)?;
        let _ = write!(table, "\n## trial {k}\n{}", r.to_table());
        reports.push(json!({"trial": k, "report": r, "gaps": gap_summary(&r)}));
    }
    let path = out.join("stationarity.txt");
    write(&path, &table)?;
    files.push(path);
    let summary = json!({
        "manifest": manifest(config),
        "task": "stationarity",
        "trials": reports,
        "files": file_names(&files),
    });
    let path = out.join("summary.json");
    write_json(&path, &summary)?;
    files.push(path);
    Ok(RunOutcome { summary, files })
}

/// One QASM file per timestep (the depth-`t` circuit) plus `manifest.json`.
pub fn export_circuits(config: &ExperimentConfig, inputs: &[f64], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let layout = config.layout()?;
    let shots = match config.shots()? {
        Shots::Exact => Value::from("exact"),
        Shots::Finite(s) => Value::from(s),
    };
    let width = inputs.len().to_string().len().max(3);
    let mut files = Vec::with_capacity(inputs.len() + 1);
    let mut entries = Vec::with_capacity(inputs.len());
    for t in 1..=inputs.len() {
        let name = format!("circuit_t{t:0width$}.qasm");
        let path = dir.join(&name);
        write(&path, &export_qasm(&inputs[..t], &layout, config.reservoir.scale)?)?;
        let gates = layout.num_qubits() + t * build_layer(0.0, &layout, 0.0)?.gates().len();
        entries.push(json!({"t": t, "file": name, "gates": gates, "shots": shots}));
        files.push(path);
    }
    let path = dir.join("manifest.json");
    write_json(
        &path,
        &json!({"manifest": manifest(config), "shots": shots, "circuits": entries}),
    )?;
    files.push(path);
    Ok(files)
}
