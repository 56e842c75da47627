use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use qreservoir::analysis::{gap_summary, stationarity_report, VarianceConvention};
use qreservoir::benchmarks::gen_input;
use qreservoir::engine::{FeatureSeries, Split};
use qreservoir::experiment::{export_circuits, load_config, run_experiment, ExperimentConfig, Task, VERSION};
use qreservoir::{Error, Result};

/// Noisy quantum reservoir computing experiments.
///
/// Configs are TOML. Defaults: washout/train/test 10/70/20, 8192 shots,
/// a = 2 for NARMA and π for classify, 10 trials, 8 qubits paired
/// (0,1),(2,3),…, noise "preset:noiseless".
#[derive(Parser)]
#[command(name = "qreservoir", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run(Common),
    /// ESN spectral-radius sweep (default grid unless the config overrides it).
    SweepEsn(SweepArgs),
    /// Write one OpenQASM file per timestep plus a manifest.
    ExportQasm(Common),
    /// Stationarity report for a features CSV, or for the reservoir of a config.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(short, long)]
    config: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct Overrides {
    /// Override the top-level seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(short, long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Trials per (N, radius) point.
    #[arg(long)]
    trials: Option<usize>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Features CSV (`t,z0,z1,…`).
    #[arg(long, conflicts_with = "config")]
    features: Option<PathBuf>,
    #[arg(short, long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    washout: usize,
    #[arg(long, default_value_t = 70)]
    train: usize,
    #[arg(long, default_value_t = 20)]
    test: usize,
    /// Use the n−1 variance instead of the population variance.
    #[arg(long)]
    sample_variance: bool,
    #[command(flatten)]
    overrides: Overrides,
}

fn apply(mut config: ExperimentConfig, o: &Overrides) -> ExperimentConfig {
    if let Some(s) = o.seed {
        config.seed = s;
    }
    if let Some(w) = o.workers {
        config.workers = Some(w);
    }
    if let Some(out) = &o.out {
        config.output_dir = out.clone();
    }
    config
}

fn execute(cli: Cli) -> Result<serde_json::Value> {
    match cli.command {
        Command::Run(c) => {
            let config = apply(load_config(&c.config)?, &c.overrides);
            let outcome = run_experiment(&config)?;
            Ok(json!({"output_dir": config.output_dir, "summary": brief(outcome.summary)}))
        }
        Command::SweepEsn(a) => {
            let mut config = match &a.config {
                Some(p) => load_config(p)?,
                None => ExperimentConfig::defaults(Task::EsnSweep),
            };
            config.task = Task::EsnSweep;
            if let Some(t) = a.trials {
                config.esn.trials = t;
            }
            let config = apply(config, &a.overrides);
            let outcome = run_experiment(&config)?;
            Ok(json!({"output_dir": config.output_dir, "cells": outcome.summary["cells"]}))
        }
        Command::ExportQasm(c) => {
            let config = apply(load_config(&c.config)?, &c.overrides);
            let inputs = gen_input(&config.input)?;
            let dir = config.output_dir.join("qasm");
            let files = export_circuits(&config, &inputs, &dir)?;
            Ok(json!({"directory": dir, "files": files.len()}))
        }
        Command::Analyze(a) => {
            if let Some(path) = &a.features {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                    path: path.display().to_string(),
                    source: e,
                })?;
                let features = FeatureSeries::from_csv(&text)?;
                let split = Split {
                    washout: a.washout,
                    train: a.train,
                    test: a.test,
                };
                let convention = if a.sample_variance {
                    VarianceConvention::Sample
                } else {
                    VarianceConvention::Population
                };
                let report =
                    stationarity_report(&features, split.train_window(), split.test_window(), convention)?;
                eprint!("{}", report.to_table());
                let manifest = json!({
                    "tool": "qreservoir",
                    "version": VERSION,
                    "task": "stationarity",
                    "source": path,
                    "split": {"washout": a.washout, "train": a.train, "test": a.test},
                    "variance": convention,
                });
                Ok(json!({"manifest": manifest, "report": report, "gaps": gap_summary(&report)}))
            } else if let Some(path) = &a.config {
                let mut config = load_config(path)?;
                config.task = Task::Stationarity;
                let config = apply(config, &a.overrides);
                let outcome = run_experiment(&config)?;
                Ok(json!({"output_dir": config.output_dir, "summary": brief(outcome.summary)}))
            } else {
                Err(Error::Config("analyze needs --features or --config".into()))
            }
        }
    }
}

/// Console copy of a summary; the manifest stays in the written file.
fn brief(mut summary: serde_json::Value) -> serde_json::Value {
    if let Some(map) = summary.as_object_mut() {
        map.remove("manifest");
    }
    summary
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(v) => {
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&v).expect("json"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            let body = json!({"error": {"kind": e.kind(), "message": e.to_string()}});
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}
