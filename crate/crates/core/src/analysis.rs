//! Train/test stationarity diagnostics for feature channels and targets.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::engine::{FeatureSeries, Split, Window};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceConvention {
    /// Divide by `n`.
    #[default]
    Population,
    /// Divide by `n − 1`.
    Sample,
}

/// Which rows count as the training phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseConvention {
    /// Training rows only (`washout+1..washout+train`).
    ExcludeWashout,
    /// Washout rows count as training (`1..washout+train`).
    IncludeWashout,
}

impl PhaseConvention {
    pub fn windows(self, split: Split) -> (Window, Window) {
        let train = split.train_window();
        let train = match self {
            PhaseConvention::ExcludeWashout => train,
            PhaseConvention::IncludeWashout => Window::new(1, train.last),
        };
        (train, split.test_window())
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn variance(values: &[f64], convention: VarianceConvention) -> f64 {
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    match convention {
        VarianceConvention::Population => ss / values.len() as f64,
        VarianceConvention::Sample if values.len() > 1 => ss / (values.len() - 1) as f64,
        VarianceConvention::Sample => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub channel: usize,
    pub mean_train: f64,
    pub mean_test: f64,
    pub abs_mean_train: f64,
    pub abs_mean_test: f64,
    pub var_train: f64,
    pub var_test: f64,
    pub abs_mean_gap: f64,
    /// `var_test / var_train`; NaN when both are zero, ∞ when only the train variance is.
    pub var_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub train: Window,
    pub test: Window,
    pub convention: VarianceConvention,
    pub channels: Vec<ChannelStats>,
}

pub fn stationarity_report(
    series: &FeatureSeries,
    train: Window,
    test: Window,
    convention: VarianceConvention,
) -> Result<StationarityReport> {
    train.check(series.timesteps())?;
    test.check(series.timesteps())?;
    if train.last >= test.first && test.last >= train.first {
        return Err(Error::Window(format!(
            "train [{}, {}] overlaps test [{}, {}]",
            train.first, train.last, test.first, test.last
        )));
    }
    let channels = (0..series.width())
        .map(|ch| {
            let a = series.channel(ch, train);
            let b = series.channel(ch, test);
            let (mean_train, mean_test) = (mean(&a), mean(&b));
            let (var_train, var_test) = (variance(&a, convention), variance(&b, convention));
            ChannelStats {
                channel: ch,
                mean_train,
                mean_test,
                abs_mean_train: mean_train.abs(),
                abs_mean_test: mean_test.abs(),
                var_train,
                var_test,
                abs_mean_gap: (mean_train - mean_test).abs(),
                var_ratio: if var_train == 0.0 && var_test == 0.0 {
                    f64::NAN
                } else {
                    var_test / var_train
                },
            }
        })
        .collect();
    Ok(StationarityReport {
        train,
        test,
        convention,
        channels,
    })
}

/// Report for a scalar sequence such as a NARMA target.
pub fn target_report(
    targets: &[f64],
    train: Window,
    test: Window,
    convention: VarianceConvention,
) -> Result<StationarityReport> {
    let series = FeatureSeries::new(targets.len(), 1, targets.to_vec())?;
    stationarity_report(&series, train, test, convention)
}

/// Every window/variance convention for a target sequence.
pub fn target_conventions(
    targets: &[f64],
    split: Split,
) -> Result<Vec<(PhaseConvention, StationarityReport)>> {
    let mut out = Vec::new();
    for phase in [PhaseConvention::ExcludeWashout, PhaseConvention::IncludeWashout] {
        for var in [VarianceConvention::Population, VarianceConvention::Sample] {
            let (train, test) = phase.windows(split);
            out.push((phase, target_report(targets, train, test, var)?));
        }
    }
    Ok(out)
}

/// Channels ranked by train/test drift, largest first; ties keep channel order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSummary {
    pub by_mean_gap: Vec<(usize, f64)>,
    /// `|ln(var_test / var_train)|`; zero when both variances vanish.
    pub by_log_variance_gap: Vec<(usize, f64)>,
}

pub fn gap_summary(report: &StationarityReport) -> GapSummary {
    let rank = |mut v: Vec<(usize, f64)>| {
        v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        v
    };
    GapSummary {
        by_mean_gap: rank(report.channels.iter().map(|c| (c.channel, c.abs_mean_gap)).collect()),
        by_log_variance_gap: rank(
            report
                .channels
                .iter()
                .map(|c| {
                    let g = if c.var_ratio.is_nan() { 0.0 } else { c.var_ratio.ln().abs() };
                    (c.channel, g)
                })
                .collect(),
        ),
    }
}

impl StationarityReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "channel,mean_train,mean_test,abs_mean_train,abs_mean_test,var_train,var_test,abs_mean_gap,var_ratio\n",
        );
        for c in &self.channels {
            let _ = writeln!(
                out,
                "{},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?}",
                c.channel,
                c.mean_train,
                c.mean_test,
                c.abs_mean_train,
                c.abs_mean_test,
                c.var_train,
                c.var_test,
                c.abs_mean_gap,
                c.var_ratio
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "train t={}..{}  test t={}..{}  variance: {:?}\n",
            self.train.first, self.train.last, self.test.first, self.test.last, self.convention
        );
        let _ = writeln!(
            out,
            "{:>4}  {:>12} {:>12}  {:>11} {:>11}  {:>10}",
            "ch", "mean(train)", "mean(test)", "var(train)", "var(test)", "|gap|"
        );
        for c in &self.channels {
            let _ = writeln!(
                out,
                "{:>4}  {:>12.5} {:>12.5}  {:>11.3e} {:>11.3e}  {:>10.3e}",
                c.channel, c.mean_train, c.mean_test, c.var_train, c.var_test, c.abs_mean_gap
            );
        }
        out
    }
}
