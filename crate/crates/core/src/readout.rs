//! Linear readouts trained by pseudoinverse, their evaluation, and
//! cross-validated classification.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{FeatureSeries, Split, Window};
use crate::error::{Error, Result};

/// Pseudoinverse settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Singular values below `cutoff · σ_max` are discarded.
    pub cutoff: f64,
    /// Tikhonov term; zero gives the plain minimum-norm solution.
    pub ridge: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            cutoff: 1e-10,
            ridge: 0.0,
        }
    }
}

/// Minimum-norm least squares `X W ≈ Y` via SVD.
pub fn solve_least_squares(
    design: &DMatrix<f64>,
    targets: &DMatrix<f64>,
    opts: SolverOptions,
) -> Result<DMatrix<f64>> {
    if design.nrows() != targets.nrows() {
        return Err(Error::Length(format!(
            "{} design rows vs {} target rows",
            design.nrows(),
            targets.nrows()
        )));
    }
    if design.iter().chain(targets.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("least-squares input".into()));
    }
    let svd = design.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let threshold = opts.cutoff * sigma_max;
    let ut_y = u.transpose() * targets;
    let mut scaled = ut_y;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let factor = if s <= threshold || s == 0.0 {
            0.0
        } else if opts.ridge > 0.0 {
            s / (s * s + opts.ridge)
        } else {
            1.0 / s
        };
        scaled.row_mut(i).scale_mut(factor);
    }
    Ok(v_t.transpose() * scaled)
}

/// `W_out` of shape `(N+1) × K`; the last row multiplies the bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutWeights {
    feature_width: usize,
    classes: usize,
    /// Row-major `(N+1) × K`.
    values: Vec<f64>,
}

impl ReadoutWeights {
    pub fn new(feature_width: usize, classes: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != (feature_width + 1) * classes {
            return Err(Error::Dimension(format!(
                "{} weights for ({feature_width}+1)x{classes}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("weights".into()));
        }
        Ok(Self {
            feature_width,
            classes,
            values,
        })
    }

    fn from_matrix(feature_width: usize, m: &DMatrix<f64>) -> Result<Self> {
        let mut values = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                values.push(m[(r, c)]);
            }
        }
        Self::new(feature_width, m.ncols(), values)
    }

    pub fn feature_width(&self) -> usize {
        self.feature_width
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, row: usize, class: usize) -> f64 {
        self.values[row * self.classes + class]
    }

    pub fn bias(&self, class: usize) -> f64 {
        self.get(self.feature_width, class)
    }

    /// `W_outᵀ (h, 1)` for one feature row.
    pub fn scores(&self, features: &[f64]) -> Vec<f64> {
        (0..self.classes)
            .map(|k| {
                features
                    .iter()
                    .enumerate()
                    .map(|(i, h)| h * self.get(i, k))
                    .sum::<f64>()
                    + self.bias(k)
            })
            .collect()
    }

    /// One row per feature plus a final `bias` row, one column per class.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row");
        for k in 0..self.classes {
            let _ = write!(out, ",k{k}");
        }
        out.push('\n');
        for r in 0..=self.feature_width {
            if r == self.feature_width {
                out.push_str("bias");
            } else {
                let _ = write!(out, "h{r}");
            }
            for k in 0..self.classes {
                let _ = write!(out, ",{:?}", self.get(r, k));
            }
            out.push('\n');
        }
        out
    }
}

fn design_matrix(features: &FeatureSeries) -> DMatrix<f64> {
    let n = features.width();
    DMatrix::from_fn(features.timesteps(), n + 1, |r, c| {
        if c == n {
            1.0
        } else {
            features.row(r + 1)[c]
        }
    })
}

/// Least-squares readout for a scalar target over every row of `features`.
pub fn fit_regression(features: &FeatureSeries, targets: &[f64]) -> Result<ReadoutWeights> {
    fit_regression_with(features, targets, SolverOptions::default())
}

pub fn fit_regression_with(
    features: &FeatureSeries,
    targets: &[f64],
    opts: SolverOptions,
) -> Result<ReadoutWeights> {
    if features.timesteps() != targets.len() {
        return Err(Error::Length(format!(
            "{} feature rows vs {} targets",
            features.timesteps(),
            targets.len()
        )));
    }
    if targets.is_empty() {
        return Err(Error::Length("no training samples".into()));
    }
    let x = design_matrix(features);
    let y = DMatrix::from_column_slice(targets.len(), 1, targets);
    let w = solve_least_squares(&x, &y, opts)?;
    ReadoutWeights::from_matrix(features.width(), &w)
}

/// Per-row score vectors.
pub fn predict(weights: &ReadoutWeights, features: &FeatureSeries) -> Result<Vec<Vec<f64>>> {
    if features.width() != weights.feature_width() {
        return Err(Error::Dimension(format!(
            "weights expect width {}, features have {}",
            weights.feature_width(),
            features.width()
        )));
    }
    Ok((1..=features.timesteps())
        .map(|t| weights.scores(features.row(t)))
        .collect())
}

/// Scalar predictions of a single-output readout.
pub fn predict_scalar(weights: &ReadoutWeights, features: &FeatureSeries) -> Result<Vec<f64>> {
    if weights.classes() != 1 {
        return Err(Error::Dimension(format!(
            "scalar prediction from a {}-output readout",
            weights.classes()
        )));
    }
    Ok(predict(weights, features)?.into_iter().map(|s| s[0]).collect())
}

/// `Σ(ŷ−y)² / Σy²` over a window of two full-length sequences.
pub fn nmse(predictions: &[f64], targets: &[f64], window: Window) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(Error::Length(format!(
            "{} predictions vs {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    window.check(targets.len())?;
    nmse_of(&predictions[window.range()], &targets[window.range()])
}

/// NMSE of two aligned slices.
pub fn nmse_of(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() || targets.is_empty() {
        return Err(Error::Length(format!(
            "{} predictions vs {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    let power: f64 = targets.iter().map(|y| y * y).sum();
    if power == 0.0 {
        return Err(Error::UndefinedNormalization("all targets are zero".into()));
    }
    let err: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, y)| (p - y) * (p - y))
        .sum();
    Ok(err / power)
}

/// One-hot target of length `classes` with a 1 at `class_index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OneHotTarget {
    pub class_index: usize,
    pub classes: usize,
}

impl OneHotTarget {
    pub fn new(class_index: usize, classes: usize) -> Result<Self> {
        if class_index >= classes {
            return Err(Error::Classification(format!(
                "class {class_index} out of range for {classes} classes"
            )));
        }
        Ok(Self {
            class_index,
            classes,
        })
    }

    pub fn to_vec(self) -> Vec<f64> {
        (0..self.classes)
            .map(|k| if k == self.class_index { 1.0 } else { 0.0 })
            .collect()
    }
}

/// Fits one readout over the concatenated timesteps of every training block,
/// each timestep targeting its sample's one-hot label.
pub fn fit_classifier(
    blocks: &[FeatureSeries],
    labels: &[usize],
    classes: usize,
) -> Result<ReadoutWeights> {
    fit_classifier_with(blocks, labels, classes, SolverOptions::default())
}

pub fn fit_classifier_with(
    blocks: &[FeatureSeries],
    labels: &[usize],
    classes: usize,
    opts: SolverOptions,
) -> Result<ReadoutWeights> {
    if classes < 2 {
        return Err(Error::Classification(format!("need ≥ 2 classes, got {classes}")));
    }
    if blocks.len() != labels.len() || blocks.is_empty() {
        return Err(Error::Length(format!(
            "{} blocks vs {} labels",
            blocks.len(),
            labels.len()
        )));
    }
    let width = blocks[0].width();
    if blocks.iter().any(|b| b.width() != width || b.timesteps() == 0) {
        return Err(Error::Classification(
            "inconsistent or empty feature blocks".into(),
        ));
    }
    for k in 0..classes {
        if !labels.contains(&k) {
            return Err(Error::Classification(format!("class {k} has no training samples")));
        }
    }
    let rows: usize = blocks.iter().map(FeatureSeries::timesteps).sum();
    let mut x = DMatrix::zeros(rows, width + 1);
    let mut y = DMatrix::zeros(rows, classes);
    let mut r = 0;
    for (block, &label) in blocks.iter().zip(labels) {
        let target = OneHotTarget::new(label, classes)?.to_vec();
        for t in 1..=block.timesteps() {
            for (c, v) in block.row(t).iter().enumerate() {
                x[(r, c)] = *v;
            }
            x[(r, width)] = 1.0;
            for (k, v) in target.iter().enumerate() {
                y[(r, k)] = *v;
            }
            r += 1;
        }
    }
    let w = solve_least_squares(&x, &y, opts)?;
    ReadoutWeights::from_matrix(width, &w)
}

/// Winner-takes-all decision for one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPrediction {
    pub class: usize,
    /// Set when another class shares the maximal averaged score.
    pub tie: bool,
    pub mean_scores: Vec<f64>,
}

/// Argmax with lowest-index tie-breaking.
pub fn argmax_with_tie(scores: &[f64]) -> (usize, bool) {
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = k;
        }
    }
    let tie = scores
        .iter()
        .enumerate()
        .any(|(k, &s)| k != best && s == scores[best]);
    (best, tie)
}

/// Averages per-timestep class scores over the block and takes the argmax.
pub fn predict_class(weights: &ReadoutWeights, block: &FeatureSeries) -> Result<ClassPrediction> {
    if block.timesteps() == 0 {
        return Err(Error::Classification("empty sample block".into()));
    }
    let scores = predict(weights, block)?;
    let m = block.timesteps() as f64;
    let mut mean = vec![0.0; weights.classes()];
    for s in &scores {
        for (acc, v) in mean.iter_mut().zip(s) {
            *acc += v;
        }
    }
    for v in &mut mean {
        *v /= m;
    }
    let (class, tie) = argmax_with_tie(&mean);
    Ok(ClassPrediction {
        class,
        tie,
        mean_scores: mean,
    })
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    classes: usize,
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        Self {
            classes,
            counts: vec![vec![0; classes]; classes],
        }
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes).map(|k| self.counts[k][k]).sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            self.correct() as f64 / total as f64
        }
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (row, o) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in row.iter_mut().zip(o) {
                *a += b;
            }
        }
    }
}

/// Per-fold results of cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Population standard deviation across folds.
    pub std_accuracy: f64,
    pub fold_confusions: Vec<ConfusionMatrix>,
    pub confusion: ConfusionMatrix,
    pub ties: usize,
    /// Predicted class of every sample, from the fold that held it out.
    pub predictions: Vec<usize>,
}

/// Stratified fold assignment: each class is shuffled with `seed` and dealt
/// round-robin, continuing the rotation from the previous class.
pub fn stratified_folds(labels: &[usize], classes: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Classification(format!("need k ≥ 2 folds, got {k}")));
    }
    let mut folds = vec![Vec::new(); k];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut next = 0;
    for class in 0..classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(Error::Classification(format!(
                "class {class} has {} samples, fewer than {k} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for idx in members {
            folds[next % k].push(idx);
            next += 1;
        }
    }
    if let Some(bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::Classification(format!("label {bad} ≥ {classes} classes")));
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Stratified `k`-fold cross-validation. `pipeline(train, test)` receives
/// sample indices and returns `(predicted class, tie)` for each test index.
pub fn k_fold_cv<P>(labels: &[usize], classes: usize, k: usize, seed: u64, pipeline: P) -> Result<CvReport>
where
    P: Fn(&[usize], &[usize]) -> Result<Vec<(usize, bool)>> + Sync,
{
    let folds = stratified_folds(labels, classes, k, seed)?;
    let results: Vec<(ConfusionMatrix, usize, Vec<(usize, usize)>)> = (0..k)
        .into_par_iter()
        .map(|f| {
            let test = &folds[f];
            let train: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|&(g, _)| g != f)
                .flat_map(|(_, idx)| idx.iter().copied())
                .collect();
            let predicted = pipeline(&train, test).map_err(|e| e.context(format!("fold {f}")))?;
            if predicted.len() != test.len() {
                return Err(Error::Length(format!(
                    "fold {f}: {} predictions for {} samples",
                    predicted.len(),
                    test.len()
                )));
            }
            let mut cm = ConfusionMatrix::new(classes);
            let mut ties = 0;
            let mut assigned = Vec::with_capacity(test.len());
            for (&i, &(p, tie)) in test.iter().zip(&predicted) {
                cm.record(labels[i], p);
                ties += usize::from(tie);
                assigned.push((i, p));
            }
            Ok((cm, ties, assigned))
        })
        .collect::<Result<_>>()?;
    let fold_accuracies: Vec<f64> = results.iter().map(|(cm, _, _)| cm.accuracy()).collect();
    let (mean_accuracy, std_accuracy) = mean_std(&fold_accuracies);
    let mut confusion = ConfusionMatrix::new(classes);
    let mut predictions = vec![0; labels.len()];
    for (cm, _, assigned) in &results {
        confusion.merge(cm);
        for &(i, p) in assigned {
            predictions[i] = p;
        }
    }
    Ok(CvReport {
        fold_accuracies,
        mean_accuracy,
        std_accuracy,
        ties: results.iter().map(|(_, t, _)| t).sum(),
        fold_confusions: results.into_iter().map(|(cm, _, _)| cm).collect(),
        confusion,
        predictions,
    })
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// How the linear baseline pairs inputs with targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alignment {
    /// `ŷ_t = w·u_t + b₀`: the same row convention as the reservoir readout.
    Concurrent,
    /// `ŷ_{t+1} = w·u_t + b₀`.
    Lagged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearBaseline {
    pub w: f64,
    pub b0: f64,
    pub nmse: f64,
    pub alignment: Alignment,
}

/// Least-squares `ŷ = w·u + b₀` on the training window, scored by NMSE on the
/// test window. Windows index the targets; with [`Alignment::Lagged`] the
/// input for target `t` is `u_{t−1}`.
pub fn fit_linear_baseline(
    inputs: &[f64],
    targets: &[f64],
    split: Split,
    alignment: Alignment,
) -> Result<LinearBaseline> {
    if inputs.len() != targets.len() {
        return Err(Error::Length(format!(
            "{} inputs vs {} targets",
            inputs.len(),
            targets.len()
        )));
    }
    let train = split.train_window();
    let test = split.test_window();
    train.check(targets.len())?;
    test.check(targets.len())?;
    let lag = match alignment {
        Alignment::Concurrent => 0,
        Alignment::Lagged => 1,
    };
    if train.first <= lag {
        return Err(Error::Window(format!(
            "lagged baseline needs the training window to start after t=1, got {}",
            train.first
        )));
    }
    let feature = |t: usize| inputs[t - 1 - lag];
    let rows = |w: Window| -> Result<FeatureSeries> {
        FeatureSeries::new(w.len(), 1, (w.first..=w.last).map(feature).collect())
    };
    let weights = fit_regression(&rows(train)?, &targets[train.range()])?;
    let predictions = predict_scalar(&weights, &rows(test)?)?;
    let nmse = nmse_of(&predictions, &targets[test.range()])?;
    Ok(LinearBaseline {
        w: weights.get(0, 0),
        b0: weights.bias(0),
        nmse,
        alignment,
    })
}

/// Single-feature blocks `u_{t_s..t_e}` for the linear classifier baseline.
pub fn input_blocks(series: &[Vec<f64>], window: Window) -> Result<Vec<FeatureSeries>> {
    series
        .iter()
        .map(|s| {
            window.check(s.len())?;
            FeatureSeries::new(window.len(), 1, s[window.range()].to_vec())
        })
        .collect()
}

/// Linear classifier on the raw (preprocessed) input, evaluated with the
/// same winner-takes-all rule and cross-validation as the reservoir.
pub fn fit_linear_classifier_baseline(
    series: &[Vec<f64>],
    labels: &[usize],
    classes: usize,
    window: Window,
    folds: usize,
    seed: u64,
) -> Result<CvReport> {
    let blocks = input_blocks(series, window)?;
    classify_blocks_cv(&blocks, labels, classes, folds, seed)
}

/// Cross-validated winner-takes-all classification of precomputed blocks.
pub fn classify_blocks_cv(
    blocks: &[FeatureSeries],
    labels: &[usize],
    classes: usize,
    folds: usize,
    seed: u64,
) -> Result<CvReport> {
    if blocks.len() != labels.len() {
        return Err(Error::Length(format!(
            "{} blocks vs {} labels",
            blocks.len(),
            labels.len()
        )));
    }
    k_fold_cv(labels, classes, folds, seed, |train, test| {
        let train_blocks: Vec<FeatureSeries> = train.iter().map(|&i| blocks[i].clone()).collect();
        let train_labels: Vec<usize> = train.iter().map(|&i| labels[i]).collect();
        let w = fit_classifier(&train_blocks, &train_labels, classes)?;
        test.iter()
            .map(|&i| predict_class(&w, &blocks[i]).map(|p| (p.class, p.tie)))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(rows: &[&[f64]]) -> FeatureSeries {
        FeatureSeries::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn two_point_fit_is_exact() {
        let w = fit_regression(&series(&[&[1.0], &[2.0]]), &[3.0, 5.0]).unwrap();
        assert!((w.get(0, 0) - 2.0).abs() < 1e-12);
        assert!((w.bias(0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_targets_give_zero_weights() {
        let w = fit_regression(&series(&[&[1.0, 0.3], &[2.0, -0.1], &[0.5, 0.9]]), &[0.0; 3]).unwrap();
        assert!((0..3).all(|r| w.get(r, 0) == 0.0));
    }

    #[test]
    fn duplicated_columns_predict_like_original() {
        let base = series(&[&[0.1], &[0.4], &[0.35], &[0.9], &[0.7]]);
        let dup = series(&[&[0.1, 0.1], &[0.4, 0.4], &[0.35, 0.35], &[0.9, 0.9], &[0.7, 0.7]]);
        let y = [0.3, 0.2, 0.5, 0.1, 0.25];
        let p1 = predict_scalar(&fit_regression(&base, &y).unwrap(), &base).unwrap();
        let p2 = predict_scalar(&fit_regression(&dup, &y).unwrap(), &dup).unwrap();
        for (a, b) in p1.iter().zip(&p2) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(
            fit_regression(&series(&[&[1.0]]), &[1.0, 2.0]),
            Err(Error::Length(_))
        ));
        assert!(fit_regression(&series(&[&[1.0]]), &[f64::NAN]).is_err());
    }

    #[test]
    fn predict_examples() {
        let f = series(&[&[0.3, 0.1], &[-0.2, 0.5]]);
        let zero = ReadoutWeights::new(2, 1, vec![0.0; 3]).unwrap();
        assert_eq!(predict_scalar(&zero, &f).unwrap(), vec![0.0, 0.0]);
        let bias = ReadoutWeights::new(2, 1, vec![0.0, 0.0, 1.5]).unwrap();
        assert_eq!(predict_scalar(&bias, &f).unwrap(), vec![1.5, 1.5]);
        let narrow = ReadoutWeights::new(1, 1, vec![0.0; 2]).unwrap();
        assert!(matches!(predict(&narrow, &f), Err(Error::Dimension(_))));
    }

    #[test]
    fn interpolation_when_underdetermined() {
        let f = series(&[&[0.3, 0.1, 0.9], &[-0.2, 0.5, 0.0], &[0.7, 0.7, 0.1]]);
        let y = [1.0, -2.0, 0.5];
        let w = fit_regression(&f, &y).unwrap();
        let p = predict_scalar(&w, &f).unwrap();
        for (a, b) in p.iter().zip(&y) {
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn nmse_examples() {
        let y = [0.2, -0.4, 0.5];
        let w = Window::new(1, 3);
        assert_eq!(nmse(&y, &y, w).unwrap(), 0.0);
        assert!((nmse(&[0.0; 3], &y, w).unwrap() - 1.0).abs() < 1e-15);
        let doubled: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
        assert!((nmse(&doubled, &y, w).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            nmse(&[1.0, 1.0], &[0.0, 0.0], Window::new(1, 2)),
            Err(Error::UndefinedNormalization(_))
        ));
        // Only the window counts.
        assert_eq!(nmse(&[9.0, 0.5], &[1.0, 0.5], Window::new(2, 2)).unwrap(), 0.0);
    }

    #[test]
    fn one_hot_targets() {
        assert_eq!(OneHotTarget::new(0, 2).unwrap().to_vec(), vec![1.0, 0.0]);
        assert_eq!(OneHotTarget::new(1, 2).unwrap().to_vec(), vec![0.0, 1.0]);
        assert!(OneHotTarget::new(2, 2).is_err());
    }

    #[test]
    fn separable_classifier() {
        let a = series(&[&[1.0], &[1.0]]);
        let b = series(&[&[-1.0], &[-1.0]]);
        let w = fit_classifier(&[a.clone(), b.clone()], &[0, 1], 2).unwrap();
        assert_eq!(predict_class(&w, &a).unwrap().class, 0);
        assert_eq!(predict_class(&w, &b).unwrap().class, 1);
    }

    #[test]
    fn identical_features_tie() {
        let same = series(&[&[0.4], &[0.4]]);
        let w = fit_classifier(&[same.clone(), same.clone(), same.clone(), same.clone()], &[0, 1, 0, 1], 2)
            .unwrap();
        let p = predict_class(&w, &same).unwrap();
        assert!((p.mean_scores[0] - p.mean_scores[1]).abs() < 1e-12);
        // Exact float equality may not hold after SVD; the scores are symmetric up to rounding.
        let (class, tie) = argmax_with_tie(&[0.5, 0.5]);
        assert_eq!((class, tie), (0, true));
    }

    #[test]
    fn argmax_examples() {
        assert_eq!(argmax_with_tie(&[0.2, 0.7, 0.1]), (1, false));
        assert_eq!(argmax_with_tie(&[0.3, 0.7, 0.7]), (1, true));
        assert_eq!(argmax_with_tie(&[4.0]), (0, false));
    }

    #[test]
    fn classifier_errors() {
        let a = series(&[&[1.0]]);
        let b = series(&[&[1.0, 2.0]]);
        assert!(fit_classifier(&[a.clone(), b], &[0, 1], 2).is_err());
        assert!(fit_classifier(&[a.clone(), a.clone()], &[0, 0], 2).is_err());
        assert!(fit_classifier(&[a.clone()], &[0], 1).is_err());
    }

    #[test]
    fn fold_arithmetic() {
        let labels: Vec<usize> = (0..60).map(|i| i / 20).collect();
        let folds = stratified_folds(&labels, 3, 10, 5).unwrap();
        for f in &folds {
            assert_eq!(f.len(), 6);
            for k in 0..3 {
                assert_eq!(f.iter().filter(|&&i| labels[i] == k).count(), 2);
            }
        }
        let small: Vec<usize> = (0..12).map(|i| i / 4).collect();
        assert!(stratified_folds(&small, 3, 5, 1).is_err());
    }

    #[test]
    fn constant_pipeline_baseline() {
        let labels: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let report = k_fold_cv(&labels, 3, 10, 1, |_, test| Ok(vec![(0, false); test.len()])).unwrap();
        assert!((report.mean_accuracy - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(report.confusion.total(), 30);
    }

    #[test]
    fn linear_baseline_exact_target() {
        let u: Vec<f64> = (0..100).map(|t| (t as f64 * 0.37).sin()).collect();
        let mut y = vec![0.0; 100];
        for t in 1..100 {
            y[t] = 2.0 * u[t - 1] + 3.0;
        }
        let fit = fit_linear_baseline(&u, &y, Split::NARMA, Alignment::Lagged).unwrap();
        assert!((fit.w - 2.0).abs() < 1e-10 && (fit.b0 - 3.0).abs() < 1e-10);
        assert!(fit.nmse < 1e-20);
    }

    #[test]
    fn linear_baseline_constant_input_is_defined() {
        let u = vec![0.5; 100];
        let y: Vec<f64> = (0..100).map(|t| 1.0 + 0.01 * t as f64).collect();
        let fit = fit_linear_baseline(&u, &y, Split::NARMA, Alignment::Concurrent).unwrap();
        assert!(fit.nmse.is_finite());
    }

    #[test]
    fn weights_csv_layout() {
        let w = ReadoutWeights::new(2, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let csv = w.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "row,k0,k1");
        assert_eq!(lines[3], "bias,5.0,6.0");
    }
}
