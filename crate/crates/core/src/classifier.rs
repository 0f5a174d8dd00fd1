//! Linear multiclass classification from scratch: feature standardization,
//! one-vs-rest binary SVMs fit by stochastic subgradient descent on the
//! hinge loss, stratified train/test splitting, and JSON model files.
//!
//! Training is deterministic for a fixed dataset and seed: every binary
//! problem gets its own derived random stream, epochs reshuffle example
//! order with that stream, and updates run sequentially.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::DetRng;

/// Feature matrix plus integer labels, one row per example.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<i64>,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<i64>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidInput("dataset must contain at least one example".into()));
        }
        if features.len() != labels.len() {
            return Err(Error::InvalidInput(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        let d = features[0].len();
        if d == 0 {
            return Err(Error::InvalidInput("feature rows must be non-empty".into()));
        }
        for (i, row) in features.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} features, expected {d}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("row {i} contains non-finite values")));
            }
        }
        Ok(Dataset { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features[0].len()
    }

    /// Sorted distinct labels.
    pub fn class_set(&self) -> Vec<i64> {
        self.labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
    }

    /// Sub-dataset of the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Hyperparameters for `train`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub eta0: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: 1e-4,
            epochs: 100,
            eta0: 0.01,
            seed: 0,
        }
    }
}

/// One-vs-rest linear model with the standardization statistics baked in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub format_version: u32,
    /// Sorted ascending; prediction ties break to the earlier entry.
    pub classes: Vec<i64>,
    /// Optional human-readable names parallel to `classes`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_names: Option<Vec<String>>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub config: TrainConfig,
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Per-feature (x − mean)/std.
pub fn standardize(x: &[f64], mean: &[f64], std: &[f64]) -> Result<Vec<f64>> {
    if x.len() != mean.len() || x.len() != std.len() {
        return Err(Error::InvalidInput(format!(
            "standardize dimension mismatch: x={}, mean={}, std={}",
            x.len(),
            mean.len(),
            std.len()
        )));
    }
    Ok(x.iter()
        .zip(mean)
        .zip(std)
        .map(|((v, m), s)| (v - m) / s)
        .collect())
}

/// Column means and population standard deviations; zero-variance columns
/// get std 1 so standardization never divides by zero.
fn feature_stats(features: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = features.len() as f64;
    let d = features[0].len();
    let mut mean = vec![0.0; d];
    for row in features {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = vec![0.0; d];
    for row in features {
        for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std = var
        .iter()
        .map(|s| {
            let sd = (s / n).sqrt();
            if sd > 0.0 {
                sd
            } else {
                1.0
            }
        })
        .collect();
    (mean, std)
}

/// λ/2·‖w‖² + mean hinge loss over the (already standardized) examples.
pub fn binary_objective(w: &[f64], b: f64, x: &[Vec<f64>], y: &[f64], lambda: f64) -> f64 {
    let reg = 0.5 * lambda * w.iter().map(|v| v * v).sum::<f64>();
    let hinge: f64 = x
        .iter()
        .zip(y)
        .map(|(row, &yi)| {
            let margin = yi * (dot(w, row) + b);
            (1.0 - margin).max(0.0)
        })
        .sum();
    reg + hinge / x.len() as f64
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Fits one binary hinge-loss problem by per-example subgradient steps with
/// learning rate eta0/(1 + λt), t counting every update from 0. The bias is
/// not regularized.
fn train_binary(
    x: &[Vec<f64>],
    y: &[f64],
    cfg: &TrainConfig,
    rng: &mut DetRng,
) -> (Vec<f64>, f64) {
    let d = x[0].len();
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut t: u64 = 0;
    let mut order: Vec<usize> = (0..x.len()).collect();
    for _ in 0..cfg.epochs {
        rng.shuffle(&mut order);
        for &i in &order {
            let eta = cfg.eta0 / (1.0 + cfg.lambda * t as f64);
            let margin = y[i] * (dot(&w, &x[i]) + b);
            if margin < 1.0 {
                for (wj, xj) in w.iter_mut().zip(&x[i]) {
                    *wj -= eta * (cfg.lambda * *wj - y[i] * xj);
                }
                b += eta * y[i];
            } else {
                for wj in &mut w {
                    *wj -= eta * cfg.lambda * *wj;
                }
            }
            t += 1;
        }
    }
    (w, b)
}

/// One-vs-rest training: standardizes the features, then fits one binary
/// SVM per class (class c against the rest). Binary problem `ci` draws its
/// shuffles from stream `ci` of the seed, so per-class results do not depend
/// on how many classes precede them.
pub fn train(data: &Dataset, cfg: &TrainConfig) -> Result<LinearModel> {
    if data.len() < 2 {
        return Err(Error::Train(format!(
            "need at least 2 examples, got {}",
            data.len()
        )));
    }
    let classes = data.class_set();
    if classes.len() < 2 {
        return Err(Error::Train(format!(
            "need at least 2 distinct classes, got {:?}",
            classes
        )));
    }
    if !(cfg.lambda > 0.0) || !(cfg.eta0 > 0.0) || cfg.epochs == 0 {
        return Err(Error::Train(format!(
            "lambda and eta0 must be > 0 and epochs >= 1, got {cfg:?}"
        )));
    }
    let (mean, std) = feature_stats(&data.features);
    let standardized: Vec<Vec<f64>> = data
        .features
        .iter()
        .map(|row| standardize(row, &mean, &std))
        .collect::<Result<_>>()?;

    let mut weights = Vec::with_capacity(classes.len());
    let mut bias = Vec::with_capacity(classes.len());
    for (ci, &class) in classes.iter().enumerate() {
        let y: Vec<f64> = data
            .labels
            .iter()
            .map(|&l| if l == class { 1.0 } else { -1.0 })
            .collect();
        let mut rng = DetRng::from_seed_stream(cfg.seed, ci as u64);
        let (w, b) = train_binary(&standardized, &y, cfg, &mut rng);
        weights.push(w);
        bias.push(b);
    }
    Ok(LinearModel {
        format_version: MODEL_FORMAT_VERSION,
        classes,
        class_names: None,
        mean,
        std,
        weights,
        bias,
        config: *cfg,
    })
}

impl LinearModel {
    /// Per-class scores w_c·standardize(x) + b_c, ordered like `classes`.
    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = standardize(x, &self.mean, &self.std)?;
        Ok(self
            .weights
            .iter()
            .zip(&self.bias)
            .map(|(w, b)| dot(w, &z) + b)
            .collect())
    }

    /// Class with the maximal decision value; exact ties go to the earlier
    /// (lower) class label.
    pub fn predict(&self, x: &[f64]) -> Result<i64> {
        let values = self.decision_values(x)?;
        let mut best = 0;
        for (i, v) in values.iter().enumerate().skip(1) {
            if *v > values[best] {
                best = i;
            }
        }
        Ok(self.classes[best])
    }

    pub fn predict_all(&self, data: &Dataset) -> Result<Vec<i64>> {
        data.features.iter().map(|row| self.predict(row)).collect()
    }

    /// Display name of a class: the parallel `class_names` entry when
    /// present, otherwise the label's decimal form.
    pub fn class_name(&self, class: i64) -> String {
        if let Some(names) = &self.class_names {
            if let Some(pos) = self.classes.iter().position(|&c| c == class) {
                return names[pos].clone();
            }
        }
        class.to_string()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Model(format!("serializing model: {e}")))?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: LinearModel =
            serde_json::from_str(&text).map_err(|e| Error::parse(path, 0, e.to_string()))?;
        if model.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Model(format!(
                "unsupported model format_version {} (expected {MODEL_FORMAT_VERSION})",
                model.format_version
            )));
        }
        let d = model.mean.len();
        if model.std.len() != d
            || model.weights.len() != model.classes.len()
            || model.bias.len() != model.classes.len()
            || model.weights.iter().any(|w| w.len() != d)
        {
            return Err(Error::Model("model field dimensions disagree".into()));
        }
        if let Some(names) = &model.class_names {
            if names.len() != model.classes.len() {
                return Err(Error::Model("class_names length differs from classes".into()));
            }
        }
        Ok(model)
    }
}

/// Seeded train/test split of row indices. When every class has at least
/// two members the split is stratified: each class contributes ⌊f·n_c⌋ test
/// examples plus at most one more, allocated by largest fractional
/// remainder so the test set totals round(f·n). Otherwise the split is a
/// plain shuffled cut. Both halves preserve original order.
pub fn split_indices(
    labels: &[i64],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "test_fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let mut rng = DetRng::from_seed(seed);
    let n = labels.len();
    let total_test = (test_fraction * n as f64).round() as usize;

    let classes: Vec<i64> = labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let per_class: Vec<Vec<usize>> = classes
        .iter()
        .map(|&c| (0..n).filter(|&i| labels[i] == c).collect::<Vec<usize>>())
        .collect();

    let mut test_indices: Vec<usize> = if per_class.iter().all(|ids| ids.len() >= 2) {
        // Floor quota per class, then hand out the remainder to the classes
        // with the largest fractional parts (ties to earlier class).
        let quotas: Vec<f64> = per_class
            .iter()
            .map(|ids| test_fraction * ids.len() as f64)
            .collect();
        let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
        let mut leftover = total_test.saturating_sub(counts.iter().sum::<usize>());
        let mut by_remainder: Vec<usize> = (0..classes.len()).collect();
        by_remainder.sort_by(|&a, &b| {
            let ra = quotas[a] - quotas[a].floor();
            let rb = quotas[b] - quotas[b].floor();
            rb.partial_cmp(&ra).expect("finite remainders").then(a.cmp(&b))
        });
        for ci in by_remainder {
            if leftover == 0 {
                break;
            }
            if counts[ci] < per_class[ci].len() {
                counts[ci] += 1;
                leftover -= 1;
            }
        }
        let mut picked = Vec::new();
        for (ids, &count) in per_class.iter().zip(&counts) {
            let mut shuffled = ids.clone();
            rng.shuffle(&mut shuffled);
            picked.extend_from_slice(&shuffled[..count]);
        }
        picked
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut order);
        order[..total_test].to_vec()
    };

    test_indices.sort_unstable();
    let in_test: Vec<bool> = {
        let mut mask = vec![false; n];
        for &i in &test_indices {
            mask[i] = true;
        }
        mask
    };
    let train_indices: Vec<usize> = (0..n).filter(|&i| !in_test[i]).collect();
    Ok((train_indices, test_indices))
}

/// `split_indices` materialized into two datasets.
pub fn split(data: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train_indices, test_indices) = split_indices(&data.labels, test_fraction, seed)?;
    Ok((data.select(&train_indices), data.select(&test_indices)))
}

/// Fraction of examples where prediction equals the label.
pub fn accuracy(truth: &[i64], predicted: &[i64]) -> f64 {
    assert_eq!(truth.len(), predicted.len());
    if truth.is_empty() {
        return 0.0;
    }
    let hits = truth.iter().zip(predicted).filter(|(t, p)| t == p).count();
    hits as f64 / truth.len() as f64
}

/// Confusion counts over the sorted union of observed classes; rows are true
/// labels, columns predictions.
pub fn confusion_matrix(truth: &[i64], predicted: &[i64]) -> (Vec<i64>, Vec<Vec<usize>>) {
    assert_eq!(truth.len(), predicted.len());
    let classes: Vec<i64> = truth
        .iter()
        .chain(predicted)
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index = |label: i64| classes.iter().position(|&c| c == label).expect("label in union");
    let mut matrix = vec![vec![0usize; classes.len()]; classes.len()];
    for (&t, &p) in truth.iter().zip(predicted) {
        matrix[index(t)][index(p)] += 1;
    }
    (classes, matrix)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob_dataset(n_per_class: usize, separation: f64, seed: u64) -> Dataset {
        let mut rng = DetRng::from_seed(seed);
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (label, cx) in [(0i64, -separation), (1i64, separation)] {
            for _ in 0..n_per_class {
                features.push(vec![cx + rng.normal(), rng.normal()]);
                labels.push(label);
            }
        }
        Dataset::new(features, labels).unwrap()
    }

    #[test]
    fn standardize_examples() {
        assert_eq!(
            standardize(&[3.0, 5.0], &[3.0, 5.0], &[2.0, 7.0]).unwrap(),
            vec![0.0, 0.0]
        );
        assert_eq!(
            standardize(&[1.5, -2.0], &[0.0, 0.0], &[1.0, 1.0]).unwrap(),
            vec![1.5, -2.0]
        );
        assert_eq!(standardize(&[4.0], &[2.0], &[2.0]).unwrap(), vec![1.0]);
        assert!(standardize(&[1.0], &[0.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn separable_pair_fits_perfectly() {
        let data = Dataset::new(vec![vec![-1.0], vec![1.0]], vec![0, 1]).unwrap();
        let model = train(&data, &TrainConfig::default()).unwrap();
        assert_eq!(model.predict(&[-1.0]).unwrap(), 0);
        assert_eq!(model.predict(&[1.0]).unwrap(), 1);
    }

    #[test]
    fn duplicated_dataset_predicts_identically() {
        let data = blob_dataset(20, 2.0, 41);
        let mut doubled_features = Vec::new();
        let mut doubled_labels = Vec::new();
        for (row, &label) in data.features.iter().zip(&data.labels) {
            doubled_features.push(row.clone());
            doubled_features.push(row.clone());
            doubled_labels.push(label);
            doubled_labels.push(label);
        }
        let doubled = Dataset::new(doubled_features, doubled_labels).unwrap();
        let cfg = TrainConfig::default();
        let m1 = train(&data, &cfg).unwrap();
        let m2 = train(&doubled, &cfg).unwrap();
        assert_eq!(
            m1.predict_all(&data).unwrap(),
            m2.predict_all(&data).unwrap()
        );
    }

    #[test]
    fn same_seed_gives_bit_identical_models() {
        let data = blob_dataset(15, 1.5, 42);
        let cfg = TrainConfig::default();
        let a = train(&data, &cfg).unwrap();
        let b = train(&data, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn training_rejects_degenerate_inputs() {
        let single = Dataset::new(vec![vec![1.0]], vec![0]).unwrap();
        assert!(train(&single, &TrainConfig::default()).is_err());
        let one_class = Dataset::new(vec![vec![1.0], vec![2.0]], vec![5, 5]).unwrap();
        assert!(train(&one_class, &TrainConfig::default()).is_err());
    }

    #[test]
    fn final_objective_beats_zero_model() {
        let data = blob_dataset(30, 1.0, 43);
        let cfg = TrainConfig::default();
        let model = train(&data, &cfg).unwrap();
        let standardized: Vec<Vec<f64>> = data
            .features
            .iter()
            .map(|row| standardize(row, &model.mean, &model.std).unwrap())
            .collect();
        for (ci, &class) in model.classes.iter().enumerate() {
            let y: Vec<f64> = data
                .labels
                .iter()
                .map(|&l| if l == class { 1.0 } else { -1.0 })
                .collect();
            let trained =
                binary_objective(&model.weights[ci], model.bias[ci], &standardized, &y, cfg.lambda);
            let zero = binary_objective(
                &vec![0.0; data.dim()],
                0.0,
                &standardized,
                &y,
                cfg.lambda,
            );
            assert!(trained.is_finite());
            assert!(trained <= zero, "objective {trained} worse than zero model {zero}");
        }
    }

    #[test]
    fn well_separated_blobs_reach_95_percent() {
        let data = blob_dataset(100, 3.0, 44);
        let (train_set, test_set) = split(&data, 0.25, 7).unwrap();
        let model = train(&train_set, &TrainConfig::default()).unwrap();
        let predictions = model.predict_all(&test_set).unwrap();
        let acc = accuracy(&test_set.labels, &predictions);
        assert!(acc >= 0.95, "test accuracy {acc}");
    }

    #[test]
    fn predict_matches_decision_argmax_on_random_vectors() {
        let data = blob_dataset(20, 1.0, 45);
        let model = train(&data, &TrainConfig::default()).unwrap();
        let mut rng = DetRng::from_seed(46);
        for _ in 0..1000 {
            let x = vec![rng.range_f64(-5.0, 5.0), rng.range_f64(-5.0, 5.0)];
            let values = model.decision_values(&x).unwrap();
            let mut best = 0;
            for i in 1..values.len() {
                if values[i] > values[best] {
                    best = i;
                }
            }
            assert_eq!(model.predict(&x).unwrap(), model.classes[best]);
        }
    }

    #[test]
    fn exact_ties_go_to_lower_label() {
        let model = LinearModel {
            format_version: MODEL_FORMAT_VERSION,
            classes: vec![3, 7],
            class_names: None,
            mean: vec![0.0],
            std: vec![1.0],
            weights: vec![vec![0.0], vec![0.0]],
            bias: vec![0.5, 0.5],
            config: TrainConfig::default(),
        };
        assert_eq!(model.predict(&[123.0]).unwrap(), 3);
    }

    #[test]
    fn positive_weight_class_wins() {
        let model = LinearModel {
            format_version: MODEL_FORMAT_VERSION,
            classes: vec![0, 1],
            class_names: None,
            mean: vec![0.0],
            std: vec![1.0],
            weights: vec![vec![1.0], vec![-1.0]],
            bias: vec![0.0, 0.0],
            config: TrainConfig::default(),
        };
        assert_eq!(model.predict(&[2.0]).unwrap(), 0);
    }

    #[test]
    fn split_halves_ten_items() {
        let data = Dataset::new(
            (0..10).map(|i| vec![i as f64]).collect(),
            vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1],
        )
        .unwrap();
        let (train_set, test_set) = split(&data, 0.5, 1).unwrap();
        assert_eq!(train_set.len(), 5);
        assert_eq!(test_set.len(), 5);

        let (t2, s2) = split(&data, 0.5, 1).unwrap();
        assert_eq!((train_set, test_set), (t2, s2));
    }

    #[test]
    fn split_is_stratified_within_one() {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for class in 0..4i64 {
            for i in 0..12 {
                features.push(vec![class as f64 * 100.0 + i as f64]);
                labels.push(class);
            }
        }
        let data = Dataset::new(features, labels).unwrap();
        let (_, test_set) = split(&data, 0.25, 9).unwrap();
        for class in 0..4i64 {
            let count = test_set.labels.iter().filter(|&&l| l == class).count();
            assert!(
                (count as f64 - 3.0).abs() <= 1.0,
                "class {class} has {count} test members"
            );
        }
    }

    #[test]
    fn split_preserves_example_identity() {
        let data = blob_dataset(10, 1.0, 47);
        let (train_set, test_set) = split(&data, 0.3, 3).unwrap();
        assert_eq!(train_set.len() + test_set.len(), data.len());
        let mut all: Vec<Vec<f64>> = train_set
            .features
            .iter()
            .chain(&test_set.features)
            .cloned()
            .collect();
        let mut original = data.features.clone();
        let key = |v: &Vec<f64>| (v[0], v[1]);
        all.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        original.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        assert_eq!(all, original);
    }

    #[test]
    fn model_file_round_trip() {
        let data = blob_dataset(10, 2.0, 48);
        let mut model = train(&data, &TrainConfig::default()).unwrap();
        model.class_names = Some(vec!["neutral".into(), "smile".into()]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        model.save(&path).unwrap();
        let loaded = LinearModel::load(&path).unwrap();
        assert_eq!(loaded, model);
        assert_eq!(loaded.class_name(1), "smile");
    }

    #[test]
    fn model_load_rejects_bad_version_and_shapes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        let data = blob_dataset(10, 2.0, 49);
        let model = train(&data, &TrainConfig::default()).unwrap();

        let mut v: serde_json::Value = serde_json::to_value(&model).unwrap();
        v["format_version"] = 99.into();
        std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
        assert!(LinearModel::load(&path).unwrap_err().to_string().contains("format_version"));

        let mut v: serde_json::Value = serde_json::to_value(&model).unwrap();
        v["bias"] = serde_json::json!([0.0]);
        std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
        assert!(LinearModel::load(&path).is_err());
    }

    #[test]
    fn confusion_matrix_rows_are_true_labels() {
        let truth = vec![1, 1, 2, 2, 3];
        let predicted = vec![1, 2, 2, 2, 4];
        let (classes, matrix) = confusion_matrix(&truth, &predicted);
        assert_eq!(classes, vec![1, 2, 3, 4]);
        assert_eq!(matrix[0], vec![1, 1, 0, 0]);
        assert_eq!(matrix[1], vec![0, 2, 0, 0]);
        assert_eq!(matrix[2], vec![0, 0, 0, 1]);
        assert_eq!(matrix[3], vec![0, 0, 0, 0]);
        let total: usize = matrix.iter().flatten().sum();
        assert_eq!(total, truth.len());
    }

    #[test]
    fn accuracy_counts_matches() {
        assert_eq!(accuracy(&[1, 2, 3], &[1, 2, 4]), 2.0 / 3.0);
        assert_eq!(accuracy(&[1], &[1]), 1.0);
    }
}
