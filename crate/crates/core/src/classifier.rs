//! Per-level one-vs-all linear classifiers, chained from coarse to fine.
//!
//! Each level trains one L2-regularized logistic model per observed label
//! with plain SGD. Level `k` may consume the top predictions of level
//! `k - 1` as `hier:` features; those are always *predicted* labels, at
//! training time as well as at prediction time.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::features::{hierarchy_features, FeatureConfig, FeatureVector};
use crate::seed;
use crate::taxonomy::LabelPath;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Loss {
    #[default]
    Logistic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2_lambda: f64,
    pub seed: u64,
    pub loss: Loss,
    pub top_k_hier: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            learning_rate: 0.1,
            l2_lambda: 1e-4,
            seed: 42,
            loss: Loss::Logistic,
            top_k_hier: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::InvalidConfig("epochs must be >= 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be > 0"));
        }
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return Err(Error::InvalidConfig("l2_lambda must be >= 0"));
        }
        Ok(())
    }

    fn fingerprint(&self) -> u64 {
        seed::fnv1a(format!("{self:?}").as_bytes())
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: BTreeMap<String, f64>,
    pub bias: f64,
}

impl LinearModel {
    /// `w . x + b`.
    pub fn margin(&self, x: &FeatureVector) -> f64 {
        x.iter()
            .filter_map(|(name, v)| self.weights.get(name).map(|w| w * v))
            .sum::<f64>()
            + self.bias
    }

    pub fn score(&self, x: &FeatureVector) -> f64 {
        sigmoid(self.margin(x))
    }

    pub fn is_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.values().all(|w| w.is_finite())
    }
}

/// A training question reduced to what the learner needs.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub id: String,
    pub features: FeatureVector,
    /// Full-depth gold labels (1 or 2).
    pub labels: Vec<LabelPath>,
}

impl TrainingExample {
    pub fn new(id: impl Into<String>, features: FeatureVector, labels: Vec<LabelPath>) -> Self {
        TrainingExample {
            id: id.into(),
            features,
            labels,
        }
    }

    /// Distinct labels truncated to `level`, in first-seen order.
    pub fn labels_at(&self, level: usize) -> Result<Vec<LabelPath>> {
        let mut out: Vec<LabelPath> = Vec::with_capacity(self.labels.len());
        for l in &self.labels {
            let t = l.truncate(level)?;
            if !out.contains(&t) {
                out.push(t);
            }
        }
        Ok(out)
    }
}

/// Single-label instances: `(example index, label)`, one per distinct
/// truncated label of each example.
pub fn duplicate_multilabel(
    dataset: &[TrainingExample],
    level: usize,
) -> Result<Vec<(usize, LabelPath)>> {
    let mut out = Vec::new();
    for (i, ex) in dataset.iter().enumerate() {
        for l in ex.labels_at(level)? {
            out.push((i, l));
        }
    }
    Ok(out)
}

/// Feature vectors re-keyed to dense column ids.
struct IndexedRows {
    names: Vec<String>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl IndexedRows {
    fn build<'a, I>(vectors: I) -> Self
    where
        I: IntoIterator<Item = &'a FeatureVector> + Clone,
    {
        let vocab: BTreeSet<&str> = vectors
            .clone()
            .into_iter()
            .flat_map(|v| v.names())
            .collect();
        let index: BTreeMap<&str, usize> = vocab.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let rows = vectors
            .into_iter()
            .map(|v| v.iter().map(|(n, w)| (index[n], w)).collect())
            .collect();
        IndexedRows {
            names: vocab.into_iter().map(String::from).collect(),
            rows,
        }
    }

    /// SGD over `(row, is_positive)` pairs.
    fn train(
        &self,
        examples: &[(usize, bool)],
        config: &TrainConfig,
        model_seed: u64,
    ) -> LinearModel {
        let lr = config.learning_rate;
        let shrink = 1.0 - lr * config.l2_lambda;
        let mut rng = seed::rng(model_seed);
        let mut order: Vec<usize> = (0..examples.len()).collect();
        // True weights are `scale * v`; the L2 step only touches `scale`.
        let mut v = alloc::vec![0.0f64; self.names.len()];
        let mut scale = 1.0f64;
        let mut bias = 0.0f64;
        for _ in 0..config.epochs {
            order.shuffle(&mut rng);
            for &k in &order {
                let (row, positive) = examples[k];
                let x = &self.rows[row];
                let z = scale * x.iter().map(|&(j, xj)| v[j] * xj).sum::<f64>() + bias;
                let g = sigmoid(z) - if positive { 1.0 } else { 0.0 };
                if config.l2_lambda > 0.0 {
                    scale *= shrink;
                }
                let step = lr * g / scale;
                for &(j, xj) in x {
                    v[j] -= step * xj;
                }
                bias -= lr * g;
                if scale < 1e-9 {
                    v.iter_mut().for_each(|w| *w *= scale);
                    scale = 1.0;
                }
            }
        }
        let weights = self
            .names
            .iter()
            .zip(&v)
            .filter_map(|(n, &w)| {
                let w = w * scale;
                (w != 0.0).then(|| (n.clone(), w))
            })
            .collect();
        LinearModel { weights, bias }
    }
}

/// Trains one binary logistic model.
///
/// `label_code` only seeds the shuffling stream, so that independently
/// trained labels never share a random sequence.
pub fn train_binary(
    positives: &[FeatureVector],
    negatives: &[FeatureVector],
    config: &TrainConfig,
    label_code: &str,
) -> Result<LinearModel> {
    config.validate()?;
    if positives.is_empty() {
        return Err(Error::NoPositives(label_code.into()));
    }
    let rows = IndexedRows::build(positives.iter().chain(negatives));
    let examples: Vec<(usize, bool)> = (0..positives.len())
        .map(|i| (i, true))
        .chain((0..negatives.len()).map(|i| (positives.len() + i, false)))
        .collect();
    Ok(rows.train(&examples, config, seed::derive_str(config.seed, label_code)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelModel {
    pub label: LabelPath,
    pub model: LinearModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelEnsemble {
    pub level: usize,
    /// Sorted by leaf code.
    pub models: Vec<LabelModel>,
    pub train_fingerprint: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPrediction {
    pub question_id: String,
    pub level: usize,
    pub ranked: Vec<(LabelPath, f64)>,
}

impl RankedPrediction {
    pub fn top(&self) -> Option<&LabelPath> {
        self.ranked.first().map(|(l, _)| l)
    }

    pub fn labels(&self) -> impl Iterator<Item = &LabelPath> {
        self.ranked.iter().map(|(l, _)| l)
    }

    /// Sorts by descending score, ties by ascending leaf code.
    pub fn from_scores(
        question_id: String,
        level: usize,
        mut scored: Vec<(LabelPath, f64)>,
    ) -> Self {
        scored.sort_by(|a, b| by_score_then_code(a.1, b.1, &a.0, &b.0));
        RankedPrediction {
            question_id,
            level,
            ranked: scored,
        }
    }
}

fn by_score_then_code(sa: f64, sb: f64, la: &LabelPath, lb: &LabelPath) -> Ordering {
    sb.partial_cmp(&sa)
        .unwrap_or(Ordering::Equal)
        .then_with(|| la.leaf().cmp(lb.leaf()))
}

impl LevelEnsemble {
    pub fn labels(&self) -> impl Iterator<Item = &LabelPath> {
        self.models.iter().map(|m| &m.label)
    }

    /// Ranks every label of this level.
    ///
    /// Ordering uses the raw margin, so labels whose sigmoid scores
    /// saturate to the same float keep their margin order; exact margin
    /// ties fall back to ascending code.
    pub fn rank(&self, question_id: &str, x: &FeatureVector) -> RankedPrediction {
        let mut scored: Vec<(f64, &LabelPath)> = self
            .models
            .iter()
            .map(|m| (m.model.margin(x), &m.label))
            .collect();
        scored.sort_by(|a, b| by_score_then_code(a.0, b.0, a.1, b.1));
        RankedPrediction {
            question_id: question_id.into(),
            level: self.level,
            ranked: scored
                .into_iter()
                .map(|(z, l)| (l.clone(), sigmoid(z)))
                .collect(),
        }
    }
}

/// Trains every label observed at `level`.
///
/// `prev_predictions`, when given, are level `level - 1` rankings of the
/// same examples (index-aligned) and contribute `hier:` features.
pub fn train_level<E: Executor>(
    dataset: &[TrainingExample],
    level: usize,
    prev_predictions: Option<&[RankedPrediction]>,
    train: &TrainConfig,
    exec: &E,
) -> Result<LevelEnsemble> {
    train.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if let Some(prev) = prev_predictions {
        if prev.len() != dataset.len() {
            return Err(Error::LengthMismatch {
                left: dataset.len(),
                right: prev.len(),
            });
        }
    }
    let features: Vec<FeatureVector> = dataset
        .iter()
        .enumerate()
        .map(|(i, ex)| {
            with_hierarchy(
                &ex.features,
                prev_predictions.map(|p| &p[i]),
                train.top_k_hier,
            )
        })
        .collect();
    let rows = IndexedRows::build(features.iter());

    let instances = duplicate_multilabel(dataset, level)?;
    let label_sets: Vec<Vec<LabelPath>> = dataset
        .iter()
        .map(|ex| ex.labels_at(level))
        .collect::<Result<_>>()?;
    let mut labels: Vec<LabelPath> = instances
        .iter()
        .map(|(_, l)| l.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    labels.sort_by(|a, b| a.leaf().cmp(b.leaf()));

    let models = exec.map(labels.len(), |li| {
        let label = &labels[li];
        // Copies of a question that carries `label` are never its negatives.
        let examples: Vec<(usize, bool)> = instances
            .iter()
            .filter_map(|(row, l)| {
                if l == label {
                    Some((*row, true))
                } else if label_sets[*row].contains(label) {
                    None
                } else {
                    Some((*row, false))
                }
            })
            .collect();
        let model = rows.train(&examples, train, seed::derive_str(train.seed, label.leaf()));
        LabelModel {
            label: label.clone(),
            model,
        }
    });
    Ok(LevelEnsemble {
        level,
        models,
        train_fingerprint: train.fingerprint(),
    })
}

fn with_hierarchy(
    base: &FeatureVector,
    prev: Option<&RankedPrediction>,
    top_k: usize,
) -> FeatureVector {
    let mut x = base.clone();
    if let Some(p) = prev {
        x.merge(hierarchy_features(p, top_k));
    }
    x
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalClassifier {
    /// Ordered by level, starting at 1.
    pub ensembles: Vec<LevelEnsemble>,
    pub feature_config: FeatureConfig,
    pub train_config: TrainConfig,
    pub taxonomy_hash: u64,
}

impl HierarchicalClassifier {
    /// Trains levels `1..=max_level` from coarse to fine.
    pub fn train<E: Executor>(
        dataset: &[TrainingExample],
        max_level: usize,
        feature_config: &FeatureConfig,
        train_config: &TrainConfig,
        taxonomy_hash: u64,
        exec: &E,
    ) -> Result<Self> {
        if max_level < 1 {
            return Err(Error::InvalidLevel {
                level: max_level,
                max: usize::MAX,
            });
        }
        let mut ensembles: Vec<LevelEnsemble> = Vec::with_capacity(max_level);
        let mut prev: Option<Vec<RankedPrediction>> = None;
        for level in 1..=max_level {
            let feed = if feature_config.use_hierarchy {
                prev.as_deref()
            } else {
                None
            };
            let ensemble = train_level(dataset, level, feed, train_config, exec)?;
            if feature_config.use_hierarchy && level < max_level {
                let ranked = exec.map(dataset.len(), |i| {
                    let x = with_hierarchy(
                        &dataset[i].features,
                        feed.map(|p| &p[i]),
                        train_config.top_k_hier,
                    );
                    ensemble.rank(&dataset[i].id, &x)
                });
                prev = Some(ranked);
            }
            ensembles.push(ensemble);
        }
        Ok(HierarchicalClassifier {
            ensembles,
            feature_config: feature_config.clone(),
            train_config: train_config.clone(),
            taxonomy_hash,
        })
    }

    pub fn max_level(&self) -> usize {
        self.ensembles.len()
    }

    /// Rankings for levels `1..=level`, each fed by the one before.
    pub fn predict_levels(
        &self,
        question_id: &str,
        base: &FeatureVector,
        level: usize,
    ) -> Result<Vec<RankedPrediction>> {
        if level < 1 || level > self.ensembles.len() {
            return Err(Error::UntrainedLevel(level));
        }
        let mut out: Vec<RankedPrediction> = Vec::with_capacity(level);
        for ensemble in &self.ensembles[..level] {
            let prev = if self.feature_config.use_hierarchy {
                out.last()
            } else {
                None
            };
            let x = with_hierarchy(base, prev, self.train_config.top_k_hier);
            out.push(ensemble.rank(question_id, &x));
        }
        Ok(out)
    }

    /// Ranked labels at `level`, given the question's base features.
    pub fn predict_ranked(
        &self,
        question_id: &str,
        base: &FeatureVector,
        level: usize,
    ) -> Result<RankedPrediction> {
        let mut all = self.predict_levels(question_id, base, level)?;
        Ok(all.pop().expect("level >= 1"))
    }
}
