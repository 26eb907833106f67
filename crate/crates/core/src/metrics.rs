//! Ranking metrics, multi-label set metrics, agreement and significance.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::classifier::RankedPrediction;
use crate::corpus::LabelMap;
use crate::error::{Error, Result};
use crate::exec::{Executor, Serial};
use crate::seed;
use crate::taxonomy::LabelPath;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metric: String,
    pub level: usize,
    pub value: f64,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    /// `(question id, value)` in id order.
    #[serde(skip)]
    pub per_question: Vec<(String, f64)>,
}

impl EvalReport {
    pub fn from_values(metric: &str, level: usize, per_question: Vec<(String, f64)>) -> Self {
        let n = per_question.len();
        let value = if n == 0 {
            0.0
        } else {
            per_question.iter().map(|(_, v)| v).sum::<f64>() / n as f64
        };
        EvalReport {
            metric: metric.to_string(),
            level,
            value,
            n,
            p_value: None,
            per_question,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.per_question.iter().map(|(_, v)| *v).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    pub p_value: f64,
    pub resamples: usize,
    pub statistic: String,
    /// `mean(B) - mean(A)` on the original sample.
    pub observed_difference: f64,
}

/// Mean over gold labels of precision at the rank where each appears.
/// Gold labels missing from `ranked` contribute zero.
pub fn average_precision<T: PartialEq>(ranked: &[T], gold: &[T]) -> Result<f64> {
    let mut distinct: Vec<&T> = Vec::with_capacity(gold.len());
    for g in gold {
        if !distinct.contains(&g) {
            distinct.push(g);
        }
    }
    if distinct.is_empty() {
        return Err(Error::EmptyGold(String::new()));
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, item) in ranked.iter().enumerate() {
        if distinct.contains(&item) {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
            if hits == distinct.len() {
                break;
            }
        }
    }
    Ok(sum / distinct.len() as f64)
}

fn gold_at(id: &str, labels: &[LabelPath], level: usize) -> Result<Vec<LabelPath>> {
    let mut out: Vec<LabelPath> = Vec::with_capacity(labels.len());
    for l in labels {
        let t = l.truncate(level)?;
        if !out.contains(&t) {
            out.push(t);
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyGold(id.to_string()));
    }
    Ok(out)
}

fn per_question<F>(
    predictions: &BTreeMap<String, RankedPrediction>,
    gold: &LabelMap,
    level: usize,
    strict: bool,
    score: F,
) -> Result<Vec<(String, f64)>>
where
    F: Fn(&RankedPrediction, &[LabelPath]) -> Result<f64>,
{
    let mut out = Vec::with_capacity(gold.len());
    for (id, labels) in gold {
        let g = gold_at(id, labels, level)?;
        let v = match predictions.get(id) {
            Some(p) => score(p, &g)?,
            None if strict => return Err(Error::MissingPrediction(id.clone())),
            None => 0.0,
        };
        out.push((id.clone(), v));
    }
    Ok(out)
}

/// Mean average precision over every question in `gold`, labels truncated to `level`.
/// In lenient mode a missing prediction scores zero.
pub fn map_score(
    predictions: &BTreeMap<String, RankedPrediction>,
    gold: &LabelMap,
    level: usize,
    strict: bool,
) -> Result<EvalReport> {
    let values = per_question(predictions, gold, level, strict, |p, g| {
        let ranked: Vec<&LabelPath> = p.labels().collect();
        let g: Vec<&LabelPath> = g.iter().collect();
        average_precision(&ranked, &g)
    })?;
    Ok(EvalReport::from_values("MAP", level, values))
}

/// Fraction of questions whose top-ranked label is one of the gold labels.
pub fn p_at_1(
    predictions: &BTreeMap<String, RankedPrediction>,
    gold: &LabelMap,
    level: usize,
    strict: bool,
) -> Result<EvalReport> {
    let values = per_question(predictions, gold, level, strict, |p, g| {
        Ok(match p.top() {
            Some(top) if g.contains(top) => 1.0,
            _ => 0.0,
        })
    })?;
    Ok(EvalReport::from_values("P@1", level, values))
}

/// Micro-averaged F1 over label instances pooled across questions.
pub fn multilabel_micro_f1<T: Ord>(pred: &[Vec<T>], gold: &[Vec<T>]) -> Result<f64> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: gold.len(),
        });
    }
    let (mut tp, mut fp, mut fun) = (0usize, 0usize, 0usize);
    for (p, g) in pred.iter().zip(gold) {
        let p: BTreeSet<&T> = p.iter().collect();
        let g: BTreeSet<&T> = g.iter().collect();
        let inter = p.intersection(&g).count();
        tp += inter;
        fp += p.len() - inter;
        fun += g.len() - inter;
    }
    let denom = 2 * tp + fp + fun;
    Ok(if denom == 0 {
        1.0
    } else {
        (2 * tp) as f64 / denom as f64
    })
}

/// Mean Jaccard overlap per question; two empty sets count as 1.
pub fn multilabel_accuracy<T: Ord>(pred: &[Vec<T>], gold: &[Vec<T>]) -> Result<f64> {
    if pred.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: gold.len(),
        });
    }
    if pred.is_empty() {
        return Ok(1.0);
    }
    let total: f64 = pred
        .iter()
        .zip(gold)
        .map(|(p, g)| {
            let p: BTreeSet<&T> = p.iter().collect();
            let g: BTreeSet<&T> = g.iter().collect();
            let union = p.union(&g).count();
            if union == 0 {
                1.0
            } else {
                p.intersection(&g).count() as f64 / union as f64
            }
        })
        .sum();
    Ok(total / pred.len() as f64)
}

/// One annotator's side of a paired evaluation; `Missing` never agrees
/// with anything, including the other annotator's `Missing`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Judgement<T> {
    Label(T),
    Missing,
}

/// Pairs two label lists for agreement counting.
///
/// Exact matches are paired first, leftovers pair up in order, and the
/// shorter list is padded with `Missing`.
pub fn pair_labels<T: Clone + Ord>(a: &[T], b: &[T]) -> Vec<(Judgement<T>, Judgement<T>)> {
    let a: Vec<&T> = a.iter().collect::<BTreeSet<_>>().into_iter().collect();
    let b: Vec<&T> = b.iter().collect::<BTreeSet<_>>().into_iter().collect();
    let mut pairs = Vec::with_capacity(a.len().max(b.len()));
    let mut rest_a = Vec::new();
    for x in &a {
        if b.contains(x) {
            pairs.push((
                Judgement::Label((*x).clone()),
                Judgement::Label((*x).clone()),
            ));
        } else {
            rest_a.push(*x);
        }
    }
    let rest_b: Vec<&T> = b.iter().copied().filter(|y| !a.contains(y)).collect();
    let n = rest_a.len().max(rest_b.len());
    for i in 0..n {
        let ja = rest_a
            .get(i)
            .map_or(Judgement::Missing, |x| Judgement::Label((*x).clone()));
        let jb = rest_b
            .get(i)
            .map_or(Judgement::Missing, |y| Judgement::Label((*y).clone()));
        pairs.push((ja, jb));
    }
    pairs
}

/// Cohen's kappa over paired judgements.
pub fn kappa<T: Ord>(pairs: &[(Judgement<T>, Judgement<T>)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Empty("paired judgement"));
    }
    let n = pairs.len() as f64;
    let mut agree = 0usize;
    let mut ma: BTreeMap<&T, usize> = BTreeMap::new();
    let mut mb: BTreeMap<&T, usize> = BTreeMap::new();
    for (a, b) in pairs {
        if let (Judgement::Label(x), Judgement::Label(y)) = (a, b) {
            if x == y {
                agree += 1;
            }
        }
        if let Judgement::Label(x) = a {
            *ma.entry(x).or_insert(0) += 1;
        }
        if let Judgement::Label(y) = b {
            *mb.entry(y).or_insert(0) += 1;
        }
    }
    let p_o = agree as f64 / n;
    let p_e: f64 = ma
        .iter()
        .filter_map(|(k, ca)| mb.get(k).map(|cb| (*ca as f64 / n) * (*cb as f64 / n)))
        .sum();
    if (1.0 - p_e).abs() < 1e-15 {
        return Ok(if p_o >= 1.0 { 1.0 } else { 0.0 });
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Paired evaluations of two annotators at a truncation level.
pub fn agreement_pairs(
    a: &LabelMap,
    b: &LabelMap,
    level: usize,
) -> Result<Vec<(Judgement<LabelPath>, Judgement<LabelPath>)>> {
    if let Some(id) = a
        .keys()
        .find(|k| !b.contains_key(*k))
        .or_else(|| b.keys().find(|k| !a.contains_key(*k)))
    {
        return Err(Error::IdMismatch(id.clone()));
    }
    let mut pairs = Vec::new();
    for (id, la) in a {
        let ta = gold_at(id, la, level)?;
        let tb = gold_at(id, &b[id], level)?;
        pairs.extend(pair_labels(&ta, &tb));
    }
    Ok(pairs)
}

/// Kappa between two annotators with labels truncated to `level`.
pub fn cohens_kappa(a: &LabelMap, b: &LabelMap, level: usize) -> Result<f64> {
    kappa(&agreement_pairs(a, b, level)?)
}

/// One-sided paired bootstrap: the share of resamples in which
/// `mean(B) - mean(A) <= 0`.
pub fn bootstrap_significance(
    scores_a: &[f64],
    scores_b: &[f64],
    n_resamples: usize,
    seed: u64,
) -> Result<SignificanceResult> {
    bootstrap_significance_with(&Serial, scores_a, scores_b, n_resamples, seed)
}

/// [`bootstrap_significance`] with resamples distributed over `exec`.
///
/// Resample `r` draws from its own stream `derive(seed, r)` over the
/// sorted paired differences, so the result depends neither on the
/// executor nor on the order the questions were given in.
pub fn bootstrap_significance_with<E: Executor>(
    exec: &E,
    scores_a: &[f64],
    scores_b: &[f64],
    n_resamples: usize,
    seed: u64,
) -> Result<SignificanceResult> {
    if scores_a.len() != scores_b.len() {
        return Err(Error::LengthMismatch {
            left: scores_a.len(),
            right: scores_b.len(),
        });
    }
    if n_resamples < 1 {
        return Err(Error::Empty("resample"));
    }
    if scores_a.is_empty() {
        return Err(Error::Empty("question"));
    }
    let mut diffs: Vec<f64> = scores_a.iter().zip(scores_b).map(|(a, b)| b - a).collect();
    diffs.sort_by(f64::total_cmp);
    let n = diffs.len();
    let observed = diffs.iter().sum::<f64>() / n as f64;
    let not_better = exec.map(n_resamples, |r| {
        let mut rng = seed::rng(seed::derive(seed, r as u64));
        let total: f64 = (0..n).map(|_| diffs[rng.gen_range(0..n)]).sum();
        total <= 0.0
    });
    let count = not_better.iter().filter(|&&x| x).count();
    Ok(SignificanceResult {
        p_value: count as f64 / n_resamples as f64,
        resamples: n_resamples,
        statistic: "paired bootstrap, one-sided, P(mean(B) - mean(A) <= 0)".to_string(),
        observed_difference: observed,
    })
}

/// `-2 * sum(ln p)`.
pub fn fisher_statistic(p_values: &[f64]) -> Result<f64> {
    if p_values.is_empty() {
        return Err(Error::Empty("p-value"));
    }
    let mut x = 0.0;
    for &p in p_values {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidPValue(p));
        }
        x -= 2.0 * libm::log(p);
    }
    Ok(x)
}

/// Fisher's combined p-value: the chi-squared (2k df) survival of the
/// statistic, via the exact even-df series.
pub fn fisher_combine(p_values: &[f64]) -> Result<f64> {
    let x = fisher_statistic(p_values)?;
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for i in 1..p_values.len() {
        term *= half / i as f64;
        sum += term;
    }
    Ok((libm::exp(-half) * sum).clamp(0.0, 1.0))
}
