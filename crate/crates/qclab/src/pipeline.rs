//! In-process train / predict composition used by the CLI and tests.

use std::collections::BTreeSet;
use std::path::Path;

use qclab_core::classifier::TrainingExample;
use qclab_core::corpus::LabelMap;
use qclab_core::features::{base_features, SenseInventory};
use qclab_core::{
    Executor, FeatureConfig, FeatureVector, HierarchicalClassifier, Question, RankedPrediction,
    Resources, Split, Taxonomy, TrainConfig,
};

use crate::config::RunConfig;
use crate::error::{usage, Error, Result};
use crate::formats;

/// Loads only the resources `features` needs.
pub fn load_resources(cfg: &RunConfig, features: &FeatureConfig) -> Result<Resources> {
    let mut res = Resources::default();
    if features.use_pos_tagged || features.use_dependencies || features.use_hypernyms {
        let path = cfg.require(&cfg.parses, "parses")?;
        res.annotations = Some(formats::parse_conll(path, &formats::read_text(path)?)?);
    }
    if features.use_hypernyms {
        let senses = cfg.require(&cfg.senses, "senses")?;
        let edges = cfg.require(&cfg.hypernyms, "hypernyms")?;
        let senses = formats::parse_senses(senses, &formats::read_text(senses)?)?;
        let edges_list = formats::parse_hypernyms(edges, &formats::read_text(edges)?)?;
        res.senses = Some(
            SenseInventory::new(senses, edges_list)
                .map_err(|e| Error::data(edges, e.to_string()))?,
        );
    }
    if features.use_topics {
        res.topics = Some(formats::read_wordlists(
            cfg.require(&cfg.wordlists, "wordlists")?,
        )?);
    }
    if features.use_essential {
        if let Some(path) = &cfg.essential {
            res.essential = Some(formats::parse_essential(path, &formats::read_text(path)?)?);
        }
    }
    Ok(res)
}

/// Base feature vectors, index-aligned with `questions`.
pub fn features<E: Executor>(
    questions: &[Question],
    config: &FeatureConfig,
    resources: &Resources,
    exec: &E,
) -> Result<Vec<FeatureVector>> {
    exec.map(questions.len(), |i| {
        base_features(&questions[i], config, resources)
    })
    .into_iter()
    .map(|r| r.map_err(Error::from))
    .collect()
}

/// Questions of `split` (all when `None`), in input order.
pub fn select(questions: &[Question], split: Option<Split>) -> Vec<&Question> {
    questions
        .iter()
        .filter(|q| split.is_none_or(|s| q.split == Some(s)))
        .collect()
}

fn examples(
    questions: &[&Question],
    features: &[FeatureVector],
    gold: &LabelMap,
) -> Vec<TrainingExample> {
    questions
        .iter()
        .zip(features)
        .filter_map(|(q, x)| {
            gold.get(&q.id)
                .map(|ls| TrainingExample::new(q.id.clone(), x.clone(), ls.clone()))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn train<E: Executor>(
    questions: &[&Question],
    features: &[FeatureVector],
    gold: &LabelMap,
    taxonomy: &Taxonomy,
    level: usize,
    feature_config: &FeatureConfig,
    train_config: &TrainConfig,
    exec: &E,
) -> Result<HierarchicalClassifier> {
    taxonomy.check_level(level)?;
    let data = examples(questions, features, gold);
    if data.is_empty() {
        return Err(usage("no labelled questions to train on"));
    }
    Ok(HierarchicalClassifier::train(
        &data,
        level,
        feature_config,
        train_config,
        taxonomy.fingerprint(),
        exec,
    )?)
}

pub fn predict<E: Executor>(
    model: &HierarchicalClassifier,
    questions: &[&Question],
    features: &[FeatureVector],
    level: usize,
    exec: &E,
) -> Result<Vec<RankedPrediction>> {
    exec.map(questions.len(), |i| {
        model.predict_ranked(&questions[i].id, &features[i], level)
    })
    .into_iter()
    .map(|r| r.map_err(Error::from))
    .collect()
}

/// Out-of-fold predictions: question `i` of `questions` falls in fold
/// `i % folds` and is ranked by a model trained on the other folds.
#[allow(clippy::too_many_arguments)]
pub fn cross_val_predict<E: Executor>(
    questions: &[&Question],
    features: &[FeatureVector],
    gold: &LabelMap,
    taxonomy: &Taxonomy,
    level: usize,
    folds: usize,
    feature_config: &FeatureConfig,
    train_config: &TrainConfig,
    exec: &E,
) -> Result<Vec<RankedPrediction>> {
    if folds < 2 {
        return Err(usage("--cv needs at least 2 folds"));
    }
    if questions.len() < folds {
        return Err(usage(format!(
            "--cv {folds} needs at least {folds} questions, found {}",
            questions.len()
        )));
    }
    let mut out: Vec<Option<RankedPrediction>> = vec![None; questions.len()];
    for fold in 0..folds {
        let (held, kept): (Vec<usize>, Vec<usize>) =
            (0..questions.len()).partition(|i| i % folds == fold);
        let pick = |idx: &[usize]| -> (Vec<&Question>, Vec<FeatureVector>) {
            idx.iter()
                .map(|&i| (questions[i], features[i].clone()))
                .unzip()
        };
        let (tq, tf) = pick(&kept);
        let model = train(
            &tq,
            &tf,
            gold,
            taxonomy,
            level,
            feature_config,
            train_config,
            exec,
        )?;
        let (hq, hf) = pick(&held);
        for (i, p) in held.iter().zip(predict(&model, &hq, &hf, level, exec)?) {
            out[*i] = Some(p);
        }
    }
    Ok(out
        .into_iter()
        .map(|p| p.expect("every index is held out once"))
        .collect())
}

pub fn ids(questions: &[Question]) -> BTreeSet<String> {
    questions.iter().map(|q| q.id.clone()).collect()
}

/// Loads taxonomy, questions and (optionally) gold labels named by `cfg`.
pub struct Corpus {
    pub taxonomy: Taxonomy,
    pub questions: Vec<Question>,
    pub gold: Option<LabelMap>,
}

impl Corpus {
    pub fn load(cfg: &RunConfig, need_gold: bool) -> Result<Self> {
        let taxonomy = formats::read_taxonomy(cfg.require(&cfg.taxonomy, "taxonomy")?)?;
        let questions = formats::read_questions(cfg.require(&cfg.questions, "questions")?)?;
        let gold = match (&cfg.gold, need_gold) {
            (Some(p), _) => Some(read_gold(p, &taxonomy, &questions, cfg.strict())?),
            (None, true) => return Err(usage("missing --gold (flag or config file)")),
            (None, false) => None,
        };
        Ok(Corpus {
            taxonomy,
            questions,
            gold,
        })
    }

    pub fn gold(&self) -> &LabelMap {
        self.gold.as_ref().expect("loaded with need_gold")
    }
}

pub fn read_gold(
    path: &Path,
    taxonomy: &Taxonomy,
    questions: &[Question],
    strict: bool,
) -> Result<LabelMap> {
    formats::read_labels(path, taxonomy, Some(&ids(questions)), strict)
}
