use std::fs;

use qclab::{model, pipeline, Error};
use qclab_core::synth::{classification_corpus, ClassificationSpec};
use qclab_core::{
    FeatureConfig, HierarchicalClassifier, Question, Resources, Serial, Taxonomy, TrainConfig,
};
use tempfile::TempDir;

fn trained() -> (HierarchicalClassifier, Vec<Question>, Taxonomy) {
    let corpus = classification_corpus(&ClassificationSpec {
        questions: 80,
        ..Default::default()
    })
    .unwrap();
    let taxonomy = Taxonomy::from_rows(corpus.taxonomy).unwrap();
    let fc = FeatureConfig::unigram();
    let features =
        pipeline::features(&corpus.questions, &fc, &Resources::default(), &Serial).unwrap();
    let qs: Vec<&Question> = corpus.questions.iter().collect();
    let tc = TrainConfig {
        epochs: 5,
        ..Default::default()
    };
    let m = pipeline::train(
        &qs,
        &features,
        &corpus.labels,
        &taxonomy,
        3,
        &fc,
        &tc,
        &Serial,
    )
    .unwrap();
    (m, corpus.questions, taxonomy)
}

#[test]
fn save_then_load_predicts_identically() {
    let (m, questions, _) = trained();
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("nested/model.json");
    model::save(&path, &m).unwrap();
    let loaded = model::load(&path).unwrap();
    assert_eq!(loaded, m);

    let fc = &loaded.feature_config;
    let features = pipeline::features(&questions, fc, &Resources::default(), &Serial).unwrap();
    let qs: Vec<&Question> = questions.iter().collect();
    for level in 1..=3 {
        assert_eq!(
            pipeline::predict(&m, &qs, &features, level, &Serial).unwrap(),
            pipeline::predict(&loaded, &qs, &features, level, &Serial).unwrap()
        );
    }
    // Serializing the loaded model gives the same bytes.
    assert_eq!(
        model::to_json(&loaded).unwrap(),
        fs::read_to_string(&path).unwrap()
    );
}

#[test]
fn rejects_foreign_and_future_files() {
    let (m, _, _) = trained();
    let text = model::to_json(&m).unwrap();
    let p = std::path::Path::new("m.json");

    let err = model::from_json(p, r#"{"weights":[]}"#).unwrap_err();
    assert!(matches!(err, Error::Model { .. }));
    assert!(err.to_string().contains("bad magic"));

    let future = text.replacen("\"version\":1", "\"version\":99", 1);
    let err = model::from_json(p, &future).unwrap_err();
    assert!(err.to_string().contains("version 99"));

    let err = model::from_json(p, &text[..text.len() / 2]).unwrap_err();
    assert!(err.to_string().contains("corrupt"));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn refuses_to_write_non_finite_weights() {
    let (mut m, _, _) = trained();
    let w = &mut m.ensembles[0].models[0].model;
    w.bias = f64::NAN;
    let err = model::to_json(&m).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn taxonomy_mismatch_is_lenient_unless_strict() {
    let (m, _, taxonomy) = trained();
    let p = std::path::Path::new("m.json");
    model::check_taxonomy(p, &m, &taxonomy, true).unwrap();
    let other = Taxonomy::from_rows(qclab_core::synth::balanced_tree(&[2, 2], 0)).unwrap();
    model::check_taxonomy(p, &m, &other, false).unwrap();
    assert!(model::check_taxonomy(p, &m, &other, true).is_err());
}
