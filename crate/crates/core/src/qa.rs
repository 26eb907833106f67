//! Coupling question classification with multiple-choice QA.
//!
//! A question is expanded by prefixing the definition chain of one of its
//! labels; a solver scores each answer candidate against the (possibly
//! expanded) question and the top-scoring candidate is the answer.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{LabelMap, Question};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::metrics::EvalReport;
use crate::seed;
use crate::taxonomy::{LabelPath, Taxonomy};
use crate::text::{content_terms, Idf};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandedQuestion {
    pub id: String,
    pub original: String,
    pub prefix: String,
    pub expanded: String,
}

impl ExpandedQuestion {
    pub fn unexpanded(question: &Question) -> Self {
        ExpandedQuestion {
            id: question.id.clone(),
            original: question.text.clone(),
            prefix: String::new(),
            expanded: question.text.clone(),
        }
    }
}

/// Prefixes the question with the label's definition chain.
pub fn expand_query(
    question: &Question,
    label: Option<&LabelPath>,
    taxonomy: &Taxonomy,
) -> Result<ExpandedQuestion> {
    let Some(label) = label else {
        return Ok(ExpandedQuestion::unexpanded(question));
    };
    let prefix = taxonomy.definition_chain(label)?;
    let expanded = if prefix.is_empty() {
        question.text.clone()
    } else {
        let mut s = String::with_capacity(prefix.len() + 1 + question.text.len());
        s.push_str(&prefix);
        s.push(' ');
        s.push_str(&question.text);
        s
    };
    Ok(ExpandedQuestion {
        id: question.id.clone(),
        original: question.text.clone(),
        prefix,
        expanded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScores {
    pub question_id: String,
    pub scores: BTreeMap<String, f64>,
}

impl CandidateScores {
    /// Highest-scoring candidate of `question`; ties go to the smaller key.
    pub fn argmax<'q>(&self, question: &'q Question) -> Result<&'q str> {
        let mut best: Option<(&str, f64)> = None;
        for c in &question.candidates {
            let s = *self
                .scores
                .get(&c.key)
                .ok_or_else(|| Error::InvalidQuestion {
                    id: question.id.clone(),
                    reason: alloc::format!("no score for candidate `{}`", c.key),
                })?;
            if !s.is_finite() {
                return Err(Error::InvalidQuestion {
                    id: question.id.clone(),
                    reason: alloc::format!("non-finite score for candidate `{}`", c.key),
                });
            }
            best = match best {
                Some((k, b)) if b > s || (b == s && k < c.key.as_str()) => Some((k, b)),
                _ => Some((&c.key, s)),
            };
        }
        best.map(|(k, _)| k).ok_or_else(|| Error::InvalidQuestion {
            id: question.id.clone(),
            reason: "no candidates".to_string(),
        })
    }
}

/// Scores answer candidates. Must be a pure function of its inputs; `run`
/// is the only source of variation between repeated runs.
pub trait QaSolver: Sync {
    fn score(
        &self,
        question: &Question,
        expanded: &ExpandedQuestion,
        run: u64,
    ) -> Result<CandidateScores>;
}

/// Idf-weighted overlap between the question's content terms and each
/// candidate's, optionally widened with the candidate's best-matching
/// reference sentence.
#[derive(Debug, Clone, Default)]
pub struct OverlapSolver {
    idf: Idf,
    reference: Vec<BTreeSet<String>>,
}

impl OverlapSolver {
    pub fn new(idf: Idf) -> Self {
        OverlapSolver {
            idf,
            reference: Vec::new(),
        }
    }

    /// Idf estimated over question stems and candidate texts.
    pub fn from_questions(questions: &[Question]) -> Self {
        let docs = questions.iter().flat_map(|q| {
            core::iter::once(q.text.as_str()).chain(q.candidates.iter().map(|c| c.text.as_str()))
        });
        Self::new(Idf::from_documents(docs))
    }

    pub fn with_reference<I, S>(mut self, sentences: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.reference = sentences
            .into_iter()
            .map(|s| content_terms(s.as_ref()))
            .filter(|t| !t.is_empty())
            .collect();
        self
    }

    fn candidate_terms(&self, question: &BTreeSet<String>, text: &str) -> BTreeSet<String> {
        let mut terms = content_terms(text);
        if terms.is_empty() || self.reference.is_empty() {
            return terms;
        }
        let mut best: Option<(&BTreeSet<String>, f64)> = None;
        for sentence in &self.reference {
            if sentence.is_disjoint(&terms) {
                continue;
            }
            let s = self.idf.overlap(sentence, &terms) + self.idf.overlap(sentence, question);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((sentence, s));
            }
        }
        if let Some((sentence, _)) = best {
            terms.extend(sentence.iter().cloned());
        }
        terms
    }
}

impl QaSolver for OverlapSolver {
    fn score(
        &self,
        question: &Question,
        expanded: &ExpandedQuestion,
        _run: u64,
    ) -> Result<CandidateScores> {
        let q_terms = content_terms(&expanded.expanded);
        let scores = question
            .candidates
            .iter()
            .map(|c| {
                let terms = self.candidate_terms(&q_terms, &c.text);
                (c.key.clone(), self.idf.overlap(&q_terms, &terms))
            })
            .collect();
        Ok(CandidateScores {
            question_id: question.id.clone(),
            scores,
        })
    }
}

/// Uniform random scores, seeded per question and run.
#[derive(Debug, Clone, Copy)]
pub struct RandomSolver {
    pub seed: u64,
}

impl QaSolver for RandomSolver {
    fn score(
        &self,
        question: &Question,
        _expanded: &ExpandedQuestion,
        run: u64,
    ) -> Result<CandidateScores> {
        let mut rng = seed::rng(seed::derive(seed::derive_str(self.seed, &question.id), run));
        let scores = question
            .candidates
            .iter()
            .map(|c| (c.key.clone(), rng.gen::<f64>()))
            .collect();
        Ok(CandidateScores {
            question_id: question.id.clone(),
            scores,
        })
    }
}

/// Candidate scores produced elsewhere (for example by a neural model).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExternalScores(pub BTreeMap<String, CandidateScores>);

impl QaSolver for ExternalScores {
    fn score(
        &self,
        question: &Question,
        _expanded: &ExpandedQuestion,
        _run: u64,
    ) -> Result<CandidateScores> {
        self.0
            .get(&question.id)
            .cloned()
            .ok_or_else(|| Error::MissingPrediction(question.id.clone()))
    }
}

/// Where expansion labels come from.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelSource {
    None,
    /// First gold label of each question.
    Gold(LabelMap),
    /// Top-1 predicted label of each question.
    Predicted(BTreeMap<String, LabelPath>),
    /// Gold labels with a share of questions re-labelled at random, fresh
    /// per run.
    Perturbed {
        gold: LabelMap,
        proportion: f64,
        seed: u64,
    },
}

impl LabelSource {
    fn resolve(
        &self,
        run: u64,
        taxonomy: Option<&Taxonomy>,
        level: Option<usize>,
    ) -> Result<Option<BTreeMap<String, LabelPath>>> {
        Ok(match self {
            LabelSource::None => None,
            LabelSource::Gold(gold) => Some(first_labels(gold)),
            LabelSource::Predicted(p) => Some(p.clone()),
            LabelSource::Perturbed {
                gold,
                proportion,
                seed: s,
            } => {
                let tax = taxonomy.ok_or(Error::MissingResource("taxonomy"))?;
                let level = level.unwrap_or(tax.max_depth());
                let noisy = perturb_labels(gold, *proportion, tax, level, seed::derive(*s, run))?;
                Some(first_labels(&noisy))
            }
        })
    }
}

/// First label of every entry.
pub fn first_labels(labels: &LabelMap) -> BTreeMap<String, LabelPath> {
    labels
        .iter()
        .filter_map(|(id, l)| l.first().map(|f| (id.clone(), f.clone())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QaConfig {
    pub runs: usize,
    /// Truncate expansion labels to this level; `None` keeps full depth.
    pub level: Option<usize>,
    pub strict: bool,
}

impl Default for QaConfig {
    fn default() -> Self {
        QaConfig {
            runs: 1,
            level: None,
            strict: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QaEvaluation {
    /// One P@1 report per run, per-question values are 0/1 correctness.
    pub runs: Vec<EvalReport>,
    pub mean: f64,
}

/// QA precision@1 for one run with a fixed label assignment.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_run<S: QaSolver + ?Sized, E: Executor>(
    questions: &[Question],
    solver: &S,
    labels: Option<&BTreeMap<String, LabelPath>>,
    taxonomy: Option<&Taxonomy>,
    level: Option<usize>,
    strict: bool,
    run: u64,
    exec: &E,
) -> Result<EvalReport> {
    if labels.is_some() && taxonomy.is_none() {
        return Err(Error::MissingResource("taxonomy"));
    }
    let outcomes = exec.map(questions.len(), |i| -> Result<(String, f64)> {
        let q = &questions[i];
        let label = match labels {
            None => None,
            Some(map) => match map.get(&q.id) {
                Some(l) => Some(match level {
                    Some(k) => l.truncate(k)?,
                    None => l.clone(),
                }),
                None if strict => return Err(Error::MissingLabel(q.id.clone())),
                None => None,
            },
        };
        let expanded = match (&label, taxonomy) {
            (Some(l), Some(t)) => expand_query(q, Some(l), t)?,
            _ => ExpandedQuestion::unexpanded(q),
        };
        let scores = solver.score(q, &expanded, run)?;
        let correct = scores.argmax(q)? == q.answer_key;
        Ok((q.id.clone(), if correct { 1.0 } else { 0.0 }))
    });
    let mut values = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    values.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(EvalReport::from_values("P@1", level.unwrap_or(0), values))
}

/// QA precision@1 over `config.runs` runs.
pub fn qa_evaluate<S: QaSolver + ?Sized, E: Executor>(
    questions: &[Question],
    solver: &S,
    source: &LabelSource,
    taxonomy: Option<&Taxonomy>,
    config: &QaConfig,
    exec: &E,
) -> Result<QaEvaluation> {
    if config.runs < 1 {
        return Err(Error::Empty("run"));
    }
    let mut runs = Vec::with_capacity(config.runs);
    for run in 0..config.runs as u64 {
        let labels = source.resolve(run, taxonomy, config.level)?;
        runs.push(evaluate_run(
            questions,
            solver,
            labels.as_ref(),
            taxonomy,
            config.level,
            config.strict,
            run,
            exec,
        )?);
    }
    let mean = runs.iter().map(|r| r.value).sum::<f64>() / runs.len() as f64;
    Ok(QaEvaluation { runs, mean })
}

/// Re-labels `round(proportion * n)` questions, chosen without
/// replacement, with a uniformly drawn label at `level` that differs from
/// each of the question's own truncated labels. Untouched entries are
/// returned as they were.
pub fn perturb_labels(
    gold: &LabelMap,
    proportion: f64,
    taxonomy: &Taxonomy,
    level: usize,
    seed: u64,
) -> Result<LabelMap> {
    if !(0.0..=1.0).contains(&proportion) {
        return Err(Error::InvalidProportion(proportion));
    }
    let pool: Vec<LabelPath> = taxonomy.labels_at_level(level)?.into_iter().collect();
    if pool.len() < 2 {
        return Err(Error::TooFewLabels(level));
    }
    let ids: Vec<&String> = gold.keys().collect();
    let count = libm::round(proportion * ids.len() as f64) as usize;
    let mut rng = seed::rng(seed);
    let mut chosen = index::sample(&mut rng, ids.len(), count.min(ids.len())).into_vec();
    chosen.sort_unstable();

    let mut out = gold.clone();
    for i in chosen {
        let id = ids[i];
        let own: Vec<LabelPath> = gold[id]
            .iter()
            .map(|l| l.truncate(level))
            .collect::<Result<_>>()?;
        let mut options: Vec<&LabelPath> = pool.iter().filter(|l| !own.contains(l)).collect();
        if options.is_empty() {
            options = pool.iter().filter(|l| Some(*l) != own.first()).collect();
        }
        let pick = options[rng.gen_range(0..options.len())].clone();
        out.insert(id.clone(), alloc::vec![pick]);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub proportion: f64,
    pub mean_p_at_1: f64,
    pub stddev: f64,
    pub runs: usize,
}

/// Mean QA precision@1 per noise proportion over `runs` perturbations.
#[allow(clippy::too_many_arguments)]
pub fn noise_sweep<S: QaSolver + ?Sized, E: Executor>(
    questions: &[Question],
    gold: &LabelMap,
    solver: &S,
    taxonomy: &Taxonomy,
    level: usize,
    proportions: &[f64],
    runs: usize,
    seed: u64,
    exec: &E,
) -> Result<Vec<SweepRow>> {
    if proportions.is_empty() {
        return Err(Error::Empty("proportion"));
    }
    if runs < 1 {
        return Err(Error::Empty("run"));
    }
    let jobs = proportions.len() * runs;
    let results = exec.map(jobs, |job| -> Result<f64> {
        let (pi, run) = (job / runs, (job % runs) as u64);
        let noisy = perturb_labels(
            gold,
            proportions[pi],
            taxonomy,
            level,
            seed::derive(seed::derive(seed, pi as u64), run),
        )?;
        let labels = first_labels(&noisy);
        let report = evaluate_run(
            questions,
            solver,
            Some(&labels),
            Some(taxonomy),
            Some(level),
            true,
            run,
            &crate::exec::Serial,
        )?;
        Ok(report.value)
    });
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(proportions
        .iter()
        .enumerate()
        .map(|(pi, &proportion)| {
            let xs = &results[pi * runs..(pi + 1) * runs];
            let mean = xs.iter().sum::<f64>() / runs as f64;
            let stddev = if runs > 1 {
                libm::sqrt(
                    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (runs - 1) as f64,
                )
            } else {
                0.0
            };
            SweepRow {
                proportion,
                mean_p_at_1: mean,
                stddev,
                runs,
            }
        })
        .collect())
}
