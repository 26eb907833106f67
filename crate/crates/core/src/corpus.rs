//! Multiple-choice questions and their labels.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::{LabelPath, Taxonomy};
use crate::text::{sentence_count, tokenize};

pub const MAX_LABELS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerCandidate {
    pub key: String,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub text: String,
    pub candidates: Vec<AnswerCandidate>,
    pub answer_key: String,
    pub grade: Option<u32>,
    pub split: Option<Split>,
}

impl Question {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::InvalidQuestion {
            id: self.id.clone(),
            reason: reason.to_string(),
        };
        if self.text.trim().is_empty() {
            return Err(bad("empty question text"));
        }
        let mut keys = BTreeSet::new();
        for c in &self.candidates {
            if !keys.insert(c.key.as_str()) {
                return Err(bad("duplicate candidate key"));
            }
        }
        if !keys.contains(self.answer_key.as_str()) {
            return Err(bad("answer key matches no candidate"));
        }
        Ok(())
    }

    pub fn candidate(&self, key: &str) -> Option<&AnswerCandidate> {
        self.candidates.iter().find(|c| c.key == key)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledQuestion {
    pub question: Question,
    pub gold_labels: Vec<LabelPath>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub question_id: String,
    pub annotator_id: String,
    pub labels: Vec<LabelPath>,
}

/// Question id to gold (or predicted, or perturbed) label set.
pub type LabelMap = BTreeMap<String, Vec<LabelPath>>;

/// Checks a label list: 1..=2 entries, distinct, each valid in `taxonomy`.
pub fn validate_labels(id: &str, labels: &[LabelPath], taxonomy: &Taxonomy) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::EmptyGold(id.to_string()));
    }
    if labels.len() > MAX_LABELS {
        return Err(Error::TooManyLabels {
            id: id.to_string(),
            count: labels.len(),
        });
    }
    for (i, l) in labels.iter().enumerate() {
        taxonomy.validate(l)?;
        if labels[..i].contains(l) {
            return Err(Error::DuplicateLabel {
                id: id.to_string(),
                code: l.leaf().to_string(),
            });
        }
    }
    Ok(())
}

/// Resolves comma-separated codes into full paths and validates them.
pub fn resolve_codes(id: &str, codes: &[&str], taxonomy: &Taxonomy) -> Result<Vec<LabelPath>> {
    if codes.len() > MAX_LABELS {
        return Err(Error::TooManyLabels {
            id: id.to_string(),
            count: codes.len(),
        });
    }
    let labels = codes
        .iter()
        .map(|c| taxonomy.path(c.trim()))
        .collect::<Result<Vec<_>>>()?;
    validate_labels(id, &labels, taxonomy)?;
    Ok(labels)
}

/// Attaches gold labels to questions. Questions without labels are skipped.
pub fn attach_labels(questions: &[Question], labels: &LabelMap) -> Vec<LabeledQuestion> {
    questions
        .iter()
        .filter_map(|q| {
            labels.get(&q.id).map(|l| LabeledQuestion {
                question: q.clone(),
                gold_labels: l.clone(),
            })
        })
        .collect()
}

/// Rejects duplicate question ids.
pub fn check_unique_ids(questions: &[Question]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for q in questions {
        if !seen.insert(q.id.as_str()) {
            return Err(Error::DuplicateQuestion(q.id.clone()));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub dev: usize,
    pub test: usize,
}

/// Counts questions per split. Every question must carry a split tag.
pub fn split_counts(questions: &[Question]) -> Result<SplitCounts> {
    let mut counts = SplitCounts::default();
    for q in questions {
        match q.split {
            Some(Split::Train) => counts.train += 1,
            Some(Split::Dev) => counts.dev += 1,
            Some(Split::Test) => counts.test += 1,
            None => {
                return Err(Error::InvalidQuestion {
                    id: q.id.clone(),
                    reason: "missing split tag".to_string(),
                })
            }
        }
    }
    Ok(counts)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub questions: usize,
    pub mean_words: f64,
    pub mean_sentences: f64,
}

/// Mean word and sentence counts of the question stems.
pub fn corpus_stats(questions: &[Question]) -> CorpusStats {
    if questions.is_empty() {
        return CorpusStats::default();
    }
    let n = questions.len() as f64;
    let words: usize = questions.iter().map(|q| tokenize(&q.text).len()).sum();
    let sentences: usize = questions.iter().map(|q| sentence_count(&q.text)).sum();
    CorpusStats {
        questions: questions.len(),
        mean_words: words as f64 / n,
        mean_sentences: sentences as f64 / n,
    }
}
