use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate taxonomy code `{0}`")]
    DuplicateCode(String),
    #[error("taxonomy node `{code}` references missing parent `{parent}`")]
    MissingParent { code: String, parent: String },
    #[error("cycle detected in taxonomy at `{0}`")]
    Cycle(String),
    #[error("unknown label code `{0}`")]
    UnknownCode(String),
    #[error("label path is not a chain of parent/child edges at `{0}`")]
    BrokenPath(String),
    #[error("invalid level {level} (must be in 1..={max})")]
    InvalidLevel { level: usize, max: usize },
    #[error("question `{id}`: {reason}")]
    InvalidQuestion { id: String, reason: String },
    #[error("duplicate question id `{0}`")]
    DuplicateQuestion(String),
    #[error("question `{id}` has {count} labels (at most 2 allowed)")]
    TooManyLabels { id: String, count: usize },
    #[error("question `{id}` has duplicate label `{code}`")]
    DuplicateLabel { id: String, code: String },
    #[error("unknown question id `{0}`")]
    UnknownQuestion(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("token {index} has head {head} outside sentence of length {len}")]
    HeadOutOfRange {
        index: usize,
        head: usize,
        len: usize,
    },
    #[error("feature configuration enables no extractor")]
    NoExtractor,
    #[error("extractor `{0}` is enabled but its resource is missing")]
    MissingResource(&'static str),
    #[error("cannot train label `{0}`: no positive instances")]
    NoPositives(String),
    #[error("empty training set")]
    EmptyDataset,
    #[error("level {0} has not been trained")]
    UntrainedLevel(usize),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("question `{0}` has no gold labels")]
    EmptyGold(String),
    #[error("no prediction for question `{0}`")]
    MissingPrediction(String),
    #[error("annotators cover different question ids (first mismatch `{0}`)")]
    IdMismatch(String),
    #[error("p-value {0} outside (0, 1]")]
    InvalidPValue(f64),
    #[error("need at least one {0}")]
    Empty(&'static str),
    #[error("proportion {0} outside [0, 1]")]
    InvalidProportion(f64),
    #[error("level {0} offers fewer than 2 labels to perturb between")]
    TooFewLabels(usize),
    #[error("question `{0}` has no label for expansion")]
    MissingLabel(String),
}
