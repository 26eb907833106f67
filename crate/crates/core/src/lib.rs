//! Hierarchical multi-label question classification.
//!
//! The crate is `no_std` (with `alloc`) and contains the algorithmic side of
//! the toolkit: the label taxonomy, sparse feature extraction, per-level
//! one-vs-all linear classifiers chained from coarse to fine, ranked-label
//! metrics and agreement statistics, query expansion for multiple-choice QA,
//! and automated error analyses. File formats, persistence and the CLI live
//! in the `qclab` crate.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod classifier;
pub mod corpus;
mod error;
pub mod exec;
pub mod features;
pub mod metrics;
pub mod qa;
pub mod seed;
pub mod synth;
pub mod taxonomy;
pub mod text;

pub use classifier::{
    HierarchicalClassifier, LevelEnsemble, LinearModel, RankedPrediction, TrainConfig,
};
pub use corpus::{AnnotationRecord, AnswerCandidate, LabeledQuestion, Question, Split};
pub use error::{Error, Result};
pub use exec::{Executor, Serial};
pub use features::{FeatureConfig, FeatureVector, Resources};
pub use metrics::{EvalReport, SignificanceResult};
pub use taxonomy::{LabelPath, Taxonomy, TaxonomyNode};
