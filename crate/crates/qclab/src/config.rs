use std::path::{Path, PathBuf};

use qclab_core::{FeatureConfig, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::{usage, Error, Result};
use crate::formats::read_text;

pub const DEFAULT_SEED: u64 = 42;

/// A preset name or a full extractor configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureSpec {
    Preset(String),
    Config(FeatureConfig),
}

impl FeatureSpec {
    pub fn resolve(&self) -> Result<FeatureConfig> {
        match self {
            FeatureSpec::Preset(name) => FeatureConfig::preset(name)
                .ok_or_else(|| usage(format!("unknown feature preset `{name}`"))),
            FeatureSpec::Config(c) => Ok(c.clone()),
        }
    }
}

/// Everything a run needs. Every field is optional so a config file and
/// command-line flags can be layered; flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub taxonomy: Option<PathBuf>,
    pub questions: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    pub annotations: Option<PathBuf>,
    pub parses: Option<PathBuf>,
    pub senses: Option<PathBuf>,
    pub hypernyms: Option<PathBuf>,
    pub wordlists: Option<PathBuf>,
    pub essential: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub predictions: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub features: Option<FeatureSpec>,
    pub train: Option<TrainConfig>,
    pub level: Option<usize>,
    pub seed: Option<u64>,
    pub strict: Option<bool>,
    pub threads: Option<usize>,
}

impl RunConfig {
    /// Relative paths in a config file resolve against the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        for p in [
            &mut self.taxonomy,
            &mut self.questions,
            &mut self.gold,
            &mut self.annotations,
            &mut self.parses,
            &mut self.senses,
            &mut self.hypernyms,
            &mut self.wordlists,
            &mut self.essential,
            &mut self.model,
            &mut self.predictions,
            &mut self.scores,
            &mut self.reference,
            &mut self.output,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    /// Fields set in `flags` replace those in `self`.
    pub fn overlay(self, flags: RunConfig) -> RunConfig {
        RunConfig {
            taxonomy: flags.taxonomy.or(self.taxonomy),
            questions: flags.questions.or(self.questions),
            gold: flags.gold.or(self.gold),
            annotations: flags.annotations.or(self.annotations),
            parses: flags.parses.or(self.parses),
            senses: flags.senses.or(self.senses),
            hypernyms: flags.hypernyms.or(self.hypernyms),
            wordlists: flags.wordlists.or(self.wordlists),
            essential: flags.essential.or(self.essential),
            model: flags.model.or(self.model),
            predictions: flags.predictions.or(self.predictions),
            scores: flags.scores.or(self.scores),
            reference: flags.reference.or(self.reference),
            output: flags.output.or(self.output),
            features: flags.features.or(self.features),
            train: flags.train.or(self.train),
            level: flags.level.or(self.level),
            seed: flags.seed.or(self.seed),
            strict: flags.strict.or(self.strict),
            threads: flags.threads.or(self.threads),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn strict(&self) -> bool {
        self.strict.unwrap_or(false)
    }

    pub fn feature_config(&self) -> Result<FeatureConfig> {
        let c = match &self.features {
            Some(spec) => spec.resolve()?,
            None => FeatureConfig::default(),
        };
        c.validate()?;
        Ok(c)
    }

    /// The train config with the run seed applied.
    pub fn train_config(&self) -> Result<TrainConfig> {
        let mut c = self.train.clone().unwrap_or_default();
        if let Some(seed) = self.seed {
            c.seed = seed;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn require<'a>(&self, field: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
        field
            .as_deref()
            .ok_or_else(|| usage(format!("missing --{flag} (flag or config file)")))
    }
}
