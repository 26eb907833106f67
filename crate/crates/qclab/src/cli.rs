//! The `qclab` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use qclab_core::analysis::{
    agreement_report, per_category_report, qc_error_breakdown, DEFAULT_MIN_GROUP,
};
use qclab_core::corpus::{corpus_stats, split_counts, LabelMap};
use qclab_core::metrics::{bootstrap_significance_with, map_score, p_at_1, EvalReport};
use qclab_core::qa::{
    evaluate_run, expand_query, noise_sweep, perturb_labels, ExpandedQuestion, LabelSource,
    OverlapSolver, QaSolver, RandomSolver,
};
use qclab_core::synth;
use qclab_core::taxonomy::labels_at_level;
use qclab_core::{LabelPath, Question, Split, Taxonomy, TrainConfig};
use serde::Serialize;

use crate::config::{FeatureSpec, RunConfig};
use crate::error::{usage, Error, Result};
use crate::formats;
use crate::model;
use crate::parallel::Pool;
use crate::pipeline::{self, Corpus};

#[derive(Debug, Parser)]
#[command(
    name = "qclab",
    version,
    about = "Hierarchical question classification and its use for multiple-choice QA",
    after_help = "Exit status: 0 ok, 1 usage, 2 data error, 3 internal error. \
                  Errors are printed to stderr as one JSON object per line."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// JSON run configuration; flags override its fields
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Taxonomy TSV (code, parent, name, definition)
    #[arg(long, global = true, value_name = "FILE")]
    pub taxonomy: Option<PathBuf>,
    /// Questions JSONL
    #[arg(long, global = true, value_name = "FILE")]
    pub questions: Option<PathBuf>,
    /// Gold labels TSV (question id, codes)
    #[arg(long, global = true, value_name = "FILE")]
    pub gold: Option<PathBuf>,
    /// Annotations TSV (question id, annotator id, codes)
    #[arg(long, global = true, value_name = "FILE")]
    pub annotations: Option<PathBuf>,
    /// CoNLL-like parses for POS, dependency and hypernym features
    #[arg(long, global = true, value_name = "FILE")]
    pub parses: Option<PathBuf>,
    /// Sense inventory TSV (term, sense id, gloss)
    #[arg(long, global = true, value_name = "FILE")]
    pub senses: Option<PathBuf>,
    /// Hypernym edges TSV (sense id, hypernym sense id, surface)
    #[arg(long, global = true, value_name = "FILE")]
    pub hypernyms: Option<PathBuf>,
    /// Directory of topic word lists, one file per topic
    #[arg(long, global = true, value_name = "DIR")]
    pub wordlists: Option<PathBuf>,
    /// Essential terms TSV (question id, terms)
    #[arg(long, global = true, value_name = "FILE")]
    pub essential: Option<PathBuf>,
    /// Model file (written by `train`, read by `predict`)
    #[arg(long, global = true, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Predictions JSONL
    #[arg(
        long = "pred",
        alias = "predictions",
        global = true,
        value_name = "FILE"
    )]
    pub pred: Option<PathBuf>,
    /// External candidate scores JSONL (for `--solver external`)
    #[arg(long, global = true, value_name = "FILE")]
    pub scores: Option<PathBuf>,
    /// Reference corpus for the overlap solver, one sentence per line
    #[arg(long, global = true, value_name = "FILE")]
    pub reference: Option<PathBuf>,
    /// Write the primary output here instead of stdout (atomically)
    #[arg(long, short = 'o', global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Feature preset: unigram, ubph, ubph+wordnet, ubph+dependencies, ubph+essential, ubph+topics
    #[arg(long, global = true, value_name = "PRESET")]
    pub features: Option<String>,
    /// Taxonomy level (default: deepest available)
    #[arg(long, global = true)]
    pub level: Option<usize>,
    /// Seed for every stochastic step
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Treat unknown ids, missing labels or predictions and taxonomy mismatches as errors
    #[arg(long, global = true)]
    pub strict: bool,
    /// Worker threads (0 = all cores); results do not depend on it
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct TrainFlags {
    /// SGD epochs per binary model
    #[arg(long)]
    pub epochs: Option<usize>,
    /// SGD learning rate
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// L2 regularization strength
    #[arg(long)]
    pub l2: Option<f64>,
    /// Coarser-level predictions fed to the next level
    #[arg(long)]
    pub top_k_hier: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Dev,
    Test,
    All,
}

impl SplitArg {
    fn split(self) -> Option<Split> {
        match self {
            SplitArg::Train => Some(Split::Train),
            SplitArg::Dev => Some(Split::Dev),
            SplitArg::Test => Some(Split::Test),
            SplitArg::All => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Source {
    None,
    Gold,
    Predicted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    /// Idf-weighted lexical overlap
    Overlap,
    /// Uniform random scores
    Random,
    /// Scores from `--scores`
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Tsv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExpandFormat {
    Text,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportKind {
    /// QA accuracy per gold category
    Category,
    /// Classes of top-1 classification errors
    Errors,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    /// 462-node six-level taxonomy, a labelled inventory and two annotators
    Reference,
    /// Keyed three-level classification corpus with parses
    Classification,
    /// QA corpus whose label names appear in the right answers
    Qa,
}

#[derive(Debug, Args)]
pub struct QaFlags {
    /// Which labels expand the question
    #[arg(long = "labels", value_enum, default_value = "none")]
    pub source: Source,
    #[arg(long, value_enum, default_value = "overlap")]
    pub solver: SolverArg,
    /// Questions to evaluate
    #[arg(long, value_enum, default_value = "all")]
    pub split: SplitArg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a taxonomy (and gold labels) and print level cardinalities
    TaxonomyValidate,
    /// Question, split and label statistics
    Stats,
    /// Train a hierarchical classifier and write it to --model
    Train {
        #[arg(long, value_enum, default_value = "train")]
        split: SplitArg,
        #[command(flatten)]
        train: TrainFlags,
    },
    /// Rank labels with a trained model, or out-of-fold with --cv
    Predict {
        /// Default: test, or train with --cv
        #[arg(long, value_enum)]
        split: Option<SplitArg>,
        /// Cross-validation folds; trains on the selected split itself
        #[arg(long)]
        cv: Option<usize>,
        #[command(flatten)]
        train: TrainFlags,
    },
    /// MAP and P@1 of --pred against --gold
    EvalQc {
        /// Restrict to questions of this split (needs --questions)
        #[arg(long, value_enum)]
        split: Option<SplitArg>,
        /// Predictions to test against (adds a bootstrap p-value)
        #[arg(long, value_name = "FILE")]
        baseline: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        resamples: usize,
    },
    /// QA precision@1, optionally with label-based query expansion
    EvalQa {
        #[command(flatten)]
        qa: QaFlags,
        /// Independent runs (vary only solver and perturbation seeds)
        #[arg(long, default_value_t = 1)]
        runs: usize,
        /// Label source to test against (adds a bootstrap p-value)
        #[arg(long, value_enum)]
        against: Option<Source>,
        #[arg(long, default_value_t = 10_000)]
        resamples: usize,
    },
    /// Print questions expanded with their labels' definitions
    Expand {
        #[arg(long = "labels", value_enum, default_value = "gold")]
        source: Source,
        /// Only this question
        #[arg(long)]
        id: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: ExpandFormat,
    },
    /// Relabel a share of gold labels at random
    Perturb {
        #[arg(long)]
        proportion: f64,
    },
    /// QA precision@1 under increasing label noise, as TSV
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        proportions: Vec<f64>,
        #[arg(long, default_value_t = 20)]
        runs: usize,
        #[arg(long, value_enum, default_value = "overlap")]
        solver: SolverArg,
        #[arg(long, value_enum, default_value = "all")]
        split: SplitArg,
    },
    /// Cohen's kappa per taxonomy level between two annotators
    Agreement {
        /// Annotator ids to compare (default: the first two)
        #[arg(long, value_delimiter = ',')]
        annotators: Vec<String>,
        #[arg(long, value_enum, default_value = "tsv")]
        format: Format,
    },
    /// Automated error analyses
    Report {
        #[arg(value_enum)]
        kind: ReportKind,
        #[arg(long, value_enum, default_value = "tsv")]
        format: Format,
        /// Label source for QA expansion (category report)
        #[arg(long = "labels", value_enum, default_value = "gold")]
        source: Source,
        #[arg(long, value_enum, default_value = "overlap")]
        solver: SolverArg,
        #[arg(long, value_enum, default_value = "all")]
        split: SplitArg,
        /// Groups smaller than this are flagged
        #[arg(long, default_value_t = DEFAULT_MIN_GROUP)]
        min_group: usize,
    },
    /// Write a synthetic dataset into a directory
    Synth {
        #[arg(value_enum)]
        kind: SynthKind,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        /// Number of questions (default depends on the kind)
        #[arg(long)]
        count: Option<usize>,
    },
}

/// Parses `args` and runs; returns the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp
            | ErrorKind::DisplayVersion
            | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                print!("{e}");
                return 0;
            }
            _ => {
                let text = e.to_string();
                let first = text.lines().next().unwrap_or("invalid arguments");
                let err = usage(first.trim_start_matches("error: "));
                eprintln!("{}", err.to_line());
                return err.exit_code();
            }
        },
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_line());
            e.exit_code()
        }
    }
}

fn flags(g: &Global) -> RunConfig {
    RunConfig {
        taxonomy: g.taxonomy.clone(),
        questions: g.questions.clone(),
        gold: g.gold.clone(),
        annotations: g.annotations.clone(),
        parses: g.parses.clone(),
        senses: g.senses.clone(),
        hypernyms: g.hypernyms.clone(),
        wordlists: g.wordlists.clone(),
        essential: g.essential.clone(),
        model: g.model.clone(),
        predictions: g.pred.clone(),
        scores: g.scores.clone(),
        reference: g.reference.clone(),
        output: g.output.clone(),
        features: g.features.clone().map(FeatureSpec::Preset),
        train: None,
        level: g.level,
        seed: g.seed,
        strict: g.strict.then_some(true),
        threads: g.threads,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.global.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    let cfg = file.overlay(flags(&cli.global));
    let ctx = Ctx {
        exec: Pool::new(cfg.threads.unwrap_or(0))?,
        cfg,
    };
    match cli.command {
        Command::TaxonomyValidate => ctx.taxonomy_validate(),
        Command::Stats => ctx.stats(),
        Command::Train { split, train } => ctx.train(split, &train),
        Command::Predict { split, cv, train } => ctx.predict(split, cv, &train),
        Command::EvalQc {
            split,
            baseline,
            resamples,
        } => ctx.eval_qc(split, baseline, resamples),
        Command::EvalQa {
            qa,
            runs,
            against,
            resamples,
        } => ctx.eval_qa(&qa, runs, against, resamples),
        Command::Expand { source, id, format } => ctx.expand(source, id, format),
        Command::Perturb { proportion } => ctx.perturb(proportion),
        Command::Sweep {
            proportions,
            runs,
            solver,
            split,
        } => ctx.sweep(&proportions, runs, solver, split),
        Command::Agreement { annotators, format } => ctx.agreement(&annotators, format),
        Command::Report {
            kind,
            format,
            source,
            solver,
            split,
            min_group,
        } => ctx.report(kind, format, source, solver, split, min_group),
        Command::Synth {
            kind,
            out_dir,
            count,
        } => ctx.synth(kind, &out_dir, count),
    }
}

struct Ctx {
    cfg: RunConfig,
    exec: Pool,
}

/// A single question whose gold label is `MAT_COS_BOILING`.
pub fn expansion_example() -> Question {
    let choices = [
        ("A", "They move faster and spread apart."),
        ("B", "They break into hydrogen and oxygen."),
        ("C", "They move slower and pack together."),
        ("D", "They stop moving."),
    ];
    Question {
        id: "boiling".into(),
        text: "What happens to water molecules during the boiling process?".into(),
        candidates: choices
            .iter()
            .map(|(k, t)| qclab_core::AnswerCandidate {
                key: (*k).into(),
                text: (*t).into(),
            })
            .collect(),
        answer_key: "A".into(),
        grade: Some(5),
        split: Some(Split::Dev),
    }
}

fn announce_seed(seed: u64) {
    eprintln!("seed={seed}");
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("plain data serializes");
    s.push('\n');
    s
}

impl Ctx {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.cfg.output {
            Some(path) => formats::write_atomic(path, text.as_bytes()),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())
                    .and_then(|_| out.flush())
                    .map_err(|e| Error::io(&PathBuf::from("<stdout>"), e))
            }
        }
    }

    fn level_or_max(&self, taxonomy: &Taxonomy) -> Result<usize> {
        let level = self.cfg.level.unwrap_or(taxonomy.max_depth());
        taxonomy.check_level(level)?;
        Ok(level)
    }

    fn train_config(&self, flags: &TrainFlags) -> Result<TrainConfig> {
        let mut c = self.cfg.train_config()?;
        if let Some(v) = flags.epochs {
            c.epochs = v;
        }
        if let Some(v) = flags.learning_rate {
            c.learning_rate = v;
        }
        if let Some(v) = flags.l2 {
            c.l2_lambda = v;
        }
        if let Some(v) = flags.top_k_hier {
            c.top_k_hier = v;
        }
        c.validate()?;
        Ok(c)
    }

    fn taxonomy_validate(&self) -> Result<()> {
        let taxonomy = formats::read_taxonomy(self.cfg.require(&self.cfg.taxonomy, "taxonomy")?)?;
        let levels: Vec<usize> = (1..=taxonomy.max_depth())
            .map(|k| taxonomy.labels_at_level(k).map(|s| s.len()))
            .collect::<qclab_core::Result<_>>()?;
        let observed = match &self.cfg.gold {
            Some(path) => {
                let gold = formats::read_labels(path, &taxonomy, None, self.cfg.strict())?;
                let inventory: Vec<&LabelPath> = gold.values().flatten().collect();
                let counts: Vec<usize> = (1..=taxonomy.max_depth())
                    .map(|k| labels_at_level(inventory.iter().copied(), k).map(|s| s.len()))
                    .collect::<qclab_core::Result<_>>()?;
                Some(counts)
            }
            None => None,
        };
        #[derive(Serialize)]
        struct Out {
            nodes: usize,
            max_depth: usize,
            leaves: usize,
            level_labels: Vec<usize>,
            #[serde(skip_serializing_if = "Option::is_none")]
            observed_level_labels: Option<Vec<usize>>,
            fingerprint: String,
        }
        self.emit(&json_line(&Out {
            nodes: taxonomy.len(),
            max_depth: taxonomy.max_depth(),
            leaves: taxonomy.leaf_paths().len(),
            level_labels: levels,
            observed_level_labels: observed,
            fingerprint: format!("{:016x}", taxonomy.fingerprint()),
        }))
    }

    fn stats(&self) -> Result<()> {
        let corpus = Corpus::load(&self.cfg, false)?;
        let stats = corpus_stats(&corpus.questions);
        let splits = split_counts(&corpus.questions).ok();
        #[derive(Serialize)]
        struct Labels {
            labelled: usize,
            two_labels: usize,
            observed_level_labels: Vec<usize>,
        }
        let labels = match &corpus.gold {
            Some(gold) => {
                let inventory: Vec<&LabelPath> = gold.values().flatten().collect();
                let depth = inventory.iter().map(|l| l.len()).max().unwrap_or(0);
                Some(Labels {
                    labelled: gold.len(),
                    two_labels: gold.values().filter(|l| l.len() == 2).count(),
                    observed_level_labels: (1..=depth)
                        .map(|k| labels_at_level(inventory.iter().copied(), k).map(|s| s.len()))
                        .collect::<qclab_core::Result<_>>()?,
                })
            }
            None => None,
        };
        #[derive(Serialize)]
        struct Out {
            questions: usize,
            mean_words: f64,
            mean_sentences: f64,
            #[serde(skip_serializing_if = "Option::is_none")]
            splits: Option<qclab_core::corpus::SplitCounts>,
            #[serde(skip_serializing_if = "Option::is_none")]
            labels: Option<Labels>,
        }
        self.emit(&json_line(&Out {
            questions: stats.questions,
            mean_words: stats.mean_words,
            mean_sentences: stats.mean_sentences,
            splits,
            labels,
        }))
    }

    fn train(&self, split: SplitArg, flags: &TrainFlags) -> Result<()> {
        let model_path = self.cfg.require(&self.cfg.model, "model")?;
        let corpus = Corpus::load(&self.cfg, true)?;
        let fc = self.cfg.feature_config()?;
        let tc = self.train_config(flags)?;
        announce_seed(tc.seed);
        let level = self.level_or_max(&corpus.taxonomy)?;
        let resources = pipeline::load_resources(&self.cfg, &fc)?;
        let questions = pipeline::select(&corpus.questions, split.split());
        let owned: Vec<Question> = questions.iter().map(|q| (*q).clone()).collect();
        let features = pipeline::features(&owned, &fc, &resources, &self.exec)?;
        let model = pipeline::train(
            &questions,
            &features,
            corpus.gold(),
            &corpus.taxonomy,
            level,
            &fc,
            &tc,
            &self.exec,
        )?;
        log::info!(
            "trained levels 1..={level} on {} questions with {} threads",
            questions.len(),
            self.exec.threads()
        );
        model::save(model_path, &model)
    }

    fn predict(
        &self,
        split: Option<SplitArg>,
        cv: Option<usize>,
        flags: &TrainFlags,
    ) -> Result<()> {
        let corpus = Corpus::load(&self.cfg, cv.is_some())?;
        let split = split.unwrap_or(if cv.is_some() {
            SplitArg::Train
        } else {
            SplitArg::Test
        });
        let questions = pipeline::select(&corpus.questions, split.split());
        let owned: Vec<Question> = questions.iter().map(|q| (*q).clone()).collect();
        let predictions = match cv {
            Some(folds) => {
                let fc = self.cfg.feature_config()?;
                let tc = self.train_config(flags)?;
                announce_seed(tc.seed);
                let level = self.level_or_max(&corpus.taxonomy)?;
                let resources = pipeline::load_resources(&self.cfg, &fc)?;
                let features = pipeline::features(&owned, &fc, &resources, &self.exec)?;
                pipeline::cross_val_predict(
                    &questions,
                    &features,
                    corpus.gold(),
                    &corpus.taxonomy,
                    level,
                    folds,
                    &fc,
                    &tc,
                    &self.exec,
                )?
            }
            None => {
                let path = self.cfg.require(&self.cfg.model, "model")?;
                let model = model::load(path)?;
                model::check_taxonomy(path, &model, &corpus.taxonomy, self.cfg.strict())?;
                let level = self.cfg.level.unwrap_or(model.max_level());
                if level < 1 || level > model.max_level() {
                    return Err(usage(format!(
                        "--level {level} outside the model's 1..={}",
                        model.max_level()
                    )));
                }
                let resources = pipeline::load_resources(&self.cfg, &model.feature_config)?;
                let features =
                    pipeline::features(&owned, &model.feature_config, &resources, &self.exec)?;
                pipeline::predict(&model, &questions, &features, level, &self.exec)?
            }
        };
        self.emit(&formats::predictions_jsonl(&predictions))
    }

    fn eval_qc(
        &self,
        split: Option<SplitArg>,
        baseline: Option<PathBuf>,
        resamples: usize,
    ) -> Result<()> {
        let taxonomy = formats::read_taxonomy(self.cfg.require(&self.cfg.taxonomy, "taxonomy")?)?;
        let gold_path = self.cfg.require(&self.cfg.gold, "gold")?;
        let pred_path = self.cfg.require(&self.cfg.predictions, "pred")?;
        let mut gold = formats::read_labels(gold_path, &taxonomy, None, self.cfg.strict())?;
        if let Some(split) = split {
            let questions =
                formats::read_questions(self.cfg.require(&self.cfg.questions, "questions")?)?;
            let keep = pipeline::ids(
                &pipeline::select(&questions, split.split())
                    .into_iter()
                    .cloned()
                    .collect::<Vec<_>>(),
            );
            gold.retain(|id, _| keep.contains(id));
        }
        let predictions = formats::read_predictions(pred_path, &taxonomy)?;
        let level = self.qc_level(&predictions, &taxonomy)?;
        let missing = gold
            .keys()
            .filter(|id| !predictions.contains_key(*id))
            .count();
        if missing > 0 && !self.cfg.strict() {
            log::warn!("{missing} gold questions have no prediction and score 0");
        }
        let strict = self.cfg.strict();
        let mut map = map_score(&predictions, &gold, level, strict)?;
        let mut p1 = p_at_1(&predictions, &gold, level, strict)?;
        if let Some(path) = baseline {
            let base = formats::read_predictions(&path, &taxonomy)?;
            let seed = self.cfg.seed();
            announce_seed(seed);
            for (ours, theirs) in [
                (&mut map, map_score(&base, &gold, level, strict)?),
                (&mut p1, p_at_1(&base, &gold, level, strict)?),
            ] {
                let sig = bootstrap_significance_with(
                    &self.exec,
                    &theirs.values(),
                    &ours.values(),
                    resamples,
                    seed,
                )?;
                ours.p_value = Some(sig.p_value);
            }
        }
        self.emit(&formats::reports_json(&[map, p1]))
    }

    fn qc_level(
        &self,
        predictions: &BTreeMap<String, qclab_core::RankedPrediction>,
        taxonomy: &Taxonomy,
    ) -> Result<usize> {
        let levels: std::collections::BTreeSet<usize> =
            predictions.values().map(|p| p.level).collect();
        if levels.len() > 1 {
            return Err(usage("predictions file mixes levels"));
        }
        let pred_level = levels.into_iter().next();
        let level = match (self.cfg.level, pred_level) {
            (Some(l), Some(p)) if l != p => {
                return Err(usage(format!(
                    "--level {l} but predictions are at level {p}"
                )))
            }
            (Some(l), _) => l,
            (None, Some(p)) => p,
            (None, None) => taxonomy.max_depth(),
        };
        taxonomy.check_level(level)?;
        Ok(level)
    }

    fn solver(&self, kind: SolverArg, questions: &[Question]) -> Result<Box<dyn QaSolver>> {
        Ok(match kind {
            SolverArg::Overlap => {
                let solver = OverlapSolver::from_questions(questions);
                Box::new(match &self.cfg.reference {
                    Some(path) => solver.with_reference(formats::read_sentences(path)?),
                    None => solver,
                })
            }
            SolverArg::Random => {
                announce_seed(self.cfg.seed());
                Box::new(RandomSolver {
                    seed: self.cfg.seed(),
                })
            }
            SolverArg::External => {
                let path = self.cfg.require(&self.cfg.scores, "scores")?;
                Box::new(formats::parse_candidate_scores(
                    path,
                    &formats::read_text(path)?,
                )?)
            }
        })
    }

    fn label_source(&self, source: Source, corpus: &Corpus) -> Result<LabelSource> {
        Ok(match source {
            Source::None => LabelSource::None,
            Source::Gold => LabelSource::Gold(
                corpus
                    .gold
                    .clone()
                    .ok_or_else(|| usage("--labels gold needs --gold"))?,
            ),
            Source::Predicted => {
                let path = self.cfg.require(&self.cfg.predictions, "pred")?;
                let preds = formats::read_predictions(path, &corpus.taxonomy)?;
                LabelSource::Predicted(
                    preds
                        .into_iter()
                        .filter_map(|(id, p)| p.top().cloned().map(|l| (id, l)))
                        .collect(),
                )
            }
        })
    }

    fn qa_questions(&self, corpus: &Corpus, split: SplitArg) -> Vec<Question> {
        pipeline::select(&corpus.questions, split.split())
            .into_iter()
            .cloned()
            .collect()
    }

    fn qa_run(
        &self,
        questions: &[Question],
        solver: &dyn QaSolver,
        source: &LabelSource,
        taxonomy: &Taxonomy,
        run: u64,
    ) -> Result<EvalReport> {
        let labels = match source {
            LabelSource::None => None,
            LabelSource::Gold(g) => Some(qclab_core::qa::first_labels(g)),
            LabelSource::Predicted(p) => Some(p.clone()),
            LabelSource::Perturbed { .. } => unreachable!("not offered on the command line"),
        };
        Ok(evaluate_run(
            questions,
            solver,
            labels.as_ref(),
            Some(taxonomy),
            self.cfg.level,
            self.cfg.strict(),
            run,
            &self.exec,
        )?)
    }

    fn eval_qa(
        &self,
        qa: &QaFlags,
        runs: usize,
        against: Option<Source>,
        resamples: usize,
    ) -> Result<()> {
        if runs < 1 {
            return Err(usage("--runs must be at least 1"));
        }
        let needs_gold = qa.source == Source::Gold || against == Some(Source::Gold);
        let corpus = Corpus::load(&self.cfg, needs_gold)?;
        let questions = self.qa_questions(&corpus, qa.split);
        let solver = self.solver(qa.solver, &corpus.questions)?;
        let source = self.label_source(qa.source, &corpus)?;
        let mut reports = Vec::with_capacity(runs + 1);
        for run in 0..runs as u64 {
            reports.push(self.qa_run(
                &questions,
                solver.as_ref(),
                &source,
                &corpus.taxonomy,
                run,
            )?);
        }
        let values: Vec<(String, f64)> = reports[0]
            .per_question
            .iter()
            .enumerate()
            .map(|(i, (id, _))| {
                let mean = reports.iter().map(|r| r.per_question[i].1).sum::<f64>() / runs as f64;
                (id.clone(), mean)
            })
            .collect();
        let mut summary = EvalReport::from_values("P@1", self.cfg.level.unwrap_or(0), values);
        if let Some(other) = against {
            let seed = self.cfg.seed();
            announce_seed(seed);
            let other = self.label_source(other, &corpus)?;
            let base = self.qa_run(&questions, solver.as_ref(), &other, &corpus.taxonomy, 0)?;
            let sig = bootstrap_significance_with(
                &self.exec,
                &base.values(),
                &summary.values(),
                resamples,
                seed,
            )?;
            summary.p_value = Some(sig.p_value);
        }
        let mut out = Vec::new();
        if runs > 1 {
            for r in &mut reports {
                r.metric = "P@1 run".into();
            }
            out.extend(reports);
        }
        out.push(summary);
        self.emit(&formats::reports_json(&out))
    }

    fn expand(&self, source: Source, id: Option<String>, format: ExpandFormat) -> Result<()> {
        let corpus = Corpus::load(&self.cfg, source == Source::Gold)?;
        let labels = match self.label_source(source, &corpus)? {
            LabelSource::None => None,
            LabelSource::Gold(g) => Some(qclab_core::qa::first_labels(&g)),
            LabelSource::Predicted(p) => Some(p),
            LabelSource::Perturbed { .. } => unreachable!("not offered on the command line"),
        };
        let questions: Vec<&Question> = match &id {
            Some(id) => {
                let q = corpus
                    .questions
                    .iter()
                    .find(|q| &q.id == id)
                    .ok_or_else(|| Error::Core(qclab_core::Error::UnknownQuestion(id.clone())))?;
                vec![q]
            }
            None => corpus.questions.iter().collect(),
        };
        let mut out = String::new();
        for q in questions {
            let label = match &labels {
                None => None,
                Some(map) => match map.get(&q.id) {
                    Some(l) => Some(match self.cfg.level {
                        Some(k) => l.truncate(k)?,
                        None => l.clone(),
                    }),
                    None if self.cfg.strict() => {
                        return Err(qclab_core::Error::MissingLabel(q.id.clone()).into())
                    }
                    None => None,
                },
            };
            let e = match &label {
                Some(l) => expand_query(q, Some(l), &corpus.taxonomy)?,
                None => ExpandedQuestion::unexpanded(q),
            };
            match format {
                ExpandFormat::Text => {
                    out.push_str(&e.expanded);
                    out.push('\n');
                }
                ExpandFormat::Jsonl => out.push_str(&json_line(&e)),
            }
        }
        self.emit(&out)
    }

    fn perturb(&self, proportion: f64) -> Result<()> {
        let corpus = Corpus::load(&self.cfg, true)?;
        let level = self.level_or_max(&corpus.taxonomy)?;
        let seed = self.cfg.seed();
        announce_seed(seed);
        let noisy = perturb_labels(corpus.gold(), proportion, &corpus.taxonomy, level, seed)?;
        self.emit(&formats::labels_tsv(&noisy))
    }

    fn sweep(
        &self,
        proportions: &[f64],
        runs: usize,
        solver: SolverArg,
        split: SplitArg,
    ) -> Result<()> {
        let corpus = Corpus::load(&self.cfg, true)?;
        let level = self.level_or_max(&corpus.taxonomy)?;
        let questions = self.qa_questions(&corpus, split);
        let keep = pipeline::ids(&questions);
        let gold: LabelMap = corpus
            .gold()
            .iter()
            .filter(|(id, _)| keep.contains(*id))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        let solver = self.solver(solver, &corpus.questions)?;
        let seed = self.cfg.seed();
        announce_seed(seed);
        let rows = noise_sweep(
            &questions,
            &gold,
            solver.as_ref(),
            &corpus.taxonomy,
            level,
            proportions,
            runs,
            seed,
            &self.exec,
        )?;
        self.emit(&formats::sweep_tsv(&rows))
    }

    fn agreement(&self, annotators: &[String], format: Format) -> Result<()> {
        let taxonomy = formats::read_taxonomy(self.cfg.require(&self.cfg.taxonomy, "taxonomy")?)?;
        let path = self.cfg.require(&self.cfg.annotations, "annotations")?;
        let all = formats::parse_annotations(path, &formats::read_text(path)?, &taxonomy)?;
        let pick: Vec<&String> = if annotators.is_empty() {
            all.keys().take(2).collect()
        } else {
            annotators.iter().collect()
        };
        if pick.len() != 2 {
            return Err(usage("agreement compares exactly two annotators"));
        }
        let get = |a: &String| {
            all.get(a)
                .ok_or_else(|| Error::data(path, format!("no annotations by `{a}`")))
        };
        let rows = agreement_report(get(pick[0])?, get(pick[1])?, &taxonomy)?;
        let out = match format {
            Format::Tsv => {
                let mut s = String::from("level\tkappa\n");
                for (level, k) in &rows {
                    let _ = writeln!(s, "{level}\t{k:.6}");
                }
                s
            }
            Format::Json => {
                #[derive(Serialize)]
                struct Row {
                    level: usize,
                    kappa: f64,
                }
                let rows: Vec<Row> = rows
                    .into_iter()
                    .map(|(level, kappa)| Row { level, kappa })
                    .collect();
                json_line(&rows)
            }
        };
        self.emit(&out)
    }

    #[allow(clippy::too_many_arguments)]
    fn report(
        &self,
        kind: ReportKind,
        format: Format,
        source: Source,
        solver: SolverArg,
        split: SplitArg,
        min_group: usize,
    ) -> Result<()> {
        let corpus = Corpus::load(&self.cfg, true)?;
        let questions = self.qa_questions(&corpus, split);
        let text = match kind {
            ReportKind::Category => {
                let level = self.level_or_max(&corpus.taxonomy)?;
                let solver = self.solver(solver, &corpus.questions)?;
                let source = self.label_source(source, &corpus)?;
                let run = self.qa_run(&questions, solver.as_ref(), &source, &corpus.taxonomy, 0)?;
                let correct: BTreeMap<String, bool> = run
                    .per_question
                    .iter()
                    .map(|(id, v)| (id.clone(), *v > 0.5))
                    .collect();
                let report = per_category_report(&correct, corpus.gold(), level, min_group)?;
                let name = |l: &LabelPath| -> String {
                    l.codes()
                        .iter()
                        .map(|c| {
                            corpus
                                .taxonomy
                                .node(c)
                                .map_or(c.as_str(), |n| n.name.as_str())
                        })
                        .collect::<Vec<_>>()
                        .join(" - ")
                };
                match format {
                    Format::Tsv => {
                        let mut s = String::from("label\tname\taccuracy\tn\tbelow_floor\n");
                        for r in &report.rows {
                            let _ = writeln!(
                                s,
                                "{}\t{}\t{:.4}\t{}\t{}",
                                r.label.leaf(),
                                name(&r.label),
                                r.accuracy,
                                r.n,
                                r.below_floor
                            );
                        }
                        let _ = writeln!(
                            s,
                            "overall\t\t{:.4}\t{}\tfalse",
                            report.overall, report.questions
                        );
                        s
                    }
                    Format::Json => {
                        #[derive(Serialize)]
                        struct Row {
                            label: String,
                            name: String,
                            accuracy: f64,
                            n: usize,
                            below_floor: bool,
                        }
                        #[derive(Serialize)]
                        struct Out {
                            level: usize,
                            overall: f64,
                            questions: usize,
                            rows: Vec<Row>,
                        }
                        json_line(&Out {
                            level: report.level,
                            overall: report.overall,
                            questions: report.questions,
                            rows: report
                                .rows
                                .iter()
                                .map(|r| Row {
                                    label: r.label.leaf().to_string(),
                                    name: name(&r.label),
                                    accuracy: r.accuracy,
                                    n: r.n,
                                    below_floor: r.below_floor,
                                })
                                .collect(),
                        })
                    }
                }
            }
            ReportKind::Errors => {
                let path = self.cfg.require(&self.cfg.predictions, "pred")?;
                let preds = formats::read_predictions(path, &corpus.taxonomy)?;
                let keep = pipeline::ids(&questions);
                let gold: LabelMap = corpus
                    .gold()
                    .iter()
                    .filter(|(id, _)| keep.contains(*id))
                    .map(|(id, ls)| {
                        let level = preds
                            .get(id)
                            .map_or(corpus.taxonomy.max_depth(), |p| p.level);
                        let truncated = ls
                            .iter()
                            .map(|l| l.truncate(level))
                            .collect::<qclab_core::Result<Vec<_>>>()?;
                        Ok((id.clone(), truncated))
                    })
                    .collect::<Result<_>>()?;
                let b = qc_error_breakdown(&preds, &gold, &corpus.taxonomy, &questions)?;
                match format {
                    Format::Tsv => format!(
                        "class\tcount\ndistance1_leaf\t{}\ncorrelated_with_incorrect_candidate\t{}\ncorrect_in_gold_multiset\t{}\nother\t{}\ntotal\t{}\n",
                        b.distance1_leaf,
                        b.correlated_with_incorrect_candidate,
                        b.correct_in_gold_multiset,
                        b.other,
                        b.total
                    ),
                    Format::Json => json_line(&b),
                }
            }
        };
        self.emit(&text)
    }

    fn synth(&self, kind: SynthKind, dir: &std::path::Path, count: Option<usize>) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write =
            |name: &str, text: String| formats::write_atomic(&dir.join(name), text.as_bytes());
        match kind {
            SynthKind::Reference => {
                let seed = self.cfg.seed.unwrap_or(2019);
                announce_seed(seed);
                let rows = synth::reference_taxonomy();
                let corpus = synth::inventory_corpus(&rows, count.unwrap_or(7787), 0.16, seed)?;
                let taxonomy = Taxonomy::from_rows(rows.clone())?;
                let second = synth::leaf_disagreement(&taxonomy, &corpus.labels, 2, 0.4, seed ^ 1)?;
                let mut annotations = BTreeMap::new();
                annotations.insert("annotator1".to_string(), corpus.labels.clone());
                annotations.insert("annotator2".to_string(), second);
                write("taxonomy.tsv", formats::taxonomy_tsv(&rows))?;
                write(
                    "questions.jsonl",
                    formats::questions_jsonl(&corpus.questions),
                )?;
                write("labels.tsv", formats::labels_tsv(&corpus.labels))?;
                write("annotations.tsv", formats::annotations_tsv(&annotations))?;
                let example = expansion_example();
                let mut example_labels = LabelMap::new();
                example_labels.insert(example.id.clone(), vec![taxonomy.path("MAT_COS_BOILING")?]);
                write(
                    "expansion_example.jsonl",
                    formats::questions_jsonl(&[example]),
                )?;
                write(
                    "expansion_example.tsv",
                    formats::labels_tsv(&example_labels),
                )?;
            }
            SynthKind::Classification => {
                let mut spec = synth::ClassificationSpec::default();
                if let Some(n) = count {
                    spec.questions = n;
                }
                if let Some(s) = self.cfg.seed {
                    spec.seed = s;
                }
                announce_seed(spec.seed);
                let corpus = synth::classification_corpus(&spec)?;
                write("taxonomy.tsv", formats::taxonomy_tsv(&corpus.taxonomy))?;
                write(
                    "questions.jsonl",
                    formats::questions_jsonl(&corpus.questions),
                )?;
                write("labels.tsv", formats::labels_tsv(&corpus.labels))?;
                write(
                    "parses.conll",
                    formats::conll(&synth::annotate(&corpus.questions)),
                )?;
            }
            SynthKind::Qa => {
                let mut spec = synth::QaSpec::default();
                if let Some(n) = count {
                    spec.questions = n;
                }
                if let Some(s) = self.cfg.seed {
                    spec.seed = s;
                }
                announce_seed(spec.seed);
                let corpus = synth::qa_corpus(&spec)?;
                write("taxonomy.tsv", formats::taxonomy_tsv(&corpus.taxonomy))?;
                write(
                    "questions.jsonl",
                    formats::questions_jsonl(&corpus.questions),
                )?;
                write("labels.tsv", formats::labels_tsv(&corpus.labels))?;
            }
        }
        Ok(())
    }
}
