//! Sparse feature extraction.
//!
//! Every extractor writes into its own namespace (`uni:`, `bi:`, `dep:`,
//! `hyp:`, `topic:`, `ess:`, `hier:`), so extractors compose by plain union.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::classifier::RankedPrediction;
use crate::corpus::Question;
use crate::error::{Error, Result};
use crate::text::{is_stopword, tokenize};

/// Feature name to weight. Zero weights are never stored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(BTreeMap<String, f64>);

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn set(&mut self, name: impl Into<String>, weight: f64) {
        let name = name.into();
        if weight == 0.0 {
            self.0.remove(&name);
        } else {
            self.0.insert(name, weight);
        }
    }

    /// Keeps the larger of the existing and new weight.
    pub fn set_max(&mut self, name: impl Into<String>, weight: f64) {
        let name = name.into();
        match self.0.get(&name) {
            Some(&w) if w >= weight => {}
            _ => self.set(name, weight),
        }
    }

    pub fn add(&mut self, name: impl Into<String>, delta: f64) {
        let name = name.into();
        let w = self.0.get(&name).copied().unwrap_or(0.0) + delta;
        self.set(name, w);
    }

    /// Union; on a shared name the larger weight wins.
    pub fn merge(&mut self, other: FeatureVector) {
        for (k, v) in other.0 {
            self.set_max(k, v);
        }
    }

    pub fn retain_prefix(&mut self, keep: impl Fn(&str) -> bool) {
        self.0.retain(|k, _| keep(k));
    }
}

impl FromIterator<(String, f64)> for FeatureVector {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        let mut v = FeatureVector::new();
        for (k, w) in iter {
            v.set(k, w);
        }
        v
    }
}

fn default_hypernym_depth() -> usize {
    3
}

fn default_decay() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub use_unigrams: bool,
    pub use_bigrams: bool,
    pub use_pos_tagged: bool,
    pub use_dependencies: bool,
    pub use_hypernyms: bool,
    pub use_topics: bool,
    pub use_essential: bool,
    pub use_hierarchy: bool,
    #[serde(default = "default_hypernym_depth")]
    pub hypernym_max_depth: usize,
    #[serde(default = "default_decay")]
    pub hypernym_decay: f64,
    pub include_answer_text: bool,
    /// Without an essential-terms file, use stopword-filtered content words.
    pub essential_fallback: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self::ubph()
    }
}

impl FeatureConfig {
    fn none() -> Self {
        FeatureConfig {
            use_unigrams: false,
            use_bigrams: false,
            use_pos_tagged: false,
            use_dependencies: false,
            use_hypernyms: false,
            use_topics: false,
            use_essential: false,
            use_hierarchy: false,
            hypernym_max_depth: default_hypernym_depth(),
            hypernym_decay: default_decay(),
            include_answer_text: false,
            essential_fallback: false,
        }
    }

    pub fn unigram() -> Self {
        FeatureConfig {
            use_unigrams: true,
            ..Self::none()
        }
    }

    /// Unigrams, bigrams, POS-tagged n-grams and coarser-level predictions.
    pub fn ubph() -> Self {
        FeatureConfig {
            use_unigrams: true,
            use_bigrams: true,
            use_pos_tagged: true,
            use_hierarchy: true,
            ..Self::none()
        }
    }

    /// Named model compositions.
    pub fn preset(name: &str) -> Option<Self> {
        let c = match name {
            "unigram" => Self::unigram(),
            "ubph" => Self::ubph(),
            "ubph+wordnet" => FeatureConfig {
                use_hypernyms: true,
                ..Self::ubph()
            },
            "ubph+dependencies" => FeatureConfig {
                use_dependencies: true,
                ..Self::ubph()
            },
            "ubph+essential" => FeatureConfig {
                use_essential: true,
                ..Self::ubph()
            },
            "ubph+topics" => FeatureConfig {
                use_topics: true,
                ..Self::ubph()
            },
            _ => return None,
        };
        Some(c)
    }

    pub fn validate(&self) -> Result<()> {
        let any = self.use_unigrams
            || self.use_bigrams
            || self.use_pos_tagged
            || self.use_dependencies
            || self.use_hypernyms
            || self.use_topics
            || self.use_essential
            || self.use_hierarchy;
        if !any {
            return Err(Error::NoExtractor);
        }
        if !(self.hypernym_decay > 0.0 && self.hypernym_decay <= 1.0) {
            return Err(Error::InvalidConfig("hypernym_decay must be in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenAnnotation {
    /// 1-based position in the sentence.
    pub index: usize,
    pub token: String,
    pub pos: String,
    /// Governor index, 0 for the root.
    pub head: usize,
}

pub type Sentence = Vec<TokenAnnotation>;

/// Checks positions, head ranges and the single-root rule.
pub fn validate_sentence(sentence: &[TokenAnnotation]) -> Result<()> {
    let len = sentence.len();
    let mut roots = 0;
    for (i, t) in sentence.iter().enumerate() {
        if t.index != i + 1 {
            return Err(Error::InvalidConfig("token indices must run 1..n"));
        }
        if t.head > len {
            return Err(Error::HeadOutOfRange {
                index: t.index,
                head: t.head,
                len,
            });
        }
        if t.head == 0 {
            roots += 1;
        }
    }
    if len > 0 && roots != 1 {
        return Err(Error::InvalidConfig("sentence must have exactly one root"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sense {
    pub id: String,
    pub gloss: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypernymEdge {
    pub parent: String,
    pub surface: String,
}

/// Word senses with glosses, plus one hypernym link per sense.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SenseInventory {
    senses: BTreeMap<String, Vec<Sense>>,
    hypernyms: BTreeMap<String, HypernymEdge>,
}

impl SenseInventory {
    /// `senses` keeps listing order per term. Edges are `(sense, parent, surface)`;
    /// a sense listed twice keeps its first edge.
    pub fn new(senses: Vec<(String, Sense)>, edges: Vec<(String, String, String)>) -> Result<Self> {
        let mut inv = SenseInventory::default();
        for (term, sense) in senses {
            inv.senses
                .entry(term.to_lowercase())
                .or_default()
                .push(sense);
        }
        for (sense, parent, surface) in edges {
            inv.hypernyms.entry(sense).or_insert(HypernymEdge {
                parent,
                surface: surface.to_lowercase(),
            });
        }
        for start in inv.hypernyms.keys() {
            let mut seen = BTreeSet::new();
            let mut cur = start.as_str();
            while let Some(edge) = inv.hypernyms.get(cur) {
                if !seen.insert(cur) {
                    return Err(Error::Cycle(start.clone()));
                }
                cur = &edge.parent;
            }
        }
        Ok(inv)
    }

    pub fn senses(&self, term: &str) -> &[Sense] {
        self.senses.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Hypernym surfaces at distance 1, 2, ... from `sense`.
    pub fn hypernym_chain(&self, sense: &str, max_depth: usize) -> Vec<&str> {
        let mut out = Vec::new();
        let mut cur = sense;
        while out.len() < max_depth {
            match self.hypernyms.get(cur) {
                Some(edge) => {
                    out.push(edge.surface.as_str());
                    cur = &edge.parent;
                }
                None => break,
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TopicWordlists(BTreeMap<String, BTreeSet<String>>);

impl TopicWordlists {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert<I, S>(&mut self, topic: impl Into<String>, terms: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set = self.0.entry(topic.into()).or_default();
        set.extend(terms.into_iter().map(|t| t.as_ref().trim().to_lowercase()));
        set.remove("");
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// External resources an extractor stack may need.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Resources {
    /// Question id to parsed sentences.
    pub annotations: Option<BTreeMap<String, Vec<Sentence>>>,
    pub senses: Option<SenseInventory>,
    pub topics: Option<TopicWordlists>,
    /// Question id to essential keywords.
    pub essential: Option<BTreeMap<String, Vec<String>>>,
}

/// `uni:w` and `bi:w1_w2`, plus `uni:w/T` and `bi:w1/T1_w2/T2` when tags are given.
pub fn ngram_features(tokens: &[String], pos_tags: Option<&[String]>) -> Result<FeatureVector> {
    if let Some(tags) = pos_tags {
        if tags.len() != tokens.len() {
            return Err(Error::LengthMismatch {
                left: tokens.len(),
                right: tags.len(),
            });
        }
    }
    let mut v = FeatureVector::new();
    for t in tokens {
        v.set(format!("uni:{t}"), 1.0);
    }
    for w in tokens.windows(2) {
        v.set(format!("bi:{}_{}", w[0], w[1]), 1.0);
    }
    if let Some(tags) = pos_tags {
        for (t, p) in tokens.iter().zip(tags) {
            v.set(format!("uni:{t}/{p}"), 1.0);
        }
        for i in 1..tokens.len() {
            v.set(
                format!(
                    "bi:{}/{}_{}/{}",
                    tokens[i - 1],
                    tags[i - 1],
                    tokens[i],
                    tags[i]
                ),
                1.0,
            );
        }
    }
    Ok(v)
}

/// One `dep:governor_dependent` feature per non-root token.
pub fn dependency_features(sentence: &[TokenAnnotation]) -> Result<FeatureVector> {
    let len = sentence.len();
    let mut v = FeatureVector::new();
    for t in sentence {
        if t.head > len {
            return Err(Error::HeadOutOfRange {
                index: t.index,
                head: t.head,
                len,
            });
        }
        if t.head > 0 {
            let gov = sentence[t.head - 1].token.to_lowercase();
            v.set(format!("dep:{}_{}", gov, t.token.to_lowercase()), 1.0);
        }
    }
    Ok(v)
}

/// Simplified Lesk: the sense whose gloss shares the most distinct
/// non-stopword tokens with the context. Ties go to the first-listed sense.
/// `None` when the word is not in the inventory.
pub fn lesk_sense<'a>(
    word: &str,
    context: &[String],
    inventory: &'a SenseInventory,
) -> Option<&'a str> {
    let senses = inventory.senses(word);
    let context: BTreeSet<&str> = context
        .iter()
        .map(String::as_str)
        .filter(|t| !is_stopword(t))
        .collect();
    let mut best: Option<(&str, usize)> = None;
    for sense in senses {
        let gloss: BTreeSet<String> = tokenize(&sense.gloss)
            .into_iter()
            .filter(|t| !is_stopword(t))
            .collect();
        let overlap = gloss
            .iter()
            .filter(|t| context.contains(t.as_str()))
            .count();
        if best.is_none_or(|(_, b)| overlap > b) {
            best = Some((&sense.id, overlap));
        }
    }
    best.map(|(id, _)| id)
}

/// Hypernyms of the dependency root and its direct dependents, weighted
/// `decay^distance` up to `max_depth`; repeated surfaces keep the max.
pub fn hypernym_features(
    sentences: &[Sentence],
    context: &[String],
    inventory: &SenseInventory,
    max_depth: usize,
    decay: f64,
) -> FeatureVector {
    let mut v = FeatureVector::new();
    for sentence in sentences {
        let Some(root) = sentence.iter().find(|t| t.head == 0) else {
            continue;
        };
        let words = sentence
            .iter()
            .filter(|t| t.head == 0 || t.head == root.index)
            .map(|t| t.token.to_lowercase());
        for word in words {
            let Some(sense) = lesk_sense(&word, context, inventory) else {
                continue;
            };
            for (d, surface) in inventory
                .hypernym_chain(sense, max_depth)
                .iter()
                .enumerate()
            {
                v.set_max(format!("hyp:{surface}"), libm::pow(decay, (d + 1) as f64));
            }
        }
    }
    v
}

/// `topic:NAME` = number of tokens found in that wordlist.
pub fn topic_features(tokens: &[String], wordlists: &TopicWordlists) -> FeatureVector {
    let mut v = FeatureVector::new();
    for (topic, terms) in &wordlists.0 {
        let count = tokens.iter().filter(|t| terms.contains(t.as_str())).count();
        if count > 0 {
            v.set(format!("topic:{topic}"), count as f64);
        }
    }
    v
}

/// `ess:w` for every keyword that also occurs in the tokens.
pub fn essential_features(tokens: &[String], keywords: &[String]) -> FeatureVector {
    let present: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
    let mut v = FeatureVector::new();
    for k in keywords {
        let k = k.trim().to_lowercase();
        if present.contains(k.as_str()) {
            v.set(format!("ess:{k}"), 1.0);
        }
    }
    v
}

/// `hier:CODE` for each of the top `top_k` coarser-level labels.
pub fn hierarchy_features(prev: &RankedPrediction, top_k: usize) -> FeatureVector {
    prev.ranked
        .iter()
        .take(top_k)
        .map(|(label, _)| (format!("hier:{}", label.leaf()), 1.0))
        .collect()
}

/// Features of `question` under `config`, without the hierarchy block.
///
/// Per-question gaps in a resource (no parse for this id) make that
/// extractor a no-op; a resource missing altogether is an error, except
/// for essential terms, which then fall back or stay silent.
pub fn base_features(
    question: &Question,
    config: &FeatureConfig,
    resources: &Resources,
) -> Result<FeatureVector> {
    config.validate()?;
    let needs_parse = config.use_pos_tagged || config.use_dependencies || config.use_hypernyms;
    if needs_parse && resources.annotations.is_none() {
        return Err(Error::MissingResource("annotations"));
    }
    if config.use_hypernyms && resources.senses.is_none() {
        return Err(Error::MissingResource("senses"));
    }
    if config.use_topics && resources.topics.is_none() {
        return Err(Error::MissingResource("topics"));
    }

    let question_tokens = tokenize(&question.text);
    let mut segments = Vec::with_capacity(1 + question.candidates.len());
    segments.push(question_tokens.clone());
    if config.include_answer_text {
        segments.extend(question.candidates.iter().map(|c| tokenize(&c.text)));
    }
    let all_tokens: Vec<String> = segments.iter().flatten().cloned().collect();

    let mut v = FeatureVector::new();
    if config.use_unigrams || config.use_bigrams {
        for seg in &segments {
            let mut g = ngram_features(seg, None)?;
            g.retain_prefix(|k| {
                (config.use_unigrams && k.starts_with("uni:"))
                    || (config.use_bigrams && k.starts_with("bi:"))
            });
            v.merge(g);
        }
    }

    let sentences = resources
        .annotations
        .as_ref()
        .and_then(|a| a.get(&question.id))
        .map(Vec::as_slice)
        .unwrap_or(&[]);
    if config.use_pos_tagged {
        for s in sentences {
            let (tokens, tags): (Vec<String>, Vec<String>) = s
                .iter()
                .filter(|t| t.token.chars().any(char::is_alphanumeric))
                .map(|t| (t.token.to_lowercase(), t.pos.clone()))
                .unzip();
            let mut g = ngram_features(&tokens, Some(&tags))?;
            g.retain_prefix(|k| k.contains('/') && (k.starts_with("uni:") || config.use_bigrams));
            v.merge(g);
        }
    }
    if config.use_dependencies {
        for s in sentences {
            v.merge(dependency_features(s)?);
        }
    }
    if config.use_hypernyms {
        let inventory = resources.senses.as_ref().expect("checked above");
        v.merge(hypernym_features(
            sentences,
            &question_tokens,
            inventory,
            config.hypernym_max_depth,
            config.hypernym_decay,
        ));
    }
    if config.use_topics {
        let lists = resources.topics.as_ref().expect("checked above");
        v.merge(topic_features(&all_tokens, lists));
    }
    if config.use_essential {
        match &resources.essential {
            Some(map) => {
                if let Some(keywords) = map.get(&question.id) {
                    v.merge(essential_features(&all_tokens, keywords));
                }
            }
            None if config.essential_fallback => {
                let content: Vec<String> = question_tokens
                    .iter()
                    .filter(|t| !is_stopword(t))
                    .cloned()
                    .collect();
                v.merge(essential_features(&all_tokens, &content));
            }
            None => {}
        }
    }
    Ok(v)
}

/// Full feature vector: base extractors plus, when enabled and available,
/// hierarchy features from the coarser level's ranking.
pub fn assemble(
    question: &Question,
    config: &FeatureConfig,
    resources: &Resources,
    prev_level: Option<&RankedPrediction>,
    top_k: usize,
) -> Result<FeatureVector> {
    let mut v = base_features(question, config, resources)?;
    if config.use_hierarchy {
        if let Some(prev) = prev_level {
            v.merge(hierarchy_features(prev, top_k));
        }
    }
    Ok(v)
}

/// Lowercased essential-term list from a comma-separated field.
pub fn parse_keywords(field: &str) -> Vec<String> {
    field
        .split(',')
        .map(|k| k.trim().to_lowercase())
        .filter(|k| !k.is_empty())
        .collect()
}

#[cfg(test)]
pub(crate) fn tok(words: &[&str]) -> Vec<String> {
    words.iter().map(|w| String::from(*w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AnswerCandidate;
    use crate::taxonomy::LabelPath;
    use alloc::string::ToString;
    use alloc::vec;

    fn names(v: &FeatureVector) -> Vec<&str> {
        v.names().collect()
    }

    fn ann(index: usize, token: &str, pos: &str, head: usize) -> TokenAnnotation {
        TokenAnnotation {
            index,
            token: token.into(),
            pos: pos.into(),
            head,
        }
    }

    #[test]
    fn ngram_examples() {
        let v = ngram_features(&tok(&["ice", "melts"]), None).unwrap();
        assert_eq!(names(&v), vec!["bi:ice_melts", "uni:ice", "uni:melts"]);
        assert!(v.iter().all(|(_, w)| w == 1.0));

        let v = ngram_features(&tok(&["ice"]), None).unwrap();
        assert_eq!(names(&v), vec!["uni:ice"]);

        let tags = tok(&["NN", "VBZ"]);
        let v = ngram_features(&tok(&["ice", "melts"]), Some(&tags)).unwrap();
        for n in ["uni:ice/NN", "uni:melts/VBZ", "bi:ice/NN_melts/VBZ"] {
            assert!(v.contains(n), "{n}");
        }
        assert_eq!(v.len(), 6);

        assert!(ngram_features(&tok(&["a", "b"]), Some(&tok(&["X"]))).is_err());
    }

    #[test]
    fn dependency_examples() {
        let s = vec![ann(1, "ice", "NN", 2), ann(2, "melts", "VBZ", 0)];
        assert_eq!(
            names(&dependency_features(&s).unwrap()),
            vec!["dep:melts_ice"]
        );

        let s = vec![ann(1, "ice", "NN", 0)];
        assert!(dependency_features(&s).unwrap().is_empty());

        let s = vec![
            ann(1, "a", "X", 2),
            ann(2, "b", "X", 3),
            ann(3, "c", "X", 0),
        ];
        assert_eq!(
            names(&dependency_features(&s).unwrap()),
            vec!["dep:b_a", "dep:c_b"]
        );

        let bad = vec![ann(1, "a", "X", 5)];
        assert!(matches!(
            dependency_features(&bad),
            Err(Error::HeadOutOfRange { .. })
        ));
    }

    #[test]
    fn sentence_validation() {
        assert!(validate_sentence(&[ann(1, "a", "X", 0), ann(2, "b", "X", 1)]).is_ok());
        assert!(validate_sentence(&[ann(1, "a", "X", 0), ann(2, "b", "X", 0)]).is_err());
        assert!(validate_sentence(&[ann(1, "a", "X", 3)]).is_err());
    }

    fn inventory() -> SenseInventory {
        SenseInventory::new(
            vec![
                (
                    "water".into(),
                    Sense {
                        id: "water.n.01".into(),
                        gloss: "binary compound liquid".into(),
                    },
                ),
                (
                    "plant".into(),
                    Sense {
                        id: "plant.n.01".into(),
                        gloss: "industrial building factory".into(),
                    },
                ),
                (
                    "plant".into(),
                    Sense {
                        id: "plant.n.02".into(),
                        gloss: "living organism with leaves and roots".into(),
                    },
                ),
                (
                    "bank".into(),
                    Sense {
                        id: "bank.n.01".into(),
                        gloss: "sloping land".into(),
                    },
                ),
                (
                    "bank".into(),
                    Sense {
                        id: "bank.n.02".into(),
                        gloss: "financial institution".into(),
                    },
                ),
            ],
            vec![
                ("water.n.01".into(), "liquid.n.01".into(), "liquid".into()),
                ("liquid.n.01".into(), "fluid.n.01".into(), "fluid".into()),
                ("fluid.n.01".into(), "matter.n.01".into(), "matter".into()),
                ("matter.n.01".into(), "entity.n.01".into(), "entity".into()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn lesk_examples() {
        let inv = inventory();
        assert_eq!(
            lesk_sense("water", &tok(&["anything"]), &inv),
            Some("water.n.01")
        );
        // Brute force: second gloss shares {leaves, roots}, first shares nothing.
        let ctx = tok(&["the", "plant", "grows", "leaves", "and", "roots"]);
        assert_eq!(lesk_sense("plant", &ctx, &inv), Some("plant.n.02"));
        assert_eq!(
            lesk_sense("bank", &tok(&["river"]), &inv),
            Some("bank.n.01")
        );
        assert_eq!(lesk_sense("unknown", &ctx, &inv), None);
    }

    #[test]
    fn hypernym_weights_decay() {
        let inv = inventory();
        let s = vec![vec![ann(1, "water", "NN", 2), ann(2, "boils", "VBZ", 0)]];
        let v = hypernym_features(&s, &tok(&["water", "boils"]), &inv, 3, 0.5);
        assert_eq!(v.get("hyp:liquid"), Some(0.5));
        assert_eq!(v.get("hyp:fluid"), Some(0.25));
        assert_eq!(v.get("hyp:matter"), Some(0.125));
        assert_eq!(v.get("hyp:entity"), None);

        let s = vec![vec![ann(1, "zzz", "NN", 0)]];
        assert!(hypernym_features(&s, &[], &inv, 3, 0.5).is_empty());
    }

    #[test]
    fn hypernym_cycle_rejected() {
        let r = SenseInventory::new(
            vec![],
            vec![
                ("a".into(), "b".into(), "b".into()),
                ("b".into(), "a".into(), "a".into()),
            ],
        );
        assert!(matches!(r, Err(Error::Cycle(_))));
    }

    #[test]
    fn topic_examples() {
        let mut lists = TopicWordlists::new();
        lists.insert("ANIMALS", ["turtle", "giraffe", "duck"]);
        lists.insert("BIRDS", ["duck"]);
        let v = topic_features(&tok(&["turtle", "giraffe"]), &lists);
        assert_eq!(v.get("topic:ANIMALS"), Some(2.0));
        assert_eq!(v.len(), 1);
        assert!(topic_features(&tok(&["rock"]), &lists).is_empty());
        let v = topic_features(&tok(&["duck"]), &lists);
        assert_eq!(v.get("topic:ANIMALS"), Some(1.0));
        assert_eq!(v.get("topic:BIRDS"), Some(1.0));
    }

    #[test]
    fn essential_examples() {
        let t = tok(&["the", "boiling", "water"]);
        assert_eq!(
            names(&essential_features(&t, &tok(&["boiling"]))),
            vec!["ess:boiling"]
        );
        assert!(essential_features(&t, &tok(&["freezing"])).is_empty());
        assert_eq!(essential_features(&t, &tok(&["boiling", "water"])).len(), 2);
    }

    #[test]
    fn hierarchy_examples() {
        let p = RankedPrediction {
            question_id: "q".into(),
            level: 1,
            ranked: vec![
                (LabelPath::new(["MAT"]), 0.9),
                (LabelPath::new(["ENG"]), 0.5),
                (LabelPath::new(["LIF"]), 0.1),
            ],
        };
        assert_eq!(names(&hierarchy_features(&p, 1)), vec!["hier:MAT"]);
        assert_eq!(
            names(&hierarchy_features(&p, 2)),
            vec!["hier:ENG", "hier:MAT"]
        );
    }

    fn question(text: &str) -> Question {
        Question {
            id: "q1".into(),
            text: text.into(),
            candidates: vec![
                AnswerCandidate {
                    key: "A".into(),
                    text: "they speed up".into(),
                },
                AnswerCandidate {
                    key: "B".into(),
                    text: "they slow down".into(),
                },
            ],
            answer_key: "A".into(),
            grade: None,
            split: None,
        }
    }

    #[test]
    fn assemble_compositions() {
        let q = question("What happens to water molecules during boiling?");
        let res = Resources::default();
        let uni = assemble(&q, &FeatureConfig::unigram(), &res, None, 1).unwrap();
        let direct = ngram_features(&tokenize(&q.text), None).unwrap();
        let mut only_uni = direct.clone();
        only_uni.retain_prefix(|k| k.starts_with("uni:"));
        assert_eq!(uni, only_uni);

        let with_answers = FeatureConfig {
            include_answer_text: true,
            ..FeatureConfig::unigram()
        };
        let v = assemble(&q, &with_answers, &res, None, 1).unwrap();
        assert!(v.contains("uni:speed") && v.contains("uni:slow"));
        assert!(!uni.contains("uni:speed"));

        let empty = question("");
        let all = FeatureConfig {
            use_unigrams: true,
            use_bigrams: true,
            use_topics: true,
            use_essential: true,
            use_hierarchy: true,
            ..FeatureConfig::unigram()
        };
        let res = Resources {
            topics: Some(TopicWordlists::new()),
            ..Resources::default()
        };
        assert!(assemble(&empty, &all, &res, None, 1).unwrap().is_empty());
    }

    #[test]
    fn missing_resources_rejected() {
        let q = question("water boils");
        let res = Resources::default();
        let deps = FeatureConfig {
            use_dependencies: true,
            ..FeatureConfig::unigram()
        };
        assert_eq!(
            assemble(&q, &deps, &res, None, 1).unwrap_err(),
            Error::MissingResource("annotations")
        );
        let topics = FeatureConfig {
            use_topics: true,
            ..FeatureConfig::unigram()
        };
        assert!(assemble(&q, &topics, &res, None, 1).is_err());
        let ess = FeatureConfig {
            use_essential: true,
            ..FeatureConfig::unigram()
        };
        assert!(assemble(&q, &ess, &res, None, 1).is_ok());
        let fallback = FeatureConfig {
            essential_fallback: true,
            ..ess
        };
        let v = assemble(&q, &fallback, &res, None, 1).unwrap();
        assert!(v.contains("ess:water") && v.contains("ess:boils"));
        let nothing = FeatureConfig {
            use_unigrams: false,
            ..FeatureConfig::unigram()
        };
        assert_eq!(
            assemble(&q, &nothing, &res, None, 1).unwrap_err(),
            Error::NoExtractor
        );
    }

    #[test]
    fn pos_and_dependencies_from_annotations() {
        let q = question("Ice melts.");
        let mut ann_map = BTreeMap::new();
        ann_map.insert(
            "q1".to_string(),
            vec![vec![
                ann(1, "Ice", "NN", 2),
                ann(2, "melts", "VBZ", 0),
                ann(3, ".", ".", 2),
            ]],
        );
        let res = Resources {
            annotations: Some(ann_map),
            ..Resources::default()
        };
        let cfg = FeatureConfig {
            use_dependencies: true,
            use_hierarchy: false,
            ..FeatureConfig::ubph()
        };
        let v = assemble(&q, &cfg, &res, None, 1).unwrap();
        for n in [
            "uni:ice",
            "bi:ice_melts",
            "uni:ice/NN",
            "bi:ice/NN_melts/VBZ",
            "dep:melts_ice",
            "dep:melts_.",
        ] {
            assert!(v.contains(n), "{n}");
        }
        // A question with no parse degrades to plain n-grams.
        let mut other = q.clone();
        other.id = "q2".into();
        let v = assemble(&other, &cfg, &res, None, 1).unwrap();
        assert!(v.contains("uni:ice") && !v.contains("uni:ice/NN"));
    }
}
