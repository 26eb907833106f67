//! Deterministic synthetic corpora.
//!
//! Stand-ins for licensed datasets: a taxonomy with the published level
//! structure, a keyed classification corpus and a QA corpus whose label
//! definitions carry answer-discriminating words.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{AnswerCandidate, LabelMap, Question, Split};
use crate::error::Result;
use crate::features::{Sentence, TokenAnnotation};
use crate::seed;
use crate::taxonomy::{LabelPath, NodeRow, Taxonomy};

const ONSETS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

/// Pronounceable nonce word, unique per index (three syllables plus a tail).
pub fn nonce_word(index: usize) -> String {
    let syllables = ONSETS.len() * VOWELS.len();
    let mut i = index;
    let mut s = String::new();
    for _ in 0..3 {
        let syl = i % syllables;
        i /= syllables;
        s.push(ONSETS[syl / VOWELS.len()] as char);
        s.push(VOWELS[syl % VOWELS.len()] as char);
    }
    s.push(match i % 3 {
        0 => 'x',
        1 => 'q',
        _ => 'j',
    });
    if i >= 3 {
        s.push_str(&format!("{}", i / 3));
    }
    s
}

const FILLER: &[&str] = &[
    "student",
    "observed",
    "class",
    "teacher",
    "table",
    "morning",
    "sample",
    "measured",
    "notebook",
    "group",
    "result",
    "picture",
    "window",
    "outside",
    "several",
    "example",
    "record",
    "small",
    "large",
    "model",
    "change",
    "today",
    "project",
    "describe",
    "best",
    "likely",
    "data",
    "question",
    "investigation",
    "school",
];

/// Nodes per depth and how many of them have children, chosen so that the
/// full-depth leaf inventory truncates to 9/88/243/335/379/406 distinct
/// labels at levels 1..6 with 462 nodes in total.
const LEVEL_NODES: [usize; 6] = [9, 88, 175, 107, 51, 32];
const LEVEL_INTERNAL: [usize; 6] = [9, 20, 15, 7, 5, 0];

/// A 462-node, six-level taxonomy with 406 leaves.
///
/// The first branch spells out `MAT > MAT_COS > {MAT_COS_BOILING,
/// MAT_COS_FREEZING}` so the query expansion example is available.
pub fn reference_taxonomy() -> Vec<NodeRow> {
    let mut levels: Vec<Vec<NodeRow>> = Vec::new();
    let mut word = 0usize;
    for (depth, &count) in LEVEL_NODES.iter().enumerate() {
        // The last `internal` nodes of each depth get children.
        let parents: Vec<String> = if depth == 0 {
            Vec::new()
        } else {
            let prev = &levels[depth - 1];
            let k = LEVEL_INTERNAL[depth - 1];
            prev[prev.len() - k..]
                .iter()
                .map(|n| n.code.clone())
                .collect()
        };
        let mut rows = Vec::with_capacity(count);
        for j in 0..count {
            let code = format!("L{}_{:03}", depth + 1, j);
            let parent = (depth > 0).then(|| parents[j % parents.len()].clone());
            let name = capitalize(&nonce_word(word));
            word += 1;
            rows.push(NodeRow {
                code,
                parent_code: parent,
                name,
                definition: String::new(),
            });
        }
        levels.push(rows);
    }
    let mut rename = BTreeMap::new();
    rename.insert(levels[0][0].code.clone(), ("MAT", "Matter"));
    let cos = levels[1]
        .iter()
        .rev()
        .take(LEVEL_INTERNAL[1])
        .rfind(|n| n.parent_code.as_deref() == Some(levels[0][0].code.as_str()))
        .expect("MAT has an internal child")
        .code
        .clone();
    rename.insert(cos.clone(), ("MAT_COS", "Changes of State"));
    let leaf_limit = LEVEL_NODES[2] - LEVEL_INTERNAL[2];
    let mut leaves = levels[2][..leaf_limit]
        .iter()
        .filter(|n| n.parent_code.as_deref() == Some(cos.as_str()));
    rename.insert(
        leaves.next().expect("leaf").code.clone(),
        ("MAT_COS_BOILING", "Boiling"),
    );
    rename.insert(
        leaves.next().expect("leaf").code.clone(),
        ("MAT_COS_FREEZING", "Freezing"),
    );

    let mut rows: Vec<NodeRow> = levels.into_iter().flatten().collect();
    for row in &mut rows {
        if let Some((code, name)) = rename.get(&row.code) {
            row.code = String::from(*code);
            row.name = String::from(*name);
        }
        if let Some(p) = &row.parent_code {
            if let Some((code, _)) = rename.get(p) {
                row.parent_code = Some(String::from(*code));
            }
        }
    }
    rows
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Complete tree with `branching[d]` children per depth-`d` node; codes `D{depth}_{index}`.
pub fn balanced_tree(branching: &[usize], word_offset: usize) -> Vec<NodeRow> {
    let mut rows = Vec::new();
    let mut frontier: Vec<Option<String>> = vec![None];
    let mut word = word_offset;
    for (depth, &b) in branching.iter().enumerate() {
        let mut next = Vec::new();
        let mut idx = 0;
        for parent in &frontier {
            for _ in 0..b {
                let code = format!("D{}_{:02}", depth + 1, idx);
                idx += 1;
                rows.push(NodeRow {
                    code: code.clone(),
                    parent_code: parent.clone(),
                    name: capitalize(&nonce_word(word)),
                    definition: String::new(),
                });
                word += 1;
                next.push(Some(code));
            }
        }
        frontier = next;
    }
    rows
}

/// A generated labelled corpus.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub taxonomy: Vec<NodeRow>,
    pub questions: Vec<Question>,
    pub labels: LabelMap,
}

#[derive(Debug, Clone)]
pub struct ClassificationSpec {
    pub questions: usize,
    /// Children per node, root level first.
    pub branching: Vec<usize>,
    /// Share of question tokens that are distractors.
    pub distractor_share: f64,
    /// Chance a label's distractors mimic a sibling leaf.
    pub confusable_share: f64,
    pub two_label_share: f64,
    /// Train / dev fractions; the rest is test.
    pub train: f64,
    pub dev: f64,
    pub seed: u64,
}

impl Default for ClassificationSpec {
    fn default() -> Self {
        ClassificationSpec {
            questions: 1000,
            branching: vec![4, 3, 3],
            distractor_share: 0.5,
            confusable_share: 0.5,
            two_label_share: 0.16,
            train: 0.6,
            dev: 0.2,
            seed: 2019,
        }
    }
}

fn assign_split(i: usize, n: usize, train: f64, dev: f64) -> Split {
    let f = i as f64 / n as f64;
    if f < train {
        Split::Train
    } else if f < train + dev {
        Split::Dev
    } else {
        Split::Test
    }
}

fn plain_candidates(rng: &mut ChaCha8Rng) -> (Vec<AnswerCandidate>, String) {
    let cands = ["A", "B", "C", "D"]
        .iter()
        .map(|k| AnswerCandidate {
            key: String::from(*k),
            text: String::from(FILLER[rng.gen_range(0..FILLER.len())]),
        })
        .collect();
    (cands, String::from("A"))
}

/// Each leaf is keyed to an ordered pair of unique nonce words that always
/// appear adjacently in its questions. Distractors make up
/// `distractor_share` of the tokens. Per label, with chance
/// `confusable_share`, they are a sibling leaf's key words in reverse
/// order (same unigrams, different bigram); otherwise generic filler.
pub fn classification_corpus(spec: &ClassificationSpec) -> Result<SynthCorpus> {
    let rows = balanced_tree(&spec.branching, 5000);
    let taxonomy = Taxonomy::from_rows(rows.clone())?;
    let leaves = taxonomy.leaf_paths();
    let keys: Vec<(String, String)> = (0..leaves.len())
        .map(|i| (nonce_word(2 * i), nonce_word(2 * i + 1)))
        .collect();
    let depth = spec.branching.len();
    let siblings: Vec<Vec<usize>> = leaves
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let parent = l.truncate(depth.saturating_sub(1).max(1)).ok();
            (0..leaves.len())
                .filter(|&j| {
                    j != i && leaves[j].truncate(depth.saturating_sub(1).max(1)).ok() == parent
                })
                .collect()
        })
        .collect();

    let mut rng = seed::rng(spec.seed);
    let mut questions = Vec::with_capacity(spec.questions);
    let mut labels = LabelMap::new();
    for i in 0..spec.questions {
        let mut chosen = vec![i % leaves.len()];
        if rng.gen_bool(spec.two_label_share) {
            let mut other = rng.gen_range(0..leaves.len());
            while other == chosen[0] {
                other = rng.gen_range(0..leaves.len());
            }
            chosen.push(other);
        }
        let mut chunks: Vec<Vec<String>> = chosen
            .iter()
            .map(|&l| vec![keys[l].0.clone(), keys[l].1.clone()])
            .collect();
        let per_label =
            libm::round(2.0 * spec.distractor_share / (1.0 - spec.distractor_share)) as usize;
        for &l in &chosen {
            let options: Vec<usize> = siblings[l]
                .iter()
                .copied()
                .filter(|s| !chosen.contains(s))
                .collect();
            let mut left = per_label;
            if left >= 2 && !options.is_empty() && rng.gen_bool(spec.confusable_share) {
                let s = options[rng.gen_range(0..options.len())];
                chunks.push(vec![keys[s].1.clone(), keys[s].0.clone()]);
                left -= 2;
            }
            for _ in 0..left {
                chunks.push(vec![String::from(FILLER[rng.gen_range(0..FILLER.len())])]);
            }
        }
        chunks.shuffle(&mut rng);
        let mut text: String = chunks.into_iter().flatten().collect::<Vec<_>>().join(" ");
        text.push('?');

        let id = format!("syn{i:05}");
        let (candidates, answer_key) = plain_candidates(&mut rng);
        questions.push(Question {
            id: id.clone(),
            text,
            candidates,
            answer_key,
            grade: Some(3 + (i % 7) as u32),
            split: Some(assign_split(i, spec.questions, spec.train, spec.dev)),
        });
        labels.insert(id, chosen.iter().map(|&l| leaves[l].clone()).collect());
    }
    Ok(SynthCorpus {
        taxonomy: rows,
        questions,
        labels,
    })
}

#[derive(Debug, Clone)]
pub struct QaSpec {
    pub questions: usize,
    pub branching: Vec<usize>,
    /// Chance the stem carries a cue word shared with the right answer.
    pub right_cue: f64,
    /// Chance the stem carries a cue word shared with a wrong answer.
    pub wrong_cue: f64,
    pub seed: u64,
}

impl Default for QaSpec {
    fn default() -> Self {
        QaSpec {
            questions: 600,
            branching: vec![4, 3, 3],
            right_cue: 0.35,
            wrong_cue: 0.3,
            seed: 7,
        }
    }
}

/// Four-choice questions whose right answer contains the gold leaf's name
/// and whose wrong answers contain names of other leaves, so expanding with
/// the gold label's definition chain points at the right answer.
pub fn qa_corpus(spec: &QaSpec) -> Result<SynthCorpus> {
    let rows = balanced_tree(&spec.branching, 9000);
    let taxonomy = Taxonomy::from_rows(rows.clone())?;
    let leaves = taxonomy.leaf_paths();
    let leaf_word =
        |l: &LabelPath| -> String { taxonomy.node(l.leaf()).expect("leaf").name.to_lowercase() };

    let mut rng = seed::rng(spec.seed);
    let mut questions = Vec::with_capacity(spec.questions);
    let mut labels = LabelMap::new();
    let mut cue = 0usize;
    for i in 0..spec.questions {
        let gold = i % leaves.len();
        let mut others: Vec<usize> = (0..leaves.len()).filter(|&l| l != gold).collect();
        others.shuffle(&mut rng);
        let answer_slot = rng.gen_range(0..4);
        let mut slots = Vec::with_capacity(4);
        let mut wrong = others.into_iter();
        for s in 0..4 {
            slots.push(if s == answer_slot {
                gold
            } else {
                wrong.next().expect("enough leaves")
            });
        }
        let cues: Vec<String> = (0..4).map(|k| nonce_word(60_000 + cue + k)).collect();
        cue += 4;
        let keys = ["A", "B", "C", "D"];
        let candidates: Vec<AnswerCandidate> = slots
            .iter()
            .enumerate()
            .map(|(s, &l)| AnswerCandidate {
                key: String::from(keys[s]),
                text: format!("{} {}", leaf_word(&leaves[l]), cues[s]),
            })
            .collect();

        let mut stem: Vec<String> = (0..4)
            .map(|_| String::from(FILLER[rng.gen_range(0..FILLER.len())]))
            .collect();
        let draw: f64 = rng.gen();
        if draw < spec.right_cue {
            stem.push(cues[answer_slot].clone());
        } else if draw < spec.right_cue + spec.wrong_cue {
            let mut s = rng.gen_range(0..4);
            while s == answer_slot {
                s = rng.gen_range(0..4);
            }
            stem.push(cues[s].clone());
        }
        stem.shuffle(&mut rng);
        let mut text = String::from("Which answer fits when the ");
        text.push_str(&stem.join(" "));
        text.push('?');

        let id = format!("qa{i:05}");
        questions.push(Question {
            id: id.clone(),
            text,
            candidates,
            answer_key: String::from(keys[answer_slot]),
            grade: None,
            split: Some(Split::Test),
        });
        labels.insert(id, vec![leaves[gold].clone()]);
    }
    Ok(SynthCorpus {
        taxonomy: rows,
        questions,
        labels,
    })
}

/// Questions covering every leaf of `rows` at least once; a
/// `two_label_share` of them get a second leaf.
pub fn inventory_corpus(
    rows: &[NodeRow],
    questions: usize,
    two_label_share: f64,
    seed: u64,
) -> Result<SynthCorpus> {
    let taxonomy = Taxonomy::from_rows(rows.to_vec())?;
    let leaves = taxonomy.leaf_paths();
    let mut rng = seed::rng(seed);
    let mut out = Vec::with_capacity(questions);
    let mut labels = LabelMap::new();
    for i in 0..questions.max(leaves.len()) {
        let first = i % leaves.len();
        let mut ls = vec![leaves[first].clone()];
        if rng.gen_bool(two_label_share) {
            let mut other = rng.gen_range(0..leaves.len());
            while other == first {
                other = rng.gen_range(0..leaves.len());
            }
            ls.push(leaves[other].clone());
        }
        let id = format!("inv{i:05}");
        let (candidates, answer_key) = plain_candidates(&mut rng);
        let words: Vec<&str> = (0..6)
            .map(|_| FILLER[rng.gen_range(0..FILLER.len())])
            .collect();
        out.push(Question {
            id: id.clone(),
            text: format!("Which {}?", words.join(" ")),
            candidates,
            answer_key,
            grade: None,
            split: Some(assign_split(i, questions.max(leaves.len()), 0.43, 0.11)),
        });
        labels.insert(id, ls);
    }
    Ok(SynthCorpus {
        taxonomy: rows.to_vec(),
        questions: out,
        labels,
    })
}

/// A second annotator that agrees on the path down to `keep_depth` and, for
/// a `disagree_share` of questions, picks a different leaf under the same
/// depth-`keep_depth` ancestor when one exists.
pub fn leaf_disagreement(
    taxonomy: &Taxonomy,
    labels: &LabelMap,
    keep_depth: usize,
    disagree_share: f64,
    seed: u64,
) -> Result<LabelMap> {
    let leaves = taxonomy.leaf_paths();
    let mut rng = seed::rng(seed);
    let mut out = LabelMap::new();
    for (id, ls) in labels {
        let mut mine = ls.clone();
        if rng.gen_bool(disagree_share) {
            let first = &ls[0];
            let anchor = first.truncate(keep_depth)?;
            let options: Vec<&LabelPath> = leaves
                .iter()
                .filter(|l| anchor.is_prefix_of(l) && *l != first && !ls.contains(l))
                .collect();
            if !options.is_empty() {
                mine[0] = options[rng.gen_range(0..options.len())].clone();
            }
        }
        out.insert(id.clone(), mine);
    }
    Ok(out)
}

/// Toy parses: one chain-shaped sentence per question, tagged from a
/// fixed word table (filler verbs VBD, function words by class, anything
/// else NN). Token `i` is governed by token `i + 1`; the last is the root.
pub fn annotate(questions: &[Question]) -> BTreeMap<String, Vec<Sentence>> {
    questions
        .iter()
        .map(|q| {
            let tokens = crate::text::tokenize(&q.text);
            let n = tokens.len();
            let sentence: Sentence = tokens
                .into_iter()
                .enumerate()
                .map(|(i, token)| TokenAnnotation {
                    index: i + 1,
                    pos: String::from(tag(&token)),
                    head: if i + 1 == n { 0 } else { i + 2 },
                    token,
                })
                .collect();
            (q.id.clone(), vec![sentence])
        })
        .collect()
}

fn tag(token: &str) -> &'static str {
    match token {
        "observed" | "measured" | "describe" | "change" => "VBD",
        "small" | "large" | "several" | "best" | "likely" => "JJ",
        "which" | "what" => "WDT",
        "the" | "a" | "an" => "DT",
        "when" => "WRB",
        "answer" | "fits" => "VBZ",
        _ => "NN",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    #[test]
    fn nonce_words_unique() {
        let words: BTreeSet<String> = (0..100_000).map(nonce_word).collect();
        assert_eq!(words.len(), 100_000);
        assert!(words.iter().all(|w| !crate::text::is_stopword(w)));
        assert!(words.iter().all(|w| !FILLER.contains(&w.as_str())));
    }

    #[test]
    fn reference_taxonomy_shape() {
        let t = Taxonomy::from_rows(reference_taxonomy()).unwrap();
        assert_eq!(t.len(), 462);
        assert_eq!(t.max_depth(), 6);
        assert_eq!(t.leaf_paths().len(), 406);
        let counts: Vec<usize> = (1..=6)
            .map(|k| t.labels_at_level(k).unwrap().len())
            .collect();
        assert_eq!(counts, vec![9, 88, 243, 335, 379, 406]);
        let boil = t.path("MAT_COS_BOILING").unwrap();
        assert_eq!(
            t.definition_chain(&boil).unwrap(),
            "Matter Changes of State Boiling"
        );
        assert!(t.children("MAT_COS_BOILING").is_empty());
    }

    #[test]
    fn classification_corpus_shape() {
        let c = classification_corpus(&ClassificationSpec::default()).unwrap();
        assert_eq!(c.questions.len(), 1000);
        let t = Taxonomy::from_rows(c.taxonomy.clone()).unwrap();
        let counts: Vec<usize> = (1..=3)
            .map(|k| t.labels_at_level(k).unwrap().len())
            .collect();
        assert_eq!(counts, vec![4, 12, 36]);
        let two = c.labels.values().filter(|l| l.len() == 2).count();
        assert!((100..=220).contains(&two), "{two}");
        for q in &c.questions {
            q.validate().unwrap();
        }
    }

    #[test]
    fn qa_corpus_is_valid() {
        let c = qa_corpus(&QaSpec::default()).unwrap();
        for q in &c.questions {
            q.validate().unwrap();
        }
        assert_eq!(c.labels.len(), 600);
    }
}
