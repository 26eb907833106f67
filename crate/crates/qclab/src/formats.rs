//! Readers and writers for every on-disk format.
//!
//! Parsers take the file contents plus the path they came from so errors
//! can point at `path:line`. Line numbers are 1-based.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use qclab_core::corpus::{resolve_codes, LabelMap};
use qclab_core::features::{
    parse_keywords, validate_sentence, Sense, Sentence, TokenAnnotation, TopicWordlists,
};
use qclab_core::metrics::EvalReport;
use qclab_core::qa::{CandidateScores, ExternalScores, SweepRow};
use qclab_core::taxonomy::NodeRow;
use qclab_core::{AnswerCandidate, LabelPath, Question, RankedPrediction, Split, Taxonomy};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Writes through a temporary file in the same directory, then renames.
/// Missing parent directories are created.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut builder = tempfile::Builder::new();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        builder.permissions(fs::Permissions::from_mode(0o644));
    }
    let mut tmp = builder.tempfile_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Numbered lines that carry data: blank lines and `#` comments dropped.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn fields<'a>(path: &Path, line: usize, l: &'a str, want: usize) -> Result<Vec<&'a str>> {
    let f: Vec<&str> = l.split('\t').collect();
    if f.len() != want {
        return Err(Error::parse(
            path,
            line,
            format!("expected {want} tab-separated fields, found {}", f.len()),
        ));
    }
    Ok(f)
}

fn at_line(path: &Path, line: usize) -> impl Fn(qclab_core::Error) -> Error + '_ {
    move |e| Error::parse(path, line, e.to_string())
}

// ---------------------------------------------------------------- taxonomy

pub fn parse_taxonomy(path: &Path, text: &str) -> Result<Vec<NodeRow>> {
    let mut rows = Vec::new();
    for (line, l) in data_lines(text) {
        let f = fields(path, line, l, 4)?;
        if f[0].is_empty() {
            return Err(Error::parse(path, line, "empty code"));
        }
        let parent = match f[1] {
            "-" | "" => None,
            p => Some(p),
        };
        rows.push(NodeRow::new(f[0], parent, f[2], f[3]));
    }
    Ok(rows)
}

pub fn read_taxonomy(path: &Path) -> Result<Taxonomy> {
    let rows = parse_taxonomy(path, &read_text(path)?)?;
    Taxonomy::from_rows(rows).map_err(|e| Error::data(path, e.to_string()))
}

pub fn taxonomy_tsv(rows: &[NodeRow]) -> String {
    let mut out = String::from("# code\tparent\tname\tdefinition\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            r.code,
            r.parent_code.as_deref().unwrap_or("-"),
            r.name,
            r.definition
        );
    }
    out
}

// --------------------------------------------------------------- questions

#[derive(Debug, Serialize, Deserialize)]
struct ChoiceLine {
    label: String,
    text: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct QuestionLine {
    id: String,
    question: String,
    choices: Vec<ChoiceLine>,
    #[serde(rename = "answerKey")]
    answer_key: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grade: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    split: Option<Split>,
}

pub fn parse_questions(path: &Path, text: &str) -> Result<Vec<Question>> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (line, l) in data_lines(text) {
        let q: QuestionLine =
            serde_json::from_str(l).map_err(|e| Error::parse(path, line, e.to_string()))?;
        let q = Question {
            id: q.id,
            text: q.question,
            candidates: q
                .choices
                .into_iter()
                .map(|c| AnswerCandidate {
                    key: c.label,
                    text: c.text,
                })
                .collect(),
            answer_key: q.answer_key,
            grade: q.grade,
            split: q.split,
        };
        q.validate().map_err(at_line(path, line))?;
        if !seen.insert(q.id.clone()) {
            return Err(Error::parse(
                path,
                line,
                qclab_core::Error::DuplicateQuestion(q.id).to_string(),
            ));
        }
        out.push(q);
    }
    Ok(out)
}

pub fn read_questions(path: &Path) -> Result<Vec<Question>> {
    parse_questions(path, &read_text(path)?)
}

pub fn questions_jsonl(questions: &[Question]) -> String {
    let mut out = String::new();
    for q in questions {
        let line = QuestionLine {
            id: q.id.clone(),
            question: q.text.clone(),
            choices: q
                .candidates
                .iter()
                .map(|c| ChoiceLine {
                    label: c.key.clone(),
                    text: c.text.clone(),
                })
                .collect(),
            answer_key: q.answer_key.clone(),
            grade: q.grade,
            split: q.split,
        };
        out.push_str(&serde_json::to_string(&line).expect("serializable"));
        out.push('\n');
    }
    out
}

// ------------------------------------------------------------------ labels

/// Labels TSV. Ids absent from `known` are dropped with a warning, or are
/// an error when `strict`.
pub fn parse_labels(
    path: &Path,
    text: &str,
    taxonomy: &Taxonomy,
    known: Option<&BTreeSet<String>>,
    strict: bool,
) -> Result<LabelMap> {
    let mut out = LabelMap::new();
    for (line, l) in data_lines(text) {
        let f = fields(path, line, l, 2)?;
        let id = f[0];
        let codes: Vec<&str> = f[1].split(',').map(str::trim).collect();
        let labels = resolve_codes(id, &codes, taxonomy).map_err(at_line(path, line))?;
        if let Some(known) = known {
            if !known.contains(id) {
                let e = qclab_core::Error::UnknownQuestion(id.to_string());
                if strict {
                    return Err(Error::parse(path, line, e.to_string()));
                }
                log::warn!("{}:{line}: {e}; skipped", path.display());
                continue;
            }
        }
        if out.insert(id.to_string(), labels).is_some() {
            return Err(Error::parse(
                path,
                line,
                format!("question `{id}` listed twice"),
            ));
        }
    }
    Ok(out)
}

pub fn read_labels(
    path: &Path,
    taxonomy: &Taxonomy,
    known: Option<&BTreeSet<String>>,
    strict: bool,
) -> Result<LabelMap> {
    parse_labels(path, &read_text(path)?, taxonomy, known, strict)
}

fn codes(labels: &[LabelPath]) -> String {
    labels
        .iter()
        .map(LabelPath::leaf)
        .collect::<Vec<_>>()
        .join(",")
}

pub fn labels_tsv(labels: &LabelMap) -> String {
    let mut out = String::new();
    for (id, ls) in labels {
        let _ = writeln!(out, "{id}\t{}", codes(ls));
    }
    out
}

/// Annotations TSV, grouped by annotator id.
pub fn parse_annotations(
    path: &Path,
    text: &str,
    taxonomy: &Taxonomy,
) -> Result<BTreeMap<String, LabelMap>> {
    let mut out: BTreeMap<String, LabelMap> = BTreeMap::new();
    for (line, l) in data_lines(text) {
        let f = fields(path, line, l, 3)?;
        let codes: Vec<&str> = f[2].split(',').map(str::trim).collect();
        let labels = resolve_codes(f[0], &codes, taxonomy).map_err(at_line(path, line))?;
        let map = out.entry(f[1].to_string()).or_default();
        if map.insert(f[0].to_string(), labels).is_some() {
            return Err(Error::parse(
                path,
                line,
                format!("annotator `{}` labels `{}` twice", f[1], f[0]),
            ));
        }
    }
    Ok(out)
}

pub fn annotations_tsv(annotations: &BTreeMap<String, LabelMap>) -> String {
    let mut out = String::new();
    for (annotator, map) in annotations {
        for (id, ls) in map {
            let _ = writeln!(out, "{id}\t{annotator}\t{}", codes(ls));
        }
    }
    out
}

// ----------------------------------------------------------------- parses

/// CoNLL-like parses: `# qid=<id>` opens a question, blank lines separate
/// sentences, rows are `index \t token \t pos \t head`.
pub fn parse_conll(path: &Path, text: &str) -> Result<BTreeMap<String, Vec<Sentence>>> {
    let mut out: BTreeMap<String, Vec<Sentence>> = BTreeMap::new();
    let mut qid: Option<String> = None;
    let mut current: Sentence = Vec::new();
    let mut start = 0;

    let mut flush = |qid: &Option<String>, current: &mut Sentence, start: usize| -> Result<()> {
        if current.is_empty() {
            return Ok(());
        }
        validate_sentence(current).map_err(at_line(path, start))?;
        let id = qid.clone().expect("rows only accepted after a qid");
        out.entry(id).or_default().push(std::mem::take(current));
        Ok(())
    };

    for (i, l) in text.lines().enumerate() {
        let line = i + 1;
        let l = l.trim_end_matches('\r');
        if let Some(id) = l.strip_prefix("# qid=") {
            flush(&qid, &mut current, start)?;
            qid = Some(id.trim().to_string());
            continue;
        }
        if l.starts_with('#') {
            continue;
        }
        if l.trim().is_empty() {
            flush(&qid, &mut current, start)?;
            continue;
        }
        if qid.is_none() {
            return Err(Error::parse(
                path,
                line,
                "token row before any `# qid=` line",
            ));
        }
        let f = fields(path, line, l, 4)?;
        let num = |s: &str, what: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::parse(path, line, format!("{what} `{s}` is not a number")))
        };
        if current.is_empty() {
            start = line;
        }
        current.push(TokenAnnotation {
            index: num(f[0], "index")?,
            token: f[1].to_string(),
            pos: f[2].to_string(),
            head: num(f[3], "head")?,
        });
    }
    flush(&qid, &mut current, start)?;
    Ok(out)
}

pub fn conll(annotations: &BTreeMap<String, Vec<Sentence>>) -> String {
    let mut out = String::new();
    for (id, sentences) in annotations {
        let _ = writeln!(out, "# qid={id}");
        for s in sentences {
            for t in s {
                let _ = writeln!(out, "{}\t{}\t{}\t{}", t.index, t.token, t.pos, t.head);
            }
            out.push('\n');
        }
    }
    out
}

// -------------------------------------------------------- lexical resources

/// Sense inventory TSV: `term \t sense_id \t gloss`.
pub fn parse_senses(path: &Path, text: &str) -> Result<Vec<(String, Sense)>> {
    data_lines(text)
        .map(|(line, l)| {
            let f = fields(path, line, l, 3)?;
            Ok((
                f[0].to_string(),
                Sense {
                    id: f[1].to_string(),
                    gloss: f[2].to_string(),
                },
            ))
        })
        .collect()
}

/// Hypernym edges TSV: `sense_id \t hypernym_sense_id \t hypernym_surface`.
pub fn parse_hypernyms(path: &Path, text: &str) -> Result<Vec<(String, String, String)>> {
    data_lines(text)
        .map(|(line, l)| {
            let f = fields(path, line, l, 3)?;
            Ok((f[0].to_string(), f[1].to_string(), f[2].to_string()))
        })
        .collect()
}

/// One topic per regular file, named after the file stem.
pub fn read_wordlists(dir: &Path) -> Result<TopicWordlists> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    let mut lists = TopicWordlists::new();
    for path in files {
        let topic = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::data(&path, "file name is not UTF-8"))?
            .to_string();
        let text = read_text(&path)?;
        let terms: Vec<String> = data_lines(&text)
            .map(|(_, l)| l.trim().to_lowercase())
            .collect();
        lists.insert(topic, terms);
    }
    Ok(lists)
}

/// Essential terms TSV: `question_id \t term[,term...]`.
pub fn parse_essential(path: &Path, text: &str) -> Result<BTreeMap<String, Vec<String>>> {
    let mut out = BTreeMap::new();
    for (line, l) in data_lines(text) {
        let f = fields(path, line, l, 2)?;
        out.insert(f[0].to_string(), parse_keywords(f[1]));
    }
    Ok(out)
}

// ------------------------------------------------------------- predictions

#[derive(Debug, Serialize, Deserialize)]
struct RankedLine {
    label: String,
    score: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct PredictionLine {
    id: String,
    level: usize,
    ranked: Vec<RankedLine>,
}

/// Predictions JSONL, ours or produced by an external classifier. Labels
/// are level-`level` codes; rankings are re-sorted into canonical order.
pub fn parse_predictions(
    path: &Path,
    text: &str,
    taxonomy: &Taxonomy,
) -> Result<BTreeMap<String, RankedPrediction>> {
    let mut out = BTreeMap::new();
    for (line, l) in data_lines(text) {
        let p: PredictionLine =
            serde_json::from_str(l).map_err(|e| Error::parse(path, line, e.to_string()))?;
        let mut scored = Vec::with_capacity(p.ranked.len());
        let mut seen = BTreeSet::new();
        for r in p.ranked {
            let label = taxonomy.path(&r.label).map_err(at_line(path, line))?;
            if label.len() != p.level {
                return Err(Error::parse(
                    path,
                    line,
                    format!("label `{}` is not at level {}", r.label, p.level),
                ));
            }
            if !r.score.is_finite() {
                return Err(Error::parse(
                    path,
                    line,
                    format!("non-finite score for `{}`", r.label),
                ));
            }
            if !seen.insert(r.label.clone()) {
                return Err(Error::parse(
                    path,
                    line,
                    format!("label `{}` ranked twice", r.label),
                ));
            }
            scored.push((label, r.score));
        }
        let pred = RankedPrediction::from_scores(p.id.clone(), p.level, scored);
        if out.insert(p.id.clone(), pred).is_some() {
            return Err(Error::parse(
                path,
                line,
                format!("question `{}` listed twice", p.id),
            ));
        }
    }
    Ok(out)
}

pub fn read_predictions(
    path: &Path,
    taxonomy: &Taxonomy,
) -> Result<BTreeMap<String, RankedPrediction>> {
    parse_predictions(path, &read_text(path)?, taxonomy)
}

pub fn predictions_jsonl<'a, I>(predictions: I) -> String
where
    I: IntoIterator<Item = &'a RankedPrediction>,
{
    let mut out = String::new();
    for p in predictions {
        let line = PredictionLine {
            id: p.question_id.clone(),
            level: p.level,
            ranked: p
                .ranked
                .iter()
                .map(|(l, s)| RankedLine {
                    label: l.leaf().to_string(),
                    score: *s,
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&line).expect("finite scores serialize"));
        out.push('\n');
    }
    out
}

// ------------------------------------------------------- candidate scores

#[derive(Debug, Serialize, Deserialize)]
struct ScoresLine {
    id: String,
    scores: BTreeMap<String, f64>,
}

pub fn parse_candidate_scores(path: &Path, text: &str) -> Result<ExternalScores> {
    let mut out = BTreeMap::new();
    for (line, l) in data_lines(text) {
        let s: ScoresLine =
            serde_json::from_str(l).map_err(|e| Error::parse(path, line, e.to_string()))?;
        let scores = CandidateScores {
            question_id: s.id.clone(),
            scores: s.scores,
        };
        if out.insert(s.id.clone(), scores).is_some() {
            return Err(Error::parse(
                path,
                line,
                format!("question `{}` listed twice", s.id),
            ));
        }
    }
    Ok(ExternalScores(out))
}

pub fn candidate_scores_jsonl<'a, I>(scores: I) -> String
where
    I: IntoIterator<Item = &'a CandidateScores>,
{
    let mut out = String::new();
    for s in scores {
        let line = ScoresLine {
            id: s.question_id.clone(),
            scores: s.scores.clone(),
        };
        out.push_str(&serde_json::to_string(&line).expect("finite scores serialize"));
        out.push('\n');
    }
    out
}

// ------------------------------------------------------------ run outputs

/// A JSON array of report objects, one per line inside the brackets.
pub fn reports_json(reports: &[EvalReport]) -> String {
    let mut out = String::from("[\n");
    for (i, r) in reports.iter().enumerate() {
        out.push_str("  ");
        out.push_str(&serde_json::to_string(r).expect("report serializes"));
        out.push_str(if i + 1 < reports.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    out
}

pub const SWEEP_HEADER: &str = "proportion\tmean_p_at_1\tstddev\truns";

pub fn sweep_tsv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{}\t{:.6}\t{:.6}\t{}",
            r.proportion, r.mean_p_at_1, r.stddev, r.runs
        );
    }
    out
}

/// Reference corpus: one sentence per non-blank line.
pub fn read_sentences(path: &Path) -> Result<Vec<String>> {
    Ok(read_text(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}
