//! Automated error analyses over evaluation outputs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::classifier::RankedPrediction;
use crate::corpus::{LabelMap, Question};
use crate::error::Result;
use crate::metrics::cohens_kappa;
use crate::taxonomy::{LabelPath, Taxonomy};
use crate::text::{content_terms, Idf};

pub const DEFAULT_MIN_GROUP: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub label: LabelPath,
    pub accuracy: f64,
    pub n: usize,
    /// Fewer than the report's minimum group size.
    pub below_floor: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryReport {
    pub level: usize,
    pub rows: Vec<CategoryRow>,
    /// Question-level mean, independent of grouping.
    pub overall: f64,
    pub questions: usize,
}

/// Groups per-question correctness by truncated gold label. A question
/// with two distinct truncated labels counts in both groups.
pub fn per_category_report(
    correct: &BTreeMap<String, bool>,
    gold: &LabelMap,
    level: usize,
    min_group: usize,
) -> Result<CategoryReport> {
    let mut groups: BTreeMap<LabelPath, (usize, usize)> = BTreeMap::new();
    let mut hits = 0usize;
    let mut total = 0usize;
    for (id, &ok) in correct {
        let Some(labels) = gold.get(id) else { continue };
        total += 1;
        hits += usize::from(ok);
        let distinct: BTreeSet<LabelPath> = labels
            .iter()
            .map(|l| l.truncate(level))
            .collect::<Result<_>>()?;
        for l in distinct {
            let g = groups.entry(l).or_insert((0, 0));
            g.0 += usize::from(ok);
            g.1 += 1;
        }
    }
    let mut rows: Vec<CategoryRow> = groups
        .into_iter()
        .map(|(label, (c, n))| CategoryRow {
            label,
            accuracy: c as f64 / n as f64,
            n,
            below_floor: n < min_group,
        })
        .collect();
    rows.sort_by(|a, b| {
        b.accuracy
            .total_cmp(&a.accuracy)
            .then_with(|| b.n.cmp(&a.n))
            .then_with(|| a.label.leaf().cmp(b.label.leaf()))
    });
    let overall = if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    };
    Ok(CategoryReport {
        level,
        rows,
        overall,
        questions: total,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBreakdown {
    /// Predicted label is a sibling leaf of a gold label.
    pub distance1_leaf: usize,
    /// Predicted label's own text overlaps a wrong answer more than the right one.
    pub correlated_with_incorrect_candidate: usize,
    /// Predicted label is an ancestor or descendant of a gold label.
    pub correct_in_gold_multiset: usize,
    pub other: usize,
    pub total: usize,
}

fn siblings(a: &LabelPath, b: &LabelPath) -> bool {
    a.len() == b.len()
        && a.len() >= 2
        && a != b
        && a.codes()[..a.len() - 1] == b.codes()[..b.len() - 1]
}

/// Classifies top-1 errors at the finest level. Classes may overlap; an
/// error matching none of them counts as `other`.
pub fn qc_error_breakdown(
    predictions: &BTreeMap<String, RankedPrediction>,
    gold: &LabelMap,
    taxonomy: &Taxonomy,
    questions: &[Question],
) -> Result<ErrorBreakdown> {
    let idf = Idf::from_documents(questions.iter().flat_map(|q| {
        core::iter::once(q.text.as_str()).chain(q.candidates.iter().map(|c| c.text.as_str()))
    }));
    let by_id: BTreeMap<&str, &Question> = questions.iter().map(|q| (q.id.as_str(), q)).collect();
    let mut out = ErrorBreakdown::default();
    for (id, labels) in gold {
        let Some(top) = predictions.get(id).and_then(RankedPrediction::top) else {
            continue;
        };
        if labels.contains(top) {
            continue;
        }
        out.total += 1;
        let mut matched = false;

        if labels.iter().any(|g| siblings(top, g)) {
            out.distance1_leaf += 1;
            matched = true;
        }

        if let (Some(q), Some(node)) = (by_id.get(id.as_str()), taxonomy.node(top.leaf())) {
            let mut label_terms = content_terms(&node.name);
            label_terms.extend(content_terms(&node.definition));
            let mut right = 0.0;
            let mut wrong: f64 = 0.0;
            for c in &q.candidates {
                let s = idf.overlap(&label_terms, &content_terms(&c.text));
                if c.key == q.answer_key {
                    right = s;
                } else {
                    wrong = wrong.max(s);
                }
            }
            if wrong > right {
                out.correlated_with_incorrect_candidate += 1;
                matched = true;
            }
        }

        if labels
            .iter()
            .any(|g| top.is_prefix_of(g) || g.is_prefix_of(top))
        {
            out.correct_in_gold_multiset += 1;
            matched = true;
        }

        if !matched {
            out.other += 1;
        }
    }
    Ok(out)
}

/// Kappa at every truncation level `1..=max_depth`.
pub fn agreement_report(
    a: &LabelMap,
    b: &LabelMap,
    taxonomy: &Taxonomy,
) -> Result<Vec<(usize, f64)>> {
    (1..=taxonomy.max_depth())
        .map(|level| Ok((level, cohens_kappa(a, b, level)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AnswerCandidate;
    use crate::taxonomy::NodeRow;
    use alloc::format;
    use alloc::string::ToString;
    use alloc::vec;

    fn tax() -> Taxonomy {
        Taxonomy::from_rows(vec![
            NodeRow::new("MAT", None, "Matter", ""),
            NodeRow::new("MAT_COS", Some("MAT"), "Changes of State", ""),
            NodeRow::new("MAT_COS_BOILING", Some("MAT_COS"), "Boiling", ""),
            NodeRow::new("MAT_COS_FREEZING", Some("MAT_COS"), "Freezing", ""),
            NodeRow::new("EAR", None, "Earth", ""),
            NodeRow::new(
                "EAR_WC",
                Some("EAR"),
                "Water Cycle",
                "evaporation and clouds",
            ),
        ])
        .unwrap()
    }

    #[test]
    fn category_groups_and_floor() {
        let t = tax();
        let mut correct = BTreeMap::new();
        let mut gold = LabelMap::new();
        for i in 0..7 {
            let id = format!("f{i}");
            correct.insert(id.clone(), i < 5);
            gold.insert(id, vec![t.path("MAT_COS_BOILING").unwrap()]);
        }
        correct.insert("w".into(), true);
        gold.insert(
            "w".into(),
            vec![
                t.path("EAR_WC").unwrap(),
                t.path("MAT_COS_FREEZING").unwrap(),
            ],
        );

        let r = per_category_report(&correct, &gold, 3, DEFAULT_MIN_GROUP).unwrap();
        let boil = r
            .rows
            .iter()
            .find(|r| r.label.leaf() == "MAT_COS_BOILING")
            .unwrap();
        assert!((boil.accuracy - 5.0 / 7.0).abs() < 1e-12);
        assert_eq!(boil.n, 7);
        assert!(!boil.below_floor);
        // The two-label question lands in both of its groups.
        assert!(r
            .rows
            .iter()
            .any(|r| r.label.leaf() == "EAR_WC" && r.below_floor));
        assert!(r.rows.iter().any(|r| r.label.leaf() == "MAT_COS_FREEZING"));
        assert_eq!(r.rows.iter().map(|r| r.n).sum::<usize>(), 9);
        assert!((r.overall - 6.0 / 8.0).abs() < 1e-12);
        assert!(r.rows.windows(2).all(|w| w[0].accuracy >= w[1].accuracy));

        let r2 = per_category_report(&correct, &gold, 2, DEFAULT_MIN_GROUP).unwrap();
        let cos = r2
            .rows
            .iter()
            .find(|r| r.label.leaf() == "MAT_COS")
            .unwrap();
        assert_eq!(cos.n, 8);
        assert_eq!(r2.overall, r.overall);
    }

    fn question(id: &str, right: &str, wrong: &str) -> Question {
        Question {
            id: id.into(),
            text: "Which process forms clouds?".into(),
            candidates: vec![
                AnswerCandidate {
                    key: "A".into(),
                    text: right.into(),
                },
                AnswerCandidate {
                    key: "B".into(),
                    text: wrong.into(),
                },
            ],
            answer_key: "A".into(),
            grade: None,
            split: None,
        }
    }

    fn ranked(label: LabelPath) -> RankedPrediction {
        RankedPrediction {
            question_id: "x".into(),
            level: 3,
            ranked: vec![(label, 0.9)],
        }
    }

    #[test]
    fn error_classes() {
        let t = tax();
        let qs = vec![
            question("q1", "condensation", "melting"),
            question("q2", "condensation", "evaporation"),
            question("q3", "boiling", "sand"),
        ];
        let gold: LabelMap = [
            ("q1".to_string(), vec![t.path("MAT_COS_FREEZING").unwrap()]),
            ("q2".to_string(), vec![t.path("MAT_COS_BOILING").unwrap()]),
            ("q3".to_string(), vec![t.path("MAT_COS_BOILING").unwrap()]),
        ]
        .into();
        let preds: BTreeMap<String, RankedPrediction> = [
            ("q1".to_string(), ranked(t.path("MAT_COS_BOILING").unwrap())),
            ("q2".to_string(), ranked(t.path("EAR_WC").unwrap())),
            ("q3".to_string(), ranked(t.path("MAT_COS_BOILING").unwrap())),
        ]
        .into();
        let b = qc_error_breakdown(&preds, &gold, &t, &qs).unwrap();
        assert_eq!(b.total, 2);
        assert_eq!(b.distance1_leaf, 1);
        assert_eq!(b.correlated_with_incorrect_candidate, 1);
        assert_eq!(b.correct_in_gold_multiset, 0);
        assert_eq!(b.other, 0);

        let none = qc_error_breakdown(&preds, &LabelMap::new(), &t, &qs).unwrap();
        assert_eq!(none, ErrorBreakdown::default());
    }

    #[test]
    fn coarser_hit_counts_as_gold_multiset() {
        let t = tax();
        let qs = vec![question("q", "a", "b")];
        let gold: LabelMap = [("q".to_string(), vec![t.path("MAT_COS_BOILING").unwrap()])].into();
        let preds: BTreeMap<String, RankedPrediction> =
            [("q".to_string(), ranked(t.path("MAT_COS").unwrap()))].into();
        let b = qc_error_breakdown(&preds, &gold, &t, &qs).unwrap();
        assert_eq!(b.correct_in_gold_multiset, 1);
        assert_eq!(b.distance1_leaf, 0);
    }

    #[test]
    fn agreement_identical_and_leaf_disagreement() {
        let t = tax();
        let a: LabelMap = (0..20)
            .map(|i| {
                let code = ["MAT_COS_BOILING", "EAR_WC"][i % 2];
                (format!("q{i}"), vec![t.path(code).unwrap()])
            })
            .collect();
        let same = agreement_report(&a, &a, &t).unwrap();
        assert!(same.iter().all(|(_, k)| *k == 1.0));
        assert_eq!(same.len(), 3);

        let mut b = a.clone();
        for i in (0..20).step_by(4) {
            b.insert(format!("q{i}"), vec![t.path("MAT_COS_FREEZING").unwrap()]);
        }
        let r = agreement_report(&a, &b, &t).unwrap();
        assert_eq!(r[0].1, 1.0);
        assert!(r[0].1 > r[2].1);
    }
}
