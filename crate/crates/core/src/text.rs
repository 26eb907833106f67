//! Shared tokenizer, stopword list and idf table.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

/// Lowercases `text` and splits it on anything that is not alphanumeric.
/// Punctuation never survives as a token.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.chars().flat_map(char::to_lowercase).collect())
        .collect()
}

/// Number of sentence terminators (`.`, `?`, `!`), at least 1.
pub fn sentence_count(text: &str) -> usize {
    text.chars()
        .filter(|c| matches!(c, '.' | '?' | '!'))
        .count()
        .max(1)
}

// Version 1 of the built-in list. Append-only: changing it alters features.
const STOPWORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "could",
    "did",
    "do",
    "does",
    "doing",
    "down",
    "during",
    "each",
    "few",
    "for",
    "from",
    "further",
    "had",
    "has",
    "have",
    "having",
    "he",
    "her",
    "here",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "i",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "itself",
    "just",
    "me",
    "more",
    "most",
    "my",
    "myself",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "off",
    "on",
    "once",
    "only",
    "or",
    "other",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "s",
    "same",
    "she",
    "should",
    "so",
    "some",
    "such",
    "t",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "to",
    "too",
    "under",
    "until",
    "up",
    "very",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "which",
    "while",
    "who",
    "whom",
    "why",
    "will",
    "with",
    "would",
    "you",
    "your",
    "yours",
    "yourself",
];

pub fn is_stopword(token: &str) -> bool {
    STOPWORDS.binary_search(&token).is_ok()
}

/// Distinct non-stopword tokens of `text`.
pub fn content_terms(text: &str) -> BTreeSet<String> {
    tokenize(text)
        .into_iter()
        .filter(|t| !is_stopword(t))
        .collect()
}

/// Smoothed inverse document frequency, `ln((N + 1) / (df + 1)) + 1`.
///
/// Terms never seen get the maximum weight `ln(N + 1) + 1`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Idf {
    docs: usize,
    df: BTreeMap<String, usize>,
}

impl Idf {
    pub fn from_documents<'a, I>(docs: I) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut idf = Idf::default();
        for doc in docs {
            idf.docs += 1;
            for term in content_terms(doc) {
                *idf.df.entry(term).or_insert(0) += 1;
            }
        }
        idf
    }

    pub fn documents(&self) -> usize {
        self.docs
    }

    pub fn weight(&self, term: &str) -> f64 {
        let df = self.df.get(term).copied().unwrap_or(0);
        libm::log((self.docs as f64 + 1.0) / (df as f64 + 1.0)) + 1.0
    }

    /// Sum of idf weights over the intersection of two term sets.
    pub fn overlap(&self, a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
        a.intersection(b).map(|t| self.weight(t)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn stopwords_sorted_for_binary_search() {
        assert!(STOPWORDS.windows(2).all(|w| w[0] < w[1]));
        assert!(STOPWORDS.len() >= 120);
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(
            tokenize("What happens to water?"),
            vec!["what", "happens", "to", "water"]
        );
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("3rd-grade exam."), vec!["3rd", "grade", "exam"]);
        assert!(tokenize("?!... --").is_empty());
    }

    #[test]
    fn sentences() {
        assert_eq!(sentence_count("What is ice?"), 1);
        assert_eq!(sentence_count("no terminator"), 1);
        assert_eq!(sentence_count("One. Two! Three?"), 3);
    }

    #[test]
    fn idf_orders_rare_terms_higher() {
        let idf = Idf::from_documents(["ice melts", "ice freezes", "water boils"]);
        assert!(idf.weight("boils") > idf.weight("ice"));
        assert!(idf.weight("unseen") > idf.weight("boils"));
        let a: BTreeSet<String> = ["ice".into(), "boils".into()].into();
        let b: BTreeSet<String> = ["boils".into()].into();
        assert_eq!(idf.overlap(&a, &b), idf.weight("boils"));
    }
}
