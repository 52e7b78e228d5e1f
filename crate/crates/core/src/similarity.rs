//! Sentence similarity: a convex mix of a bag-of-words cosine score and a
//! WordNet word-alignment score.
//!
//! `overall = (1 - delta) * statistic + delta * semantic`

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::lexicon::tokenize;
use crate::wordnet::WordNetLexicon;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

pub const DEFAULT_DELTA: f64 = 0.5;
pub const DEFAULT_TAU: f64 = 0.35;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("delta must lie in [0, 1], got {0}")]
    InvalidDelta(f64),
    #[error("tau must lie in [0, 1], got {0}")]
    InvalidTau(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityConfig {
    delta: f64,
    tau: f64,
    stopwords: BTreeSet<String>,
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        SimilarityConfig {
            delta: DEFAULT_DELTA,
            tau: DEFAULT_TAU,
            stopwords: parse_stopwords(DEFAULT_STOPWORDS),
        }
    }
}

impl SimilarityConfig {
    pub fn new(delta: f64, tau: f64, stopwords: BTreeSet<String>) -> Result<Self, ConfigError> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(ConfigError::InvalidDelta(delta));
        }
        if !(0.0..=1.0).contains(&tau) {
            return Err(ConfigError::InvalidTau(tau));
        }
        Ok(SimilarityConfig { delta, tau, stopwords })
    }

    pub fn with_delta(self, delta: f64) -> Result<Self, ConfigError> {
        Self::new(delta, self.tau, self.stopwords)
    }

    pub fn with_tau(self, tau: f64) -> Result<Self, ConfigError> {
        Self::new(self.delta, tau, self.stopwords)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Low-confidence threshold: best matches scoring below it go to the
    /// expert instead of being answered.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn stopwords(&self) -> &BTreeSet<String> {
        &self.stopwords
    }
}

/// One word per line; blank lines and `#` comments ignored. Words are
/// normalized with the question tokenizer.
pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .flat_map(|l| tokenize(l).into_words())
        .collect()
}

fn content_words<'a, S: AsRef<str>>(tokens: &'a [S], stopwords: &BTreeSet<String>) -> Vec<&'a str> {
    tokens
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| !stopwords.contains(*t))
        .collect()
}

/// Cosine of binary occurrence vectors over the union vocabulary of the two
/// stopword-filtered sentences. 0 when either side is empty.
pub fn sim_statistic<S: AsRef<str>>(tokens_a: &[S], tokens_b: &[S], stopwords: &BTreeSet<String>) -> f64 {
    let a: BTreeSet<&str> = content_words(tokens_a, stopwords).into_iter().collect();
    let b: BTreeSet<&str> = content_words(tokens_b, stopwords).into_iter().collect();
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let shared = a.intersection(&b).count() as f64;
    shared / ((a.len() * b.len()) as f64).sqrt()
}

/// Mean of the two directional alignments, where each word is scored by its
/// best Wu-Palmer match on the other side. 0 when either side is empty.
pub fn sim_semantic<S: AsRef<str>>(
    lexicon: &WordNetLexicon,
    tokens_a: &[S],
    tokens_b: &[S],
    stopwords: &BTreeSet<String>,
) -> f64 {
    let a = content_words(tokens_a, stopwords);
    let b = content_words(tokens_b, stopwords);
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    // scores[i][j] = similarity of a[i] and b[j]; repeated words are scored once.
    let mut cache: HashMap<(&str, &str), f64> = HashMap::new();
    let mut scores = vec![vec![0.0; b.len()]; a.len()];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let key = if x <= y { (*x, *y) } else { (*y, *x) };
            scores[i][j] = *cache.entry(key).or_insert_with(|| lexicon.wup_similarity(key.0, key.1));
        }
    }
    let forward: f64 = scores
        .iter()
        .map(|row| row.iter().copied().fold(0.0, f64::max))
        .sum::<f64>()
        / a.len() as f64;
    let backward: f64 = (0..b.len())
        .map(|j| scores.iter().map(|row| row[j]).fold(0.0, f64::max))
        .sum::<f64>()
        / b.len() as f64;
    (forward + backward) / 2.0
}

/// `(1 - delta) * statistic + delta * semantic`, kept inside [0, 1].
pub fn combine(delta: f64, statistic: f64, semantic: f64) -> f64 {
    ((1.0 - delta) * statistic + delta * semantic).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub statistic: f64,
    pub semantic: f64,
    pub overall: f64,
}

/// All three scores for a pair of raw sentences.
pub fn score(config: &SimilarityConfig, lexicon: &WordNetLexicon, sentence_a: &str, sentence_b: &str) -> Scores {
    let a = tokenize(sentence_a).into_words();
    let b = tokenize(sentence_b).into_words();
    score_words(config, lexicon, &a, &b)
}

pub fn score_words<S: AsRef<str>>(config: &SimilarityConfig, lexicon: &WordNetLexicon, a: &[S], b: &[S]) -> Scores {
    let statistic = sim_statistic(a, b, &config.stopwords);
    let semantic = sim_semantic(lexicon, a, b, &config.stopwords);
    Scores {
        statistic,
        semantic,
        overall: combine(config.delta, statistic, semantic),
    }
}

pub fn sim_overall(config: &SimilarityConfig, lexicon: &WordNetLexicon, sentence_a: &str, sentence_b: &str) -> f64 {
    score(config, lexicon, sentence_a, sentence_b).overall
}

#[cfg(test)]
mod tests {
    use super::*;

    fn none() -> BTreeSet<String> {
        BTreeSet::new()
    }

    #[test]
    fn statistic_examples() {
        assert_eq!(
            sim_statistic(&["force", "pressure"], &["force", "pressure"], &none()),
            1.0
        );
        assert_eq!(sim_statistic(&["force"], &["pressure"], &none()), 0.0);
        let half = sim_statistic(&["force", "pressure"], &["force"], &none());
        assert!((half - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn stopwords_are_removed_first() {
        let config = SimilarityConfig::default();
        assert_eq!(sim_statistic(&["what", "is"], &["what", "is"], config.stopwords()), 0.0);
        assert_eq!(
            sim_statistic(&["what", "is", "force"], &["force"], config.stopwords()),
            1.0
        );
        assert!(config.stopwords().len() > 100);
    }

    #[test]
    fn semantic_identity_and_empty() {
        let lex = WordNetLexicon::empty();
        assert_eq!(sim_semantic(&lex, &["qqq", "www"], &["www", "qqq"], &none()), 1.0);
        assert_eq!(sim_semantic(&lex, &["qqq"], &[] as &[&str], &none()), 0.0);
    }

    #[test]
    fn semantic_alignment_by_hand() {
        // Fallback only: A = [x, y], B = [x]. A->B = (1 + 0) / 2, B->A = 1.
        let lex = WordNetLexicon::empty();
        assert_eq!(sim_semantic(&lex, &["x", "y"], &["x"], &none()), 0.75);
    }

    #[test]
    fn endpoints_of_delta() {
        let lex = WordNetLexicon::empty();
        let base = SimilarityConfig::default();
        let (a, b) = ("newton measured the force", "force on a body measured in newton units");
        let s = score(&base, &lex, a, b);
        let stat_only = base.clone().with_delta(0.0).unwrap();
        let sem_only = base.with_delta(1.0).unwrap();
        assert_eq!(sim_overall(&stat_only, &lex, a, b), s.statistic);
        assert_eq!(sim_overall(&sem_only, &lex, a, b), s.semantic);
        assert!((combine(0.5, 0.4, 0.8) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn config_bounds() {
        assert_eq!(
            SimilarityConfig::default().with_delta(1.5).unwrap_err(),
            ConfigError::InvalidDelta(1.5)
        );
        assert!(SimilarityConfig::default().with_tau(-0.1).is_err());
        assert!(SimilarityConfig::default().with_delta(f64::NAN).is_err());
    }

    #[test]
    fn stopword_file_format() {
        let words = parse_stopwords("# comment\nThe\n\n  of \n");
        assert_eq!(words.into_iter().collect::<Vec<_>>(), ["of", "the"]);
    }
}
