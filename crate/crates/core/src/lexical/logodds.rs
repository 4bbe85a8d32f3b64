//! Weighted log-odds ratios with an informative Dirichlet prior.
//!
//! For word `w` with count `y_kw` in corpus `k`, corpus totals `n_k` taken
//! over the retained vocabulary, and prior pseudo-counts
//! `α_w = α_0 · (y_aw + y_bw) / (n_a + n_b)`:
//!
//! ```text
//! δ_w  = ln((y_aw + α_w) / (n_a + α_0 − y_aw − α_w))
//!      − ln((y_bw + α_w) / (n_b + α_0 − y_bw − α_w))
//! σ²_w = 1 / (y_aw + α_w) + 1 / (y_bw + α_w)
//! z_w  = δ_w / σ_w
//! ```
//!
//! `α_0` is `prior_scale` times the retained vocabulary size.

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use super::stopwords::is_stopword;
use super::{tokenize, LexicalError};
use crate::corpus::Corpus;
use crate::scalar::Real;

/// How the minimum document frequency is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DocFreqMode {
    /// Documents of both corpora counted together.
    #[default]
    Pooled,
    /// The threshold must be met within each corpus separately.
    EachCorpus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogOddsConfig<T> {
    pub min_docs: usize,
    pub remove_stopwords: bool,
    pub prior_scale: T,
    pub doc_freq_mode: DocFreqMode,
}

impl<T: Real> Default for LogOddsConfig<T> {
    fn default() -> Self {
        LogOddsConfig {
            min_docs: 10,
            remove_stopwords: true,
            prior_scale: T::ratio(1, 100),
            doc_freq_mode: DocFreqMode::Pooled,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogOddsResult<T> {
    pub word: String,
    pub delta: T,
    pub variance: T,
    pub z_score: T,
    pub count_a: usize,
    pub count_b: usize,
    pub doc_freq_a: usize,
    pub doc_freq_b: usize,
}

#[derive(Default)]
struct WordStats {
    count: [usize; 2],
    docs: [usize; 2],
}

/// Scores two collections of tokenized documents and ranks words by z,
/// highest first (ties broken alphabetically).
pub fn logodds_documents<T: Real>(
    docs_a: &[Vec<String>],
    docs_b: &[Vec<String>],
    min_docs: usize,
    mode: DocFreqMode,
    prior_scale: T,
) -> Result<Vec<LogOddsResult<T>>, LexicalError> {
    if docs_a.is_empty() || docs_b.is_empty() {
        return Err(LexicalError::EmptyCorpus);
    }
    let mut table: BTreeMap<&str, WordStats> = BTreeMap::new();
    for (side, docs) in [docs_a, docs_b].into_iter().enumerate() {
        for doc in docs {
            let mut seen = HashSet::new();
            for tok in doc {
                let entry = table.entry(tok.as_str()).or_default();
                entry.count[side] += 1;
                if seen.insert(tok.as_str()) {
                    entry.docs[side] += 1;
                }
            }
        }
    }
    table.retain(|_, s| match mode {
        DocFreqMode::Pooled => s.docs[0] + s.docs[1] >= min_docs,
        DocFreqMode::EachCorpus => s.docs[0] >= min_docs && s.docs[1] >= min_docs,
    });
    match table.len() {
        0 => return Err(LexicalError::EmptyVocabulary { min_docs }),
        1 => {
            let word = table.keys().next().expect("one entry").to_string();
            return Err(LexicalError::DegenerateVocabulary(word));
        }
        _ => {}
    }

    let n_a: usize = table.values().map(|s| s.count[0]).sum();
    let n_b: usize = table.values().map(|s| s.count[1]).sum();
    let n_pooled = n_a + n_b;
    let alpha_0 = prior_scale * T::from_count(table.len());
    let (n_a, n_b) = (T::from_count(n_a), T::from_count(n_b));

    let mut results: Vec<LogOddsResult<T>> = table
        .into_iter()
        .map(|(word, s)| {
            let alpha_w = alpha_0 * T::ratio(s.count[0] + s.count[1], n_pooled);
            let ya = T::from_count(s.count[0]) + alpha_w;
            let yb = T::from_count(s.count[1]) + alpha_w;
            let log_odds_a = (ya / (n_a + alpha_0 - ya)).ln();
            let log_odds_b = (yb / (n_b + alpha_0 - yb)).ln();
            let delta = log_odds_a - log_odds_b;
            let variance = ya.recip() + yb.recip();
            LogOddsResult {
                word: word.to_string(),
                delta,
                variance,
                z_score: delta / variance.sqrt(),
                count_a: s.count[0],
                count_b: s.count[1],
                doc_freq_a: s.docs[0],
                doc_freq_b: s.docs[1],
            }
        })
        .collect();
    results.sort_by(|a, b| {
        b.z_score
            .partial_cmp(&a.z_score)
            .expect("finite z scores")
            .then_with(|| a.word.cmp(&b.word))
    });
    Ok(results)
}

fn corpus_docs(corpus: &Corpus, remove_stopwords: bool) -> Vec<Vec<String>> {
    corpus
        .records
        .iter()
        .map(|r| {
            let mut tokens = tokenize(&r.text).tokens;
            if remove_stopwords {
                tokens.retain(|t| !is_stopword(t));
            }
            tokens
        })
        .collect()
}

/// Distinctive words of `a` relative to `b` (positive z favors `a`).
pub fn logodds<T: Real>(
    a: &Corpus,
    b: &Corpus,
    config: &LogOddsConfig<T>,
) -> Result<Vec<LogOddsResult<T>>, LexicalError> {
    logodds_documents(
        &corpus_docs(a, config.remove_stopwords),
        &corpus_docs(b, config.remove_stopwords),
        config.min_docs,
        config.doc_freq_mode,
        config.prior_scale,
    )
}

/// Like [`logodds`] but each poem contributes only its first token, and
/// stopwords are always kept.
pub fn first_word_logodds<T: Real>(
    a: &Corpus,
    b: &Corpus,
    config: &LogOddsConfig<T>,
) -> Result<Vec<LogOddsResult<T>>, LexicalError> {
    let firsts = |c: &Corpus| -> Vec<Vec<String>> {
        c.records
            .iter()
            .map(|r| tokenize(&r.text).tokens.into_iter().take(1).collect())
            .collect()
    };
    logodds_documents(
        &firsts(a),
        &firsts(b),
        config.min_docs,
        config.doc_freq_mode,
        config.prior_scale,
    )
}
