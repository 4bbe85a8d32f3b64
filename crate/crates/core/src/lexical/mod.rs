//! Tokenization and word-level corpus statistics.

mod logodds;
pub mod stopwords;

use std::collections::{BTreeMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::corpus::Corpus;

pub use logodds::{
    first_word_logodds, logodds, logodds_documents, DocFreqMode, LogOddsConfig, LogOddsResult,
};

#[derive(Debug, Error, PartialEq)]
pub enum LexicalError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("corpus is empty after excluding subjects")]
    EmptyAfterExclusion,
    #[error("no word appears in at least {min_docs} poems")]
    EmptyVocabulary { min_docs: usize },
    #[error("vocabulary has a single word ({0:?}); log-odds are undefined")]
    DegenerateVocabulary(String),
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || is_apostrophe(c)
}

/// Lowercased word tokens of a text, plus the first token in its original case.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct TokenStream {
    pub tokens: Vec<String>,
    pub original_case_first: Option<String>,
}

/// Splits text into maximal runs of letters, digits and apostrophes. Edge
/// apostrophes are trimmed, curly apostrophes fold to `'`, tokens are
/// lowercased.
pub fn tokenize(text: &str) -> TokenStream {
    let mut stream = TokenStream::default();
    for run in text.split(|c: char| !is_token_char(c)) {
        let trimmed = run.trim_matches(is_apostrophe);
        if trimmed.is_empty() {
            continue;
        }
        let folded: String = trimmed
            .chars()
            .map(|c| if is_apostrophe(c) { '\'' } else { c })
            .collect();
        if stream.original_case_first.is_none() {
            stream.original_case_first = Some(folded.clone());
        }
        stream.tokens.push(folded.to_lowercase());
    }
    stream
}

/// Word count under [`tokenize`] without allocating the tokens.
pub fn word_count(text: &str) -> usize {
    text.split(|c: char| !is_token_char(c))
        .filter(|run| !run.trim_matches(is_apostrophe).is_empty())
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PronounCategory {
    FirstSingular,
    FirstPlural,
    Second,
    ThirdFeminine,
    ThirdMasculine,
    Third,
}

impl PronounCategory {
    pub const ALL: [PronounCategory; 6] = [
        PronounCategory::FirstSingular,
        PronounCategory::FirstPlural,
        PronounCategory::Second,
        PronounCategory::ThirdFeminine,
        PronounCategory::ThirdMasculine,
        PronounCategory::Third,
    ];

    pub fn members(self) -> &'static [&'static str] {
        match self {
            PronounCategory::FirstSingular => &["i", "me", "my", "mine", "myself"],
            PronounCategory::FirstPlural => &["we", "us", "our", "ours", "ourselves"],
            PronounCategory::Second => &[
                "you", "your", "yours", "yourself", "yourselves", "thou", "thee", "thy", "thine",
                "thyself",
            ],
            PronounCategory::ThirdFeminine => &["she", "her", "hers", "herself"],
            PronounCategory::ThirdMasculine => &["he", "his", "him", "himself"],
            PronounCategory::Third => &[
                "they", "them", "their", "theirs", "themself", "themselves", "it", "its", "itself",
            ],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PronounCategory::FirstSingular => "first_singular",
            PronounCategory::FirstPlural => "first_plural",
            PronounCategory::Second => "second",
            PronounCategory::ThirdFeminine => "third_feminine",
            PronounCategory::ThirdMasculine => "third_masculine",
            PronounCategory::Third => "third",
        }
    }

    pub fn of(token: &str) -> Option<PronounCategory> {
        Self::ALL.into_iter().find(|c| c.members().contains(&token))
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PronounNormalization {
    /// Category tokens over all tokens of the corpus.
    #[default]
    Pooled,
    /// Mean of per-poem rates; poems without tokens are skipped.
    PerPoemMean,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PronounProfile {
    pub poems: usize,
    pub total_tokens: usize,
    pub counts: BTreeMap<PronounCategory, usize>,
    /// Frequency per 100 words under the requested normalization.
    pub per_100_words: BTreeMap<PronounCategory, f64>,
}

impl PronounProfile {
    pub fn frequency(&self, category: PronounCategory) -> f64 {
        self.per_100_words[&category]
    }
}

fn category_counts(tokens: &[String]) -> [usize; 6] {
    let mut counts = [0usize; 6];
    for t in tokens {
        if let Some(c) = PronounCategory::of(t) {
            counts[c.index()] += 1;
        }
    }
    counts
}

/// Pronoun frequencies per 100 words, after dropping poems whose subject is in
/// `exclude_subjects`.
pub fn pronoun_profile(
    corpus: &Corpus,
    exclude_subjects: Option<&HashSet<String>>,
    normalization: PronounNormalization,
) -> Result<PronounProfile, LexicalError> {
    if corpus.is_empty() {
        return Err(LexicalError::EmptyCorpus);
    }
    let kept: Vec<_> = corpus
        .records
        .iter()
        .filter(|r| match (exclude_subjects, &r.subject) {
            (Some(ex), Some(s)) => !ex.contains(s),
            _ => true,
        })
        .collect();
    if kept.is_empty() {
        return Err(LexicalError::EmptyAfterExclusion);
    }
    let per_poem: Vec<([usize; 6], usize)> = kept
        .iter()
        .map(|r| {
            let tokens = tokenize(&r.text).tokens;
            (category_counts(&tokens), tokens.len())
        })
        .collect();

    let mut counts = [0usize; 6];
    let mut total = 0usize;
    for (c, n) in &per_poem {
        for (acc, v) in counts.iter_mut().zip(c) {
            *acc += v;
        }
        total += n;
    }

    let rates: [f64; 6] = match normalization {
        PronounNormalization::Pooled => {
            let mut r = [0.0; 6];
            if total > 0 {
                for (i, c) in counts.iter().enumerate() {
                    r[i] = *c as f64 / total as f64 * 100.0;
                }
            }
            r
        }
        PronounNormalization::PerPoemMean => {
            let mut sums = [0.0; 6];
            let mut n = 0usize;
            for (c, len) in per_poem.iter().filter(|(_, len)| *len > 0) {
                n += 1;
                for i in 0..6 {
                    sums[i] += c[i] as f64 / *len as f64 * 100.0;
                }
            }
            if n > 0 {
                sums.iter_mut().for_each(|s| *s /= n as f64);
            }
            sums
        }
    };

    Ok(PronounProfile {
        poems: kept.len(),
        total_tokens: total,
        counts: PronounCategory::ALL.iter().map(|c| (*c, counts[c.index()])).collect(),
        per_100_words: PronounCategory::ALL.iter().map(|c| (*c, rates[c.index()])).collect(),
    })
}

/// How often each first word opens a poem, sorted by count then word.
pub fn first_word_distribution(corpus: &Corpus) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for r in &corpus.records {
        if let Some(first) = tokenize(&r.text).tokens.into_iter().next() {
            *counts.entry(first).or_default() += 1;
        }
    }
    let mut out: Vec<_> = counts.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

/// A set of word patterns; a trailing `*` matches any token with that prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TouchstoneGroup {
    pub name: String,
    pub patterns: Vec<String>,
}

impl TouchstoneGroup {
    pub fn new(name: impl Into<String>, patterns: &[&str]) -> Self {
        TouchstoneGroup {
            name: name.into(),
            patterns: patterns.iter().map(|p| p.to_lowercase()).collect(),
        }
    }

    /// Parses `name=pat,pat,...`; without `=` the pattern list doubles as the name.
    pub fn parse(spec: &str) -> Self {
        let (name, list) = spec.split_once('=').unwrap_or((spec, spec));
        let patterns: Vec<&str> = list.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
        TouchstoneGroup::new(name.trim(), &patterns)
    }

    pub fn matches(&self, token: &str) -> bool {
        self.patterns.iter().any(|p| match p.strip_suffix('*') {
            Some(stem) => token.starts_with(stem),
            None => token == p,
        })
    }

    /// Touchstones characteristic of GPT-3.5 poems.
    pub fn gpt35_default() -> Self {
        TouchstoneGroup::new("embrace_grace_dance_dreams", &["embrace*", "grace", "dance*", "dream*"])
    }

    /// Touchstones characteristic of GPT-4 poems.
    pub fn gpt4_default() -> Self {
        TouchstoneGroup::new("echo_whisper", &["echo*", "whisper*"])
    }
}

/// Percent of poems containing at least one member of each group.
pub fn touchstone_coverage(corpus: &Corpus, groups: &[TouchstoneGroup]) -> Vec<f64> {
    if corpus.is_empty() {
        return vec![0.0; groups.len()];
    }
    let mut hits = vec![0usize; groups.len()];
    for r in &corpus.records {
        let tokens = tokenize(&r.text).tokens;
        for (g, hit) in groups.iter().zip(hits.iter_mut()) {
            if tokens.iter().any(|t| g.matches(t)) {
                *hit += 1;
            }
        }
    }
    hits.iter()
        .map(|h| *h as f64 / corpus.len() as f64 * 100.0)
        .collect()
}
