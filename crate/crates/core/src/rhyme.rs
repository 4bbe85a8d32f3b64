//! End-rhyme detection over the non-blank lines of a poem.
//!
//! Every window start is scanned (stride 1) for AA, ABAB, ABBA and ABCB
//! patterns. Lines bound by a matching pair in any detected window are
//! flagged as rhymed. Out-of-vocabulary end words never rhyme.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::Corpus;
use crate::phonetics::{Dictionary, RhymePart};
use crate::structure::{parse_structure, PoemStructure, StructureError};

#[derive(Debug, Error, PartialEq)]
pub enum RhymeError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("corpus is empty")]
    EmptyCorpus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Scheme {
    #[serde(rename = "AA")]
    Aa,
    #[serde(rename = "ABAB")]
    Abab,
    #[serde(rename = "ABBA")]
    Abba,
    #[serde(rename = "ABCB")]
    Abcb,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Aa => "AA",
            Scheme::Abab => "ABAB",
            Scheme::Abba => "ABBA",
            Scheme::Abcb => "ABCB",
        })
    }
}

/// A scheme found in the window starting at line `start` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SchemeMatch {
    pub scheme: Scheme,
    pub start: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhymeAnnotation {
    /// Final word of each line, lowercased; empty when the line has none.
    pub end_words: Vec<String>,
    pub rhymed_line_flags: Vec<bool>,
    pub schemes_found: BTreeSet<SchemeMatch>,
    /// Rhyming line pairs (0-based, lower index first).
    pub links: BTreeSet<(usize, usize)>,
    /// Lines whose end word is missing from the dictionary.
    pub out_of_vocabulary: Vec<usize>,
    pub rhymed_fraction: f64,
}

impl RhymeAnnotation {
    pub fn has_rhyme(&self) -> bool {
        !self.schemes_found.is_empty()
    }

    pub fn rhymed_lines(&self) -> usize {
        self.rhymed_line_flags.iter().filter(|f| **f).count()
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphabetic() || c == '\'' || c == '\u{2019}'
}

/// Last run of letters/apostrophes in a line, lowercased, with edge
/// apostrophes removed. Hyphenated endings yield their final segment.
pub fn end_word(line: &str) -> Option<String> {
    line.split(|c: char| !is_word_char(c))
        .map(|w| w.trim_matches(|c| c == '\'' || c == '\u{2019}'))
        .rfind(|w| !w.is_empty())
        .map(|w| w.replace('\u{2019}', "'").to_lowercase())
}

fn share_part(a: &[RhymePart], b: &[RhymePart]) -> bool {
    a.iter().any(|p| b.contains(p))
}

/// True when some variant of `a` and some variant of `b` have identical
/// rhyming parts.
pub fn lines_rhyme(a: &str, b: &str, dict: &Dictionary) -> bool {
    share_part(&dict.rhyme_parts(a), &dict.rhyme_parts(b))
}

pub fn annotate_rhymes(poem: &PoemStructure, dict: &Dictionary) -> RhymeAnnotation {
    let end_words: Vec<String> = poem
        .lines
        .iter()
        .map(|l| end_word(l).unwrap_or_default())
        .collect();
    let parts: Vec<Vec<RhymePart>> = end_words.iter().map(|w| dict.rhyme_parts(w)).collect();
    let out_of_vocabulary: Vec<usize> = end_words
        .iter()
        .enumerate()
        .filter(|(_, w)| !w.is_empty() && !dict.contains(w))
        .map(|(i, _)| i)
        .collect();
    if !out_of_vocabulary.is_empty() {
        log::debug!(
            "out-of-vocabulary end words: {:?}",
            out_of_vocabulary.iter().map(|i| &end_words[*i]).collect::<Vec<_>>()
        );
    }

    let n = end_words.len();
    let rhymes = |i: usize, j: usize| share_part(&parts[i], &parts[j]);
    let mut flags = vec![false; n];
    let mut schemes = BTreeSet::new();
    let mut links = BTreeSet::new();
    let mut bind = |pairs: &[(usize, usize)], flags: &mut Vec<bool>| {
        for &(i, j) in pairs {
            flags[i] = true;
            flags[j] = true;
            links.insert((i, j));
        }
    };

    for i in 0..n.saturating_sub(1) {
        if rhymes(i, i + 1) {
            schemes.insert(SchemeMatch { scheme: Scheme::Aa, start: i });
            bind(&[(i, i + 1)], &mut flags);
        }
    }
    for i in 0..n.saturating_sub(3) {
        let abab = rhymes(i, i + 2) && rhymes(i + 1, i + 3);
        if abab {
            schemes.insert(SchemeMatch { scheme: Scheme::Abab, start: i });
            bind(&[(i, i + 2), (i + 1, i + 3)], &mut flags);
        }
        if rhymes(i, i + 3) && rhymes(i + 1, i + 2) {
            schemes.insert(SchemeMatch { scheme: Scheme::Abba, start: i });
            bind(&[(i, i + 3), (i + 1, i + 2)], &mut flags);
        }
        if !abab && rhymes(i + 1, i + 3) {
            schemes.insert(SchemeMatch { scheme: Scheme::Abcb, start: i });
            bind(&[(i + 1, i + 3)], &mut flags);
        }
    }

    let rhymed = flags.iter().filter(|f| **f).count();
    RhymeAnnotation {
        end_words,
        rhymed_line_flags: flags,
        schemes_found: schemes,
        links,
        out_of_vocabulary,
        rhymed_fraction: if n == 0 { 0.0 } else { rhymed as f64 / n as f64 },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhymeStats {
    pub poems: usize,
    pub poems_with_rhyme: usize,
    pub poems_with_rhyme_pct: f64,
    /// Unweighted mean of per-poem rhymed fractions.
    pub avg_rhymed_fraction: f64,
    /// Rhymed lines over all lines of the corpus.
    pub pooled_rhymed_fraction: f64,
}

impl RhymeStats {
    pub fn from_annotations<'a>(annotations: impl IntoIterator<Item = &'a RhymeAnnotation>) -> Self {
        let (mut poems, mut with, mut frac_sum, mut rhymed, mut lines) = (0usize, 0usize, 0.0, 0usize, 0usize);
        for a in annotations {
            poems += 1;
            with += usize::from(a.has_rhyme());
            frac_sum += a.rhymed_fraction;
            rhymed += a.rhymed_lines();
            lines += a.rhymed_line_flags.len();
        }
        let div = |n: f64, d: usize| if d == 0 { 0.0 } else { n / d as f64 };
        RhymeStats {
            poems,
            poems_with_rhyme: with,
            poems_with_rhyme_pct: div(with as f64 * 100.0, poems),
            avg_rhymed_fraction: div(frac_sum, poems),
            pooled_rhymed_fraction: div(rhymed as f64, lines),
        }
    }
}

pub fn corpus_rhyme_stats(corpus: &Corpus, dict: &Dictionary) -> Result<RhymeStats, RhymeError> {
    if corpus.is_empty() {
        return Err(RhymeError::EmptyCorpus);
    }
    let annotations = corpus
        .records
        .iter()
        .map(|r| parse_structure(r).map(|s| annotate_rhymes(&s, dict)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RhymeStats::from_annotations(&annotations))
}
