//! Automated scansion and an iambic-dominance score.
//!
//! Each syllable position is one of:
//!
//! * `0` unstressed, `1` stressed (secondary stress folds to `1`),
//! * `x` a monosyllabic word, which may take either value,
//! * `?` a syllable of an out-of-vocabulary word, estimated from vowel-letter
//!   groups.
//!
//! A line's iambic score is the fraction of positions agreeing with the
//! repeating `01` pattern, where `x` always agrees and `?` earns half credit.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::Corpus;
use crate::lexical::tokenize;
use crate::phonetics::{stress_pattern, Dictionary};
use crate::structure::{parse_structure, PoemStructure, StructureError};

#[derive(Debug, Error, PartialEq)]
pub enum MeterError {
    #[error("no scannable lines")]
    NoScannableLines,
    #[error("invalid stress symbol {0:?}")]
    InvalidSymbol(char),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("corpus is empty")]
    EmptyCorpus,
}

pub const DEFAULT_DOMINANCE_THRESHOLD: f64 = 0.75;
const MIN_RESOLVED_SYLLABLES: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StressSequence {
    pub digits: String,
    pub line: usize,
}

impl StressSequence {
    /// Builds a sequence from symbols over `0`, `1`, `2`, `x`, `?`; `2` folds to `1`.
    pub fn new(digits: &str, line: usize) -> Result<Self, MeterError> {
        let digits = digits
            .chars()
            .map(|c| match c {
                '0' | '1' | 'x' | '?' => Ok(c),
                '2' => Ok('1'),
                other => Err(MeterError::InvalidSymbol(other)),
            })
            .collect::<Result<String, _>>()?;
        Ok(StressSequence { digits, line })
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Positions that are not `?`.
    pub fn resolved(&self) -> usize {
        self.digits.chars().filter(|c| *c != '?').count()
    }

    /// Agreement with a repeating two-symbol foot; `None` when empty.
    pub fn alignment(&self, foot: Foot) -> Option<f64> {
        if self.digits.is_empty() {
            return None;
        }
        let pattern = foot.pattern();
        let credit: f64 = self
            .digits
            .bytes()
            .enumerate()
            .map(|(i, c)| match c {
                b'x' => 1.0,
                b'?' => 0.5,
                _ if c == pattern[i % 2] => 1.0,
                _ => 0.0,
            })
            .sum();
        Some(credit / self.digits.len() as f64)
    }
}

impl fmt::Display for StressSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.digits)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Foot {
    /// `01`
    Iamb,
    /// `10`
    Trochee,
}

impl Foot {
    fn pattern(self) -> [u8; 2] {
        match self {
            Foot::Iamb => *b"01",
            Foot::Trochee => *b"10",
        }
    }
}

/// Syllable estimate for unknown words: runs of vowel letters, at least one.
pub fn estimate_syllables(word: &str) -> usize {
    let mut groups = 0;
    let mut in_group = false;
    for c in word.chars() {
        let vowel = matches!(c.to_ascii_lowercase(), 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
        if vowel && !in_group {
            groups += 1;
        }
        in_group = vowel;
    }
    groups.max(1)
}

/// Stress symbols of one line, word by word, using each word's first
/// dictionary variant.
pub fn line_stress(line: &str, line_index: usize, dict: &Dictionary) -> StressSequence {
    let mut digits = String::new();
    for word in tokenize(line).tokens {
        match dict.lookup(&word).and_then(|v| v.first()) {
            Some(variant) => {
                let pattern = stress_pattern(variant);
                if pattern.len() == 1 {
                    digits.push('x');
                } else {
                    digits.extend(pattern.chars().map(|c| if c == '2' { '1' } else { c }));
                }
            }
            None => {
                log::trace!("no pronunciation for {word:?}; estimating syllables");
                digits.extend(std::iter::repeat_n('?', estimate_syllables(&word)));
            }
        }
    }
    StressSequence {
        digits,
        line: line_index,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeterVerdict {
    pub iambic_score: f64,
    pub dominant: bool,
    pub syllables_per_line: Vec<usize>,
    /// Iambic score of each line; `None` for lines with too few resolved syllables.
    pub line_scores: Vec<Option<f64>>,
}

/// Mean iambic alignment over scannable lines (at least two syllables that
/// are not `?`).
pub fn score_sequences(lines: &[StressSequence], threshold: f64) -> Result<MeterVerdict, MeterError> {
    let line_scores: Vec<Option<f64>> = lines
        .iter()
        .map(|s| {
            if s.resolved() >= MIN_RESOLVED_SYLLABLES {
                s.alignment(Foot::Iamb)
            } else {
                None
            }
        })
        .collect();
    let scored: Vec<f64> = line_scores.iter().flatten().copied().collect();
    if scored.is_empty() {
        return Err(MeterError::NoScannableLines);
    }
    let iambic_score = scored.iter().sum::<f64>() / scored.len() as f64;
    Ok(MeterVerdict {
        iambic_score,
        dominant: iambic_score >= threshold,
        syllables_per_line: lines.iter().map(StressSequence::len).collect(),
        line_scores,
    })
}

pub fn iambic_score(poem: &PoemStructure, dict: &Dictionary, threshold: f64) -> Result<MeterVerdict, MeterError> {
    let lines: Vec<StressSequence> = poem
        .lines
        .iter()
        .enumerate()
        .map(|(i, l)| line_stress(l, i, dict))
        .collect();
    score_sequences(&lines, threshold)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeterStats {
    pub poems: usize,
    /// Poems with at least one scannable line.
    pub poems_scanned: usize,
    pub poems_dominant: usize,
    pub pct_dominant_iambic: f64,
    pub mean_iambic_score: f64,
}

impl MeterStats {
    /// Aggregates per-poem results; unscannable poems count toward `poems` only.
    pub fn from_verdicts<'a>(verdicts: impl IntoIterator<Item = Option<&'a MeterVerdict>>) -> Self {
        let (mut poems, mut scanned, mut dominant, mut sum) = (0usize, 0usize, 0usize, 0.0);
        for v in verdicts {
            poems += 1;
            if let Some(v) = v {
                scanned += 1;
                dominant += usize::from(v.dominant);
                sum += v.iambic_score;
            }
        }
        let div = |n: f64, d: usize| if d == 0 { 0.0 } else { n / d as f64 };
        MeterStats {
            poems,
            poems_scanned: scanned,
            poems_dominant: dominant,
            pct_dominant_iambic: div(dominant as f64 * 100.0, scanned),
            mean_iambic_score: div(sum, scanned),
        }
    }
}

pub fn corpus_meter_stats(corpus: &Corpus, dict: &Dictionary, threshold: f64) -> Result<MeterStats, MeterError> {
    if corpus.is_empty() {
        return Err(MeterError::EmptyCorpus);
    }
    let mut verdicts = Vec::with_capacity(corpus.len());
    for r in &corpus.records {
        let s = parse_structure(r)?;
        match iambic_score(&s, dict, threshold) {
            Ok(v) => verdicts.push(Some(v)),
            Err(MeterError::NoScannableLines) => verdicts.push(None),
            Err(e) => return Err(e),
        }
    }
    Ok(MeterStats::from_verdicts(verdicts.iter().map(Option::as_ref)))
}
