//! ARPAbet pronouncing dictionary in the CMUdict plain-text layout.
//!
//! Accepted line shapes:
//!
//! ```text
//! ;;; comment
//! READ  R EH1 D
//! READ(1)  R IY1 D
//! read(2) R IY1 D # trailing comment (newer releases)
//! ```
//!
//! Vowels carry a stress digit: 0 unstressed, 1 primary, 2 secondary. Lines
//! that do not parse are skipped and counted. Non-UTF-8 lines are decoded as
//! Latin-1.

use std::borrow::Cow;
use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhoneticError {
    #[error("cannot read dictionary {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("no syllabic nucleus in {0}")]
    NoNucleus(String),
}

const VOWELS: [&str; 15] = [
    "AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER", "EY", "IH", "IY", "OW", "OY", "UH", "UW",
];
const CONSONANTS: [&str; 24] = [
    "B", "CH", "D", "DH", "F", "G", "HH", "JH", "K", "L", "M", "N", "NG", "P", "R", "S", "SH", "T",
    "TH", "V", "W", "Y", "Z", "ZH",
];

/// One ARPAbet symbol, vowels with their stress digit (e.g. `EY1`, `Z`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Phoneme(String);

impl Phoneme {
    pub fn parse(symbol: &str) -> Option<Phoneme> {
        let symbol = symbol.to_ascii_uppercase();
        let (base, digit) = match symbol.as_bytes().last() {
            Some(b @ b'0'..=b'2') => (&symbol[..symbol.len() - 1], Some(*b)),
            _ => (symbol.as_str(), None),
        };
        let valid = match digit {
            Some(_) => VOWELS.contains(&base),
            None => CONSONANTS.contains(&base),
        };
        valid.then_some(Phoneme(symbol))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_vowel(&self) -> bool {
        self.stress().is_some()
    }

    pub fn stress(&self) -> Option<u8> {
        match self.0.as_bytes().last() {
            Some(b @ b'0'..=b'2') => Some(b - b'0'),
            _ => None,
        }
    }
}

impl fmt::Display for Phoneme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One pronunciation variant of a word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Pronunciation(Vec<Phoneme>);

impl Pronunciation {
    pub fn new(phonemes: Vec<Phoneme>) -> Self {
        Pronunciation(phonemes)
    }

    /// Parses space-separated symbols such as `"AH0 B L EY1 Z"`.
    pub fn parse(symbols: &str) -> Option<Self> {
        let phonemes = symbols
            .split_whitespace()
            .map(Phoneme::parse)
            .collect::<Option<Vec<_>>>()?;
        (!phonemes.is_empty()).then_some(Pronunciation(phonemes))
    }

    pub fn phonemes(&self) -> &[Phoneme] {
        &self.0
    }

    pub fn syllables(&self) -> usize {
        self.0.iter().filter(|p| p.is_vowel()).count()
    }
}

impl fmt::Display for Pronunciation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PronunciationEntry {
    pub word: String,
    pub variants: Vec<Pronunciation>,
}

/// Phoneme suffix starting at the last stressed (1 or 2) vowel, or at the last
/// vowel when none is stressed. Two words rhyme when these match.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct RhymePart(Vec<Phoneme>);

impl RhymePart {
    pub fn phonemes(&self) -> &[Phoneme] {
        &self.0
    }
}

impl fmt::Display for RhymePart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&Pronunciation(self.0.clone()), f)
    }
}

pub fn rhyme_part(variant: &Pronunciation) -> Result<RhymePart, PhoneticError> {
    let ph = variant.phonemes();
    let start = ph
        .iter()
        .rposition(|p| matches!(p.stress(), Some(1 | 2)))
        .or_else(|| ph.iter().rposition(Phoneme::is_vowel))
        .ok_or_else(|| PhoneticError::NoNucleus(variant.to_string()))?;
    Ok(RhymePart(ph[start..].to_vec()))
}

/// One stress digit per vowel, in order.
pub fn stress_pattern(variant: &Pronunciation) -> String {
    variant
        .phonemes()
        .iter()
        .filter_map(Phoneme::stress)
        .map(|d| char::from(b'0' + d))
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct Dictionary {
    entries: HashMap<String, Vec<Pronunciation>>,
    skipped_lines: usize,
    checksum: String,
}

const BUNDLED: &[u8] = include_bytes!("../data/cmudict-subset.txt");

fn decode_line(line: &[u8]) -> Cow<'_, str> {
    match std::str::from_utf8(line) {
        Ok(s) => Cow::Borrowed(s),
        Err(_) => Cow::Owned(line.iter().map(|b| char::from(*b)).collect()),
    }
}

fn base_word(key: &str) -> &str {
    match key.rfind('(') {
        Some(i) if key.ends_with(')') && key[i + 1..key.len() - 1].bytes().all(|b| b.is_ascii_digit()) && i > 0 => {
            &key[..i]
        }
        _ => key,
    }
}

impl Dictionary {
    /// Parses dictionary text. Never fails: unparseable lines are counted in
    /// [`Dictionary::skipped_lines`].
    pub fn parse(bytes: &[u8]) -> Self {
        let mut entries: HashMap<String, Vec<Pronunciation>> = HashMap::new();
        let mut skipped = 0usize;
        for raw in bytes.split(|b| *b == b'\n') {
            let line = decode_line(raw);
            let line = line.trim();
            if line.is_empty() || line.starts_with(";;;") {
                continue;
            }
            let line = line.split_once(" #").map_or(line, |(body, _)| body.trim_end());
            let Some((key, rest)) = line.split_once(char::is_whitespace) else {
                skipped += 1;
                continue;
            };
            match Pronunciation::parse(rest) {
                Some(p) => entries.entry(base_word(key).to_lowercase()).or_default().push(p),
                None => skipped += 1,
            }
        }
        if skipped > 0 {
            log::warn!("pronouncing dictionary: skipped {skipped} malformed lines");
        }
        Dictionary {
            entries,
            skipped_lines: skipped,
            checksum: hex::encode(Sha256::digest(bytes)),
        }
    }

    pub fn load(path: &Path) -> Result<Self, PhoneticError> {
        let bytes = fs::read(path).map_err(|source| PhoneticError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::parse(&bytes))
    }

    /// The subset dictionary shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED)
    }

    /// Variants of `word`, case-insensitively; `None` when out of vocabulary.
    pub fn lookup(&self, word: &str) -> Option<&[Pronunciation]> {
        self.entries.get(&word.to_lowercase()).map(Vec::as_slice)
    }

    pub fn entry(&self, word: &str) -> Option<PronunciationEntry> {
        self.lookup(word).map(|v| PronunciationEntry {
            word: word.to_lowercase(),
            variants: v.to_vec(),
        })
    }

    pub fn contains(&self, word: &str) -> bool {
        self.lookup(word).is_some()
    }

    /// Vowel count of each variant; `None` when out of vocabulary.
    pub fn syllable_count(&self, word: &str) -> Option<Vec<usize>> {
        self.lookup(word)
            .map(|vs| vs.iter().map(Pronunciation::syllables).collect())
    }

    /// Rhyming parts of every variant that has a vowel.
    pub fn rhyme_parts(&self, word: &str) -> Vec<RhymePart> {
        self.lookup(word)
            .unwrap_or_default()
            .iter()
            .filter_map(|p| rhyme_part(p).ok())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Words in sorted order.
    pub fn words(&self) -> Vec<&str> {
        let mut w: Vec<&str> = self.entries.keys().map(String::as_str).collect();
        w.sort_unstable();
        w
    }

    pub fn skipped_lines(&self) -> usize {
        self.skipped_lines
    }

    /// SHA-256 of the dictionary file, hex encoded.
    pub fn checksum(&self) -> &str {
        &self.checksum
    }
}
