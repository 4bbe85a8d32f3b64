//! Poem records, corpora, and the loaders that read them from disk.
//!
//! The interchange format is JSON Lines with the fields `id`, `text`,
//! `source`, `style`, `subject`, `template` and `title`. CSV files (header row
//! required) and directories of `.txt` files are normalized into the same
//! model. Text is kept byte-for-byte apart from CRLF → LF.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taxonomy;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{location}: {message}")]
    Malformed { location: String, message: String },
    #[error("{location}: duplicate id {id:?}")]
    DuplicateId { location: String, id: String },
    #[error("unknown source {0:?} (expected human, gpt35, gpt4 or other:<model>)")]
    UnknownSource(String),
    #[error("unknown template {0:?} (expected general, figurative or specific)")]
    UnknownTemplate(String),
    #[error("cannot infer input format of {0}")]
    UnknownFormat(PathBuf),
}

/// Who wrote a poem.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    Human,
    Gpt35,
    Gpt4,
    Other(String),
}

impl Source {
    pub fn is_generated(&self) -> bool {
        !matches!(self, Source::Human)
    }

    /// Maps a chat model identifier onto a source label.
    pub fn from_model_id(model: &str) -> Source {
        let m = model.to_ascii_lowercase();
        if m.starts_with("gpt-3.5") {
            Source::Gpt35
        } else if m == "gpt-4" || m.starts_with("gpt-4-") {
            Source::Gpt4
        } else {
            Source::Other(model.to_string())
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Human => f.write_str("human"),
            Source::Gpt35 => f.write_str("gpt35"),
            Source::Gpt4 => f.write_str("gpt4"),
            Source::Other(name) => write!(f, "other:{name}"),
        }
    }
}

impl FromStr for Source {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        match trimmed.to_ascii_lowercase().as_str() {
            "human" => return Ok(Source::Human),
            "gpt35" | "gpt-3.5" | "gpt-3.5-turbo" => return Ok(Source::Gpt35),
            "gpt4" | "gpt-4" => return Ok(Source::Gpt4),
            _ => {}
        }
        match trimmed.split_once(':') {
            Some((tag, name)) if tag.eq_ignore_ascii_case("other") && !name.trim().is_empty() => {
                Ok(Source::Other(name.trim().to_string()))
            }
            _ => Err(CorpusError::UnknownSource(s.to_string())),
        }
    }
}

impl Serialize for Source {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Source {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// Writing-prompt template a generated poem answered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Template {
    General,
    Figurative,
    Specific,
}

impl Template {
    pub const ALL: [Template; 3] = [Template::General, Template::Figurative, Template::Specific];

    pub fn as_str(self) -> &'static str {
        match self {
            Template::General => "general",
            Template::Figurative => "figurative",
            Template::Specific => "specific",
        }
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Template {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "general" => Ok(Template::General),
            "figurative" => Ok(Template::Figurative),
            "specific" => Ok(Template::Specific),
            _ => Err(CorpusError::UnknownTemplate(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoemRecord {
    pub id: String,
    pub text: String,
    pub source: Source,
    pub style: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<Template>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
}

pub const UNSPECIFIED_STYLE: &str = "unspecified";

impl PoemRecord {
    /// Checks the record-level invariants; the message is suitable for a
    /// [`CorpusError::Malformed`].
    pub fn validate(&self) -> Result<(), String> {
        if self.id.trim().is_empty() {
            return Err("empty id".into());
        }
        if self.text.trim_end().is_empty() {
            return Err("text is empty".into());
        }
        match (self.source.is_generated(), self.template.is_some()) {
            (true, false) => return Err(format!("generated source {} requires a template", self.source)),
            (false, true) => return Err("template given for a human-authored poem".into()),
            _ => {}
        }
        if self.source.is_generated() && !taxonomy::is_generated_style(&self.style) {
            return Err(format!("style {:?} is not one of the generation styles", self.style));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub label: String,
    pub records: Vec<PoemRecord>,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate ids.
    pub fn new(label: impl Into<String>, records: Vec<PoemRecord>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        for (i, r) in records.iter().enumerate() {
            if !seen.insert(r.id.as_str()) {
                return Err(CorpusError::DuplicateId {
                    location: format!("record {}", i + 1),
                    id: r.id.clone(),
                });
            }
        }
        Ok(Corpus {
            label: label.into(),
            records,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct style labels in first-appearance order.
    pub fn styles(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.records
            .iter()
            .filter(|r| seen.insert(r.style.as_str()))
            .map(|r| r.style.clone())
            .collect()
    }

    /// Copy of the corpus restricted to records accepted by `keep`.
    pub fn filtered(&self, keep: impl Fn(&PoemRecord) -> bool) -> Corpus {
        Corpus {
            label: self.label.clone(),
            records: self.records.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    JsonLines,
    Csv,
    TextDirectory,
}

impl InputFormat {
    pub fn detect(path: &Path) -> Result<Self, CorpusError> {
        if path.is_dir() {
            return Ok(InputFormat::TextDirectory);
        }
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("jsonl") | Some("ndjson") | Some("json") => Ok(InputFormat::JsonLines),
            Some("csv") => Ok(InputFormat::Csv),
            _ => Err(CorpusError::UnknownFormat(path.to_path_buf())),
        }
    }
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" | "json-lines" => Ok(InputFormat::JsonLines),
            "csv" => Ok(InputFormat::Csv),
            "dir" | "directory" | "text" => Ok(InputFormat::TextDirectory),
            other => Err(format!("unknown input format {other:?}")),
        }
    }
}

/// Labels applied to records that do not carry their own. Only the text
/// directory loader relies on them; JSON Lines and CSV records must name a
/// source themselves.
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub label: Option<String>,
    pub source: Source,
    pub style: Option<String>,
    pub template: Option<Template>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            label: None,
            source: Source::Human,
            style: None,
            template: None,
        }
    }
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    id: Option<String>,
    text: Option<String>,
    source: Option<String>,
    style: Option<String>,
    subject: Option<String>,
    template: Option<String>,
    title: Option<String>,
}

fn normalize_newlines(text: &str) -> String {
    text.replace("\r\n", "\n")
}

fn non_empty(v: Option<String>) -> Option<String> {
    v.filter(|s| !s.trim().is_empty())
}

impl RawRecord {
    fn into_record(self, location: &str, fallback_id: String) -> Result<PoemRecord, CorpusError> {
        let malformed = |message: String| CorpusError::Malformed {
            location: location.to_string(),
            message,
        };
        let text = self.text.ok_or_else(|| malformed("missing field `text`".into()))?;
        let source = self
            .source
            .ok_or_else(|| malformed("missing field `source`".into()))?;
        let source: Source = source.parse().map_err(|e: CorpusError| malformed(e.to_string()))?;
        let template = match non_empty(self.template) {
            Some(t) => Some(t.parse().map_err(|e: CorpusError| malformed(e.to_string()))?),
            None => None,
        };
        let record = PoemRecord {
            id: non_empty(self.id).unwrap_or(fallback_id),
            text: normalize_newlines(&text),
            source,
            style: non_empty(self.style).unwrap_or_else(|| UNSPECIFIED_STYLE.to_string()),
            subject: non_empty(self.subject),
            template,
            title: non_empty(self.title),
        };
        record.validate().map_err(malformed)?;
        Ok(record)
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".to_string())
}

/// Reads a corpus from `path`.
pub fn load_corpus(path: &Path, format: InputFormat, options: &LoadOptions) -> Result<Corpus, CorpusError> {
    let records = match format {
        InputFormat::JsonLines => read_jsonl(path)?,
        InputFormat::Csv => read_csv(path)?,
        InputFormat::TextDirectory => read_text_dir(path, options)?,
    };
    let label = options.label.clone().unwrap_or_else(|| file_stem(path));
    let mut seen = HashSet::new();
    for (location, record) in &records {
        if !seen.insert(record.id.as_str()) {
            return Err(CorpusError::DuplicateId {
                location: location.clone(),
                id: record.id.clone(),
            });
        }
    }
    Ok(Corpus {
        label,
        records: records.into_iter().map(|(_, r)| r).collect(),
    })
}

fn read_jsonl(path: &Path) -> Result<Vec<(String, PoemRecord)>, CorpusError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let stem = file_stem(path);
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let location = format!("{}:{}", path.display(), i + 1);
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
            location: location.clone(),
            message: e.to_string(),
        })?;
        let record = raw.into_record(&location, format!("{stem}-{}", i + 1))?;
        out.push((location, record));
    }
    Ok(out)
}

fn read_csv(path: &Path) -> Result<Vec<(String, PoemRecord)>, CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CorpusError::Malformed {
            location: path.display().to_string(),
            message: e.to_string(),
        })?;
    let stem = file_stem(path);
    let mut out = Vec::new();
    for (i, row) in reader.deserialize::<RawRecord>().enumerate() {
        let raw = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            CorpusError::Malformed {
                location: format!("{}:{}", path.display(), line),
                message: e.to_string(),
            }
        })?;
        // header is line 1; without a position the record ordinal is the best we have
        let location = format!("{} record {}", path.display(), i + 1);
        let record = raw.into_record(&location, format!("{stem}-{}", i + 1))?;
        out.push((location, record));
    }
    Ok(out)
}

fn read_text_dir(dir: &Path, options: &LoadOptions) -> Result<Vec<(String, PoemRecord)>, CorpusError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("txt")))
        .collect();
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        let location = path.display().to_string();
        let text = String::from_utf8(bytes).map_err(|e| CorpusError::Malformed {
            location: location.clone(),
            message: format!("not UTF-8: {e}"),
        })?;
        let record = PoemRecord {
            id: file_stem(&path),
            text: normalize_newlines(&text),
            source: options.source.clone(),
            style: options
                .style
                .clone()
                .unwrap_or_else(|| UNSPECIFIED_STYLE.to_string()),
            subject: None,
            template: options.template,
            title: None,
        };
        record.validate().map_err(|message| CorpusError::Malformed {
            location: location.clone(),
            message,
        })?;
        out.push((location, record));
    }
    Ok(out)
}

/// Serializes records as JSON Lines.
pub fn write_jsonl<W: Write>(records: &[PoemRecord], mut out: W) -> io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

fn date_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        let month = r"(?:jan|feb|mar|apr|may|jun|jul|aug|sep|sept|oct|nov|dec)[a-z]*\.?";
        let pattern = format!(
            r"(?ix)^(?:
                \d{{1,2}}[/.\-]\d{{1,2}}[/.\-]\d{{2,4}}
              | (?:{month},?\s+)?(?:\d{{1,2}}(?:st|nd|rd|th)?,?\s+)?(?:{month},?\s+)?\d{{4}}(?:\s*[\-–]\s*\d{{2,4}})?
            )\.?$"
        );
        Regex::new(&pattern).expect("date pattern compiles")
    })
}

/// Whether a line looks like a dedication, date, or epigraph lead-in.
pub fn is_prefatory_line(line: &str) -> bool {
    let t = line.trim();
    if t.is_empty() {
        return false;
    }
    let lower = t.to_lowercase();
    t.ends_with(':') || lower.starts_with("for ") || lower.starts_with("after ") || date_re().is_match(t)
}

/// Lines of slack allowed above the conventional length before a poem is
/// left untouched.
pub const PREFATORY_WINDOW: usize = 10;

/// Drops leading prefatory lines from a poem that runs slightly longer than
/// `expected_lines`, stopping at the expected length or at the first line that
/// does not look prefatory.
pub fn strip_prefatory(poem: &PoemRecord, expected_lines: Option<usize>) -> PoemRecord {
    let Some(expected) = expected_lines else {
        return poem.clone();
    };
    let floor = expected.max(1);
    let lines: Vec<&str> = poem.text.split('\n').collect();
    let mut remaining = lines.iter().filter(|l| !l.trim().is_empty()).count();
    if remaining <= floor || remaining - floor > PREFATORY_WINDOW {
        return poem.clone();
    }
    let mut start = 0;
    let mut removed = false;
    while remaining > floor {
        let Some(next) = (start..lines.len()).find(|&i| !lines[i].trim().is_empty()) else {
            break;
        };
        if !is_prefatory_line(lines[next]) {
            break;
        }
        start = next + 1;
        remaining -= 1;
        removed = true;
    }
    if !removed {
        return poem.clone();
    }
    let body_start = (start..lines.len())
        .find(|&i| !lines[i].trim().is_empty())
        .unwrap_or(lines.len());
    PoemRecord {
        text: lines[body_start..].join("\n"),
        ..poem.clone()
    }
}

/// Applies [`strip_prefatory`] to the human-authored fixed-form poems of a
/// corpus, using each style's conventional length.
pub fn strip_fixed_form_prefatory(corpus: &Corpus) -> Corpus {
    Corpus {
        label: corpus.label.clone(),
        records: corpus
            .records
            .iter()
            .map(|r| match r.source {
                Source::Human => strip_prefatory(r, taxonomy::conventional_length(&r.style)),
                _ => r.clone(),
            })
            .collect(),
    }
}
