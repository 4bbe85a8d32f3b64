//! Line and stanza structure of poems, length distributions, quatrain counts
//! and positional occupancy grids.

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{Corpus, PoemRecord};
use crate::lexical::word_count;
use crate::scalar::Scalar;
use crate::stats::{tukey_summary, TukeySummary};

#[derive(Debug, Error, PartialEq)]
pub enum StructureError {
    #[error("empty poem")]
    EmptyPoem,
    #[error("poem {id}: empty poem")]
    EmptyRecord { id: String },
    #[error("no poems match style {0:?}")]
    NoMatchingPoems(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("grid dimensions must be at least 1x1, got {rows}x{cols}")]
    BadGrid { rows: usize, cols: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PoemStructure {
    pub lines: Vec<String>,
    pub stanza_sizes: Vec<usize>,
    pub line_count: usize,
    pub word_count: usize,
}

impl PoemStructure {
    /// Stanzas are maximal runs of non-blank lines; a line is blank when it is
    /// empty after trimming whitespace.
    pub fn parse(text: &str) -> Result<Self, StructureError> {
        let mut lines = Vec::new();
        let mut stanza_sizes = Vec::new();
        let mut run = 0usize;
        for raw in text.lines() {
            if raw.trim().is_empty() {
                if run > 0 {
                    stanza_sizes.push(run);
                    run = 0;
                }
            } else {
                lines.push(raw.to_string());
                run += 1;
            }
        }
        if run > 0 {
            stanza_sizes.push(run);
        }
        if lines.is_empty() {
            return Err(StructureError::EmptyPoem);
        }
        let word_count = lines.iter().map(|l| word_count(l)).sum();
        Ok(PoemStructure {
            line_count: lines.len(),
            lines,
            stanza_sizes,
            word_count,
        })
    }

    pub fn quatrains(&self) -> usize {
        self.stanza_sizes.iter().filter(|s| **s == 4).count()
    }
}

/// Non-blank lines of a poem, as [`PoemStructure::parse`] counts them.
pub fn count_lines(text: &str) -> usize {
    text.lines().filter(|l| !l.trim().is_empty()).count()
}

pub fn parse_structure(poem: &PoemRecord) -> Result<PoemStructure, StructureError> {
    PoemStructure::parse(&poem.text).map_err(|_| StructureError::EmptyRecord { id: poem.id.clone() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuatrainStats {
    pub poems: usize,
    pub poems_with_quatrain: usize,
    pub stanzas: usize,
    pub quatrain_stanzas: usize,
    pub poems_with_quatrain_pct: f64,
    pub quatrain_stanza_pct: f64,
}

impl QuatrainStats {
    pub fn from_structures<'a>(structures: impl IntoIterator<Item = &'a PoemStructure>) -> Self {
        let (mut poems, mut with, mut stanzas, mut quatrains) = (0, 0, 0, 0);
        for s in structures {
            poems += 1;
            let q = s.quatrains();
            if q > 0 {
                with += 1;
            }
            quatrains += q;
            stanzas += s.stanza_sizes.len();
        }
        let pct = |n: usize, d: usize| if d == 0 { 0.0 } else { n as f64 / d as f64 * 100.0 };
        QuatrainStats {
            poems,
            poems_with_quatrain: with,
            stanzas,
            quatrain_stanzas: quatrains,
            poems_with_quatrain_pct: pct(with, poems),
            quatrain_stanza_pct: pct(quatrains, stanzas),
        }
    }
}

pub fn quatrain_stats(corpus: &Corpus) -> Result<QuatrainStats, StructureError> {
    if corpus.is_empty() {
        return Err(StructureError::EmptyCorpus);
    }
    let structures = corpus
        .records
        .iter()
        .map(parse_structure)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(QuatrainStats::from_structures(&structures))
}

/// Box summary of poem lengths in lines.
pub type LengthSummary<T> = TukeySummary<T>;

/// Tukey summary of line counts, optionally restricted to one style.
pub fn length_summary<T: Scalar>(
    corpus: &Corpus,
    style_filter: Option<&str>,
) -> Result<LengthSummary<T>, StructureError> {
    let counts = corpus
        .records
        .iter()
        .filter(|r| style_filter.is_none_or(|s| r.style == s))
        .map(|r| match count_lines(&r.text) {
            0 => Err(StructureError::EmptyRecord { id: r.id.clone() }),
            n => Ok(T::from_count(n)),
        })
        .collect::<Result<Vec<T>, _>>()?;
    tukey_summary(&counts).ok_or_else(|| match style_filter {
        Some(s) => StructureError::NoMatchingPoems(s.to_string()),
        None => StructureError::EmptyCorpus,
    })
}

pub const DEFAULT_GRID_ROWS: usize = 60;
pub const DEFAULT_GRID_COLS: usize = 80;
const TAB_WIDTH: usize = 4;

/// Fraction of poems with a non-whitespace character at each (line, column)
/// cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OccupancyGrid<T> {
    pub rows: usize,
    pub cols: usize,
    pub poems: usize,
    pub cells: Vec<Vec<T>>,
}

impl<T: Scalar> OccupancyGrid<T> {
    pub fn get(&self, row: usize, col: usize) -> T {
        self.cells[row][col]
    }

    /// `rows` lines of `cols` comma-separated decimals.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        for row in &self.cells {
            let line: Vec<String> = row
                .iter()
                .map(|v| format!("{:.6}", v.to_f64().unwrap_or(f64::NAN)))
                .collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Per-poem occupancy mask. Leading and trailing blank lines are dropped so
/// the grid starts at the first line of verse; interior blank lines stay as
/// empty rows.
fn occupancy_mask(text: &str, rows: usize, cols: usize) -> Vec<Vec<bool>> {
    let lines: Vec<&str> = text.lines().collect();
    let first = lines.iter().position(|l| !l.trim().is_empty());
    let last = lines.iter().rposition(|l| !l.trim().is_empty());
    let body = match (first, last) {
        (Some(f), Some(l)) => &lines[f..=l],
        _ => &[][..],
    };
    let mut mask = vec![vec![false; cols]; rows];
    for (row, line) in body.iter().take(rows).enumerate() {
        let mut col = 0usize;
        for ch in line.chars() {
            let width = if ch == '\t' { TAB_WIDTH } else { 1 };
            if !ch.is_whitespace() && col < cols {
                mask[row][col] = true;
            }
            col += width;
            if col >= cols {
                break;
            }
        }
    }
    mask
}

pub fn occupancy_heatmap<T: Scalar>(
    corpus: &Corpus,
    rows: usize,
    cols: usize,
) -> Result<OccupancyGrid<T>, StructureError> {
    if rows == 0 || cols == 0 {
        return Err(StructureError::BadGrid { rows, cols });
    }
    let mut counts = vec![vec![0usize; cols]; rows];
    for r in &corpus.records {
        for (acc, mask) in counts.iter_mut().zip(occupancy_mask(&r.text, rows, cols)) {
            for (c, m) in acc.iter_mut().zip(mask) {
                *c += usize::from(m);
            }
        }
    }
    let n = corpus.len();
    let cells = counts
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|c| if n == 0 { T::zero() } else { T::ratio(c, n) })
                .collect()
        })
        .collect();
    Ok(OccupancyGrid {
        rows,
        cols,
        poems: n,
        cells,
    })
}
