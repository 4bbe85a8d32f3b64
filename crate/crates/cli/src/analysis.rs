//! Turns loaded corpora into report tables.
//!
//! Per-poem work runs on the rayon pool; every aggregation walks poems in
//! corpus order so the tables do not depend on the thread count.

use std::collections::HashSet;

use anyhow::{Context, Result};
use poetics_core::lexical::{
    first_word_distribution, first_word_logodds, logodds, pronoun_profile, touchstone_coverage, DocFreqMode,
    LexicalError, PronounCategory, PronounNormalization, TouchstoneGroup,
};
use poetics_core::meter::{iambic_score, MeterError, MeterStats, MeterVerdict};
use poetics_core::rhyme::{annotate_rhymes, RhymeAnnotation, RhymeStats};
use poetics_core::stats::{tukey_summary, TukeySummary};
use poetics_core::structure::{occupancy_heatmap, parse_structure, QuatrainStats};
use poetics_core::{Corpus, Dictionary, LogOddsConfig, LogOddsResult, OccupancyGrid, PoemStructure};
use rayon::prelude::*;

use crate::tables::{Cell, Table};

pub const ALL_STYLES: &str = "ALL";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Lengths,
    Quatrains,
    Rhyme,
    RhymePoems,
    Meter,
    MeterPoems,
    Pronouns,
    Touchstones,
    FirstWords,
    LogOdds,
    FirstWordLogOdds,
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub min_docs: usize,
    pub doc_freq_mode: DocFreqMode,
    pub top_k: usize,
    pub threshold: f64,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub exclude_subjects: Option<HashSet<String>>,
    pub normalization: PronounNormalization,
    pub touchstones: Vec<TouchstoneGroup>,
}

struct PoemFacts {
    structure: PoemStructure,
    rhyme: Option<RhymeAnnotation>,
    meter: Option<MeterVerdict>,
}

/// One corpus with its per-poem analyses.
struct Analyzed<'a> {
    corpus: &'a Corpus,
    facts: Vec<PoemFacts>,
    /// `ALL` first, then each style in sorted order, with member indices.
    groups: Vec<(String, Vec<usize>)>,
}

fn style_groups(corpus: &Corpus) -> Vec<(String, Vec<usize>)> {
    let mut styles = corpus.styles();
    styles.sort();
    let mut groups = vec![(ALL_STYLES.to_string(), (0..corpus.len()).collect())];
    for style in styles {
        let members = (0..corpus.len()).filter(|&i| corpus.records[i].style == style).collect();
        groups.push((style, members));
    }
    groups
}

fn analyze_poems<'a>(
    corpus: &'a Corpus,
    dict: &Dictionary,
    settings: &Settings,
    rhyme: bool,
    meter: bool,
) -> Result<Analyzed<'a>> {
    let facts = corpus
        .records
        .par_iter()
        .map(|r| -> Result<PoemFacts> {
            let structure = parse_structure(r).with_context(|| format!("corpus {}", corpus.label))?;
            let rhyme = rhyme.then(|| annotate_rhymes(&structure, dict));
            let meter = if meter {
                match iambic_score(&structure, dict, settings.threshold) {
                    Ok(v) => Some(v),
                    Err(MeterError::NoScannableLines) => None,
                    Err(e) => return Err(e).with_context(|| format!("poem {}", r.id)),
                }
            } else {
                None
            };
            Ok(PoemFacts { structure, rhyme, meter })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Analyzed {
        corpus,
        facts,
        groups: style_groups(corpus),
    })
}

fn label_cells(corpus: &str, style: &str) -> Vec<Cell> {
    vec![corpus.into(), style.into()]
}

fn join_f64(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
}

fn lengths_table(sets: &[Analyzed]) -> Table {
    let mut t = Table::new(
        "lengths",
        &[
            "corpus",
            "style",
            "poems",
            "median",
            "q1",
            "q3",
            "whisker_low",
            "whisker_high",
            "outliers",
            "outlier_values",
        ],
    );
    for a in sets {
        for (style, members) in &a.groups {
            let counts: Vec<f64> = members.iter().map(|&i| a.facts[i].structure.line_count as f64).collect();
            let Some(s) = tukey_summary(&counts) else { continue };
            let mut row = label_cells(&a.corpus.label, style);
            row.extend([
                s.n.into(),
                s.median.into(),
                s.q1.into(),
                s.q3.into(),
                s.whisker_low.into(),
                s.whisker_high.into(),
                s.outliers.len().into(),
                join_f64(&s.outliers).into(),
            ]);
            t.push(row);
        }
    }
    t
}

/// Line-count summaries per style, for plotting.
pub fn length_summaries(corpus: &Corpus) -> Result<Vec<(String, TukeySummary<f64>)>> {
    let mut out = Vec::new();
    for (style, members) in style_groups(corpus) {
        let counts = members
            .iter()
            .map(|&i| parse_structure(&corpus.records[i]).map(|s| s.line_count as f64))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(s) = tukey_summary(&counts) {
            out.push((style, s));
        }
    }
    Ok(out)
}

fn quatrains_table(sets: &[Analyzed]) -> Table {
    let mut t = Table::new(
        "quatrains",
        &[
            "corpus",
            "style",
            "poems",
            "poems_with_quatrain",
            "poems_with_quatrain_pct",
            "stanzas",
            "quatrain_stanzas",
            "quatrain_stanza_pct",
        ],
    );
    for a in sets {
        for (style, members) in &a.groups {
            let q = QuatrainStats::from_structures(members.iter().map(|&i| &a.facts[i].structure));
            let mut row = label_cells(&a.corpus.label, style);
            row.extend([
                q.poems.into(),
                q.poems_with_quatrain.into(),
                q.poems_with_quatrain_pct.into(),
                q.stanzas.into(),
                q.quatrain_stanzas.into(),
                q.quatrain_stanza_pct.into(),
            ]);
            t.push(row);
        }
    }
    t
}

fn rhyme_table(sets: &[Analyzed]) -> Table {
    let mut t = Table::new(
        "rhyme",
        &[
            "corpus",
            "style",
            "poems",
            "poems_with_rhyme",
            "poems_with_rhyme_pct",
            "avg_rhymed_fraction",
            "pooled_rhymed_fraction",
        ],
    );
    for a in sets {
        for (style, members) in &a.groups {
            let s = RhymeStats::from_annotations(members.iter().filter_map(|&i| a.facts[i].rhyme.as_ref()));
            let mut row = label_cells(&a.corpus.label, style);
            row.extend([
                s.poems.into(),
                s.poems_with_rhyme.into(),
                s.poems_with_rhyme_pct.into(),
                s.avg_rhymed_fraction.into(),
                s.pooled_rhymed_fraction.into(),
            ]);
            t.push(row);
        }
    }
    t
}

fn rhyme_poems_table(sets: &[Analyzed]) -> Table {
    let mut t = Table::new(
        "rhyme_poems",
        &[
            "corpus",
            "style",
            "id",
            "lines",
            "rhymed_lines",
            "rhymed_fraction",
            "schemes",
            "out_of_vocabulary",
        ],
    );
    for a in sets {
        for (r, f) in a.corpus.records.iter().zip(&a.facts) {
            let Some(ann) = &f.rhyme else { continue };
            let schemes: Vec<String> = ann
                .schemes_found
                .iter()
                .map(|m| format!("{}@{}", m.scheme, m.start + 1))
                .collect();
            let mut row = label_cells(&a.corpus.label, &r.style);
            row.extend([
                r.id.as_str().into(),
                ann.rhymed_line_flags.len().into(),
                ann.rhymed_lines().into(),
                ann.rhymed_fraction.into(),
                schemes.join(";").into(),
                ann.out_of_vocabulary.len().into(),
            ]);
            t.push(row);
        }
    }
    t
}

fn meter_table(sets: &[Analyzed]) -> Table {
    let mut t = Table::new(
        "meter",
        &[
            "corpus",
            "style",
            "poems",
            "poems_scanned",
            "poems_dominant",
            "pct_dominant_iambic",
            "mean_iambic_score",
        ],
    );
    for a in sets {
        for (style, members) in &a.groups {
            let s = MeterStats::from_verdicts(members.iter().map(|&i| a.facts[i].meter.as_ref()));
            let mut row = label_cells(&a.corpus.label, style);
            row.extend([
                s.poems.into(),
                s.poems_scanned.into(),
                s.poems_dominant.into(),
                s.pct_dominant_iambic.into(),
                s.mean_iambic_score.into(),
            ]);
            t.push(row);
        }
    }
    t
}

fn meter_poems_table(sets: &[Analyzed]) -> Table {
    let mut t = Table::new(
        "meter_poems",
        &["corpus", "style", "id", "lines", "scanned_lines", "iambic_score", "dominant"],
    );
    for a in sets {
        for (r, f) in a.corpus.records.iter().zip(&a.facts) {
            let v = f.meter.as_ref();
            let mut row = label_cells(&a.corpus.label, &r.style);
            row.extend([
                r.id.as_str().into(),
                f.structure.line_count.into(),
                v.map_or(0, |v| v.line_scores.iter().flatten().count()).into(),
                v.map(|v| v.iambic_score).into(),
                v.map(|v| if v.dominant { "yes" } else { "no" }).into(),
            ]);
            t.push(row);
        }
    }
    t
}

fn style_subset(a: &Analyzed, style: &str) -> Corpus {
    if style == ALL_STYLES {
        a.corpus.clone()
    } else {
        a.corpus.filtered(|r| r.style == style)
    }
}

fn pronouns_table(sets: &[Analyzed], settings: &Settings) -> Result<Table> {
    let mut t = Table::new(
        "pronouns",
        &["corpus", "style", "category", "count", "tokens", "per_100_words"],
    );
    for a in sets {
        for (style, _) in &a.groups {
            let subset = style_subset(a, style);
            let profile = match pronoun_profile(&subset, settings.exclude_subjects.as_ref(), settings.normalization) {
                Ok(p) => p,
                // A style made up entirely of excluded subjects has no row.
                Err(LexicalError::EmptyAfterExclusion) if style != ALL_STYLES => continue,
                Err(e) => return Err(e).with_context(|| format!("pronouns for corpus {}", a.corpus.label)),
            };
            for c in PronounCategory::ALL {
                let mut row = label_cells(&a.corpus.label, style);
                row.extend([
                    c.label().into(),
                    profile.counts[&c].into(),
                    profile.total_tokens.into(),
                    profile.frequency(c).into(),
                ]);
                t.push(row);
            }
        }
    }
    Ok(t)
}

fn touchstones_table(sets: &[Analyzed], settings: &Settings) -> Table {
    let mut t = Table::new(
        "touchstones",
        &["corpus", "style", "group", "patterns", "poems", "pct_poems"],
    );
    for a in sets {
        for (style, members) in &a.groups {
            let subset = style_subset(a, style);
            let coverage = touchstone_coverage(&subset, &settings.touchstones);
            for (g, pct) in settings.touchstones.iter().zip(coverage) {
                let mut row = label_cells(&a.corpus.label, style);
                row.extend([
                    g.name.as_str().into(),
                    g.patterns.join(",").into(),
                    members.len().into(),
                    pct.into(),
                ]);
                t.push(row);
            }
        }
    }
    t
}

fn first_words_table(sets: &[Analyzed], top_k: usize) -> Table {
    let mut t = Table::new("first_words", &["corpus", "style", "rank", "word", "poems"]);
    for a in sets {
        for (rank, (word, n)) in first_word_distribution(a.corpus).into_iter().take(top_k).enumerate() {
            let mut row = label_cells(&a.corpus.label, ALL_STYLES);
            row.extend([(rank + 1).into(), word.into(), n.into()]);
            t.push(row);
        }
    }
    t
}

const LOGODDS_COLUMNS: [&str; 12] = [
    "corpus",
    "style",
    "reference",
    "rank",
    "word",
    "z_score",
    "delta",
    "variance",
    "count",
    "reference_count",
    "docs",
    "reference_docs",
];

/// Top-k words favoring each side of every corpus pair. Rows for the second
/// corpus are reported from its own side (signs flipped, counts swapped).
fn push_logodds_rows(t: &mut Table, a: &str, b: &str, results: &[LogOddsResult], top_k: usize) {
    let mut row = |corpus: &str, reference: &str, rank: usize, r: &LogOddsResult, flip: bool| {
        // Subtracting from zero keeps a flipped 0.0 from printing as -0.
        let side = |v: f64| if flip { 0.0 - v } else { v };
        let (c, rc, d, rd) = if flip {
            (r.count_b, r.count_a, r.doc_freq_b, r.doc_freq_a)
        } else {
            (r.count_a, r.count_b, r.doc_freq_a, r.doc_freq_b)
        };
        t.push(vec![
            corpus.into(),
            ALL_STYLES.into(),
            reference.into(),
            rank.into(),
            r.word.as_str().into(),
            side(r.z_score).into(),
            side(r.delta).into(),
            r.variance.into(),
            c.into(),
            rc.into(),
            d.into(),
            rd.into(),
        ]);
    };
    for (i, r) in results.iter().take(top_k).enumerate() {
        row(a, b, i + 1, r, false);
    }
    for (i, r) in results.iter().rev().take(top_k).enumerate() {
        row(b, a, i + 1, r, true);
    }
}

fn logodds_tables(sets: &[Analyzed], settings: &Settings, first_words: bool) -> Result<Table> {
    let config = LogOddsConfig {
        min_docs: settings.min_docs,
        doc_freq_mode: settings.doc_freq_mode,
        ..LogOddsConfig::default()
    };
    let name = if first_words { "first_word_logodds" } else { "logodds" };
    let mut t = Table::new(name, &LOGODDS_COLUMNS);
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            let (la, lb) = (&a.corpus.label, &b.corpus.label);
            let results = if first_words {
                match first_word_logodds(a.corpus, b.corpus, &config) {
                    Ok(r) => r,
                    // Opening words are sparse; a thin vocabulary leaves the table empty.
                    Err(e @ (LexicalError::EmptyVocabulary { .. } | LexicalError::DegenerateVocabulary(_))) => {
                        log::warn!("first-word log-odds {la} vs {lb}: {e}");
                        continue;
                    }
                    Err(e) => return Err(e).with_context(|| format!("first-word log-odds {la} vs {lb}")),
                }
            } else {
                logodds(a.corpus, b.corpus, &config).with_context(|| format!("log-odds {la} vs {lb}"))?
            };
            push_logodds_rows(&mut t, la, lb, &results, settings.top_k);
        }
    }
    Ok(t)
}

/// Builds the requested table families, in the order given.
pub fn build_tables(corpora: &[Corpus], dict: &Dictionary, settings: &Settings, families: &[Family]) -> Result<Vec<Table>> {
    let needs = |fs: &[Family]| families.iter().any(|f| fs.contains(f));
    let rhyme = needs(&[Family::Rhyme, Family::RhymePoems]);
    let meter = needs(&[Family::Meter, Family::MeterPoems]);
    let sets = corpora
        .iter()
        .map(|c| analyze_poems(c, dict, settings, rhyme, meter))
        .collect::<Result<Vec<_>>>()?;
    families
        .iter()
        .map(|f| match f {
            Family::Lengths => Ok(lengths_table(&sets)),
            Family::Quatrains => Ok(quatrains_table(&sets)),
            Family::Rhyme => Ok(rhyme_table(&sets)),
            Family::RhymePoems => Ok(rhyme_poems_table(&sets)),
            Family::Meter => Ok(meter_table(&sets)),
            Family::MeterPoems => Ok(meter_poems_table(&sets)),
            Family::Pronouns => pronouns_table(&sets, settings),
            Family::Touchstones => Ok(touchstones_table(&sets, settings)),
            Family::FirstWords => Ok(first_words_table(&sets, settings.top_k)),
            Family::LogOdds => logodds_tables(&sets, settings, false),
            Family::FirstWordLogOdds => logodds_tables(&sets, settings, true),
        })
        .collect()
}

pub fn grids(corpora: &[Corpus], settings: &Settings) -> Result<Vec<(String, OccupancyGrid)>> {
    corpora
        .par_iter()
        .map(|c| {
            occupancy_heatmap(c, settings.grid_rows, settings.grid_cols)
                .map(|g| (c.label.clone(), g))
                .map_err(Into::into)
        })
        .collect()
}
