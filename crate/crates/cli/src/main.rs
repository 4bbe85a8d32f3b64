//! `poetics`: analyze and compare poetry corpora, or collect new ones.

mod analysis;
mod generate;
mod plots;
mod tables;

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use poetics_core::corpus::strip_fixed_form_prefatory;
use poetics_core::lexical::stopwords::STOPWORDS_VERSION;
use poetics_core::lexical::{DocFreqMode, PronounNormalization, TouchstoneGroup};
use poetics_core::meter::DEFAULT_DOMINANCE_THRESHOLD;
use poetics_core::structure::{DEFAULT_GRID_COLS, DEFAULT_GRID_ROWS};
use poetics_core::taxonomy::subject_group;
use poetics_core::{load_corpus, Corpus, Dictionary, InputFormat, LoadOptions, Source};
use serde::Serialize;

use analysis::{Family, Settings};
use tables::Table;

/// Outcome of a failed run: usage errors exit with 2, everything else with 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Run(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Run(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "poetics", version, about = "Structure, rhyme, meter and vocabulary statistics for poetry corpora")]
struct Cli {
    /// CMUdict-format pronouncing dictionary [default: bundled subset].
    #[arg(long, global = true)]
    dict: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Format of the per-table files under <out>/tables.
    #[arg(long, global = true, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,
    /// Worker threads for per-poem analysis [default: all cores].
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Collect completions for the prompt grid from a chat-completions endpoint.
    Generate(generate::GenerateArgs),
    /// Run every analysis and write the full report.
    Analyze(AnalyzeArgs),
    /// Poem lengths, stanza shapes and occupancy grids.
    Structure(CorpusArgs),
    /// End-rhyme detection.
    Rhyme(CorpusArgs),
    /// Approximate iambic scansion.
    Meter(CorpusArgs),
    /// Pronoun rates, touchstone words and opening words.
    Lexstats(CorpusArgs),
    /// Weighted log-odds between corpora.
    Compare(CorpusArgs),
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    /// Also compare every pair of corpora with weighted log-odds.
    #[arg(long)]
    compare: bool,
}

#[derive(Debug, Args)]
struct CorpusArgs {
    /// Corpus as PATH or LABEL=PATH (JSON Lines, CSV, or a directory of .txt files). Repeatable.
    #[arg(long = "corpus", required = true, value_name = "[LABEL=]PATH")]
    corpora: Vec<String>,
    /// Input format, if it cannot be told from the path.
    #[arg(long, value_parser = parse_input_format)]
    input_format: Option<InputFormat>,
    /// Source for text-directory corpora.
    #[arg(long, default_value = "human")]
    source: Source,
    /// Style for text-directory corpora.
    #[arg(long)]
    style: Option<String>,
    /// Keep leading dedications and dates on human fixed-form poems.
    #[arg(long)]
    no_strip_prefatory: bool,
    /// Subject group left out of pronoun rates: general, occasions or holidays. Repeatable.
    #[arg(long, value_name = "GROUP")]
    exclude_subject_group: Vec<String>,
    /// Pronoun rates as the mean of per-poem rates instead of pooled tokens.
    #[arg(long)]
    per_poem_pronouns: bool,
    /// Touchstone group as NAME=pat,pat* (repeatable) [default: the two built-in groups].
    #[arg(long = "touchstone", value_name = "SPEC")]
    touchstones: Vec<String>,
    /// Minimum number of poems a word must appear in for log-odds.
    #[arg(long, default_value_t = 10)]
    min_docs: usize,
    /// Apply --min-docs within each corpus rather than across both.
    #[arg(long)]
    min_docs_each: bool,
    /// Rows per direction in log-odds and first-word tables.
    #[arg(long, default_value_t = 25)]
    top_k: usize,
    /// Iambic score at or above which a poem counts as iambic.
    #[arg(long, default_value_t = DEFAULT_DOMINANCE_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_ROWS)]
    grid_rows: usize,
    #[arg(long, default_value_t = DEFAULT_GRID_COLS)]
    grid_cols: usize,
    /// Also write SVG box plots and heatmaps under <out>/plots.
    #[arg(long)]
    emit_plots: bool,
}

fn parse_input_format(s: &str) -> Result<InputFormat, String> {
    s.parse()
}

#[derive(Debug, Serialize)]
struct CorpusMeta {
    label: String,
    path: String,
    poems: usize,
    styles: Vec<String>,
}

/// Flags that change the numbers. Thread count and output location are left
/// out so that reports from different runs compare byte for byte.
#[derive(Debug, Serialize)]
struct FlagsMeta {
    command: &'static str,
    format: TableFormat,
    compare: bool,
    strip_prefatory: bool,
    exclude_subject_groups: Vec<String>,
    pronoun_normalization: &'static str,
    touchstones: Vec<TouchstoneGroup>,
    min_docs: usize,
    min_docs_each: bool,
    top_k: usize,
    threshold: f64,
    grid_rows: usize,
    grid_cols: usize,
    emit_plots: bool,
}

#[derive(Debug, Serialize)]
struct Metadata {
    tool: &'static str,
    version: &'static str,
    dictionary: String,
    dictionary_sha256: String,
    dictionary_entries: usize,
    stopwords: &'static str,
    flags: FlagsMeta,
}

#[derive(Serialize)]
struct Report<'a> {
    metadata: Metadata,
    corpora: Vec<CorpusMeta>,
    tables: TableMap<'a>,
}

struct TableMap<'a>(&'a [Table]);

impl Serialize for TableMap<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for t in self.0 {
            map.serialize_entry(t.name, t)?;
        }
        map.end()
    }
}

fn split_corpus_arg(arg: &str) -> (Option<String>, PathBuf) {
    match arg.split_once('=') {
        Some((label, path)) if !label.is_empty() && !Path::new(arg).exists() => {
            (Some(label.to_string()), PathBuf::from(path))
        }
        _ => (None, PathBuf::from(arg)),
    }
}

fn load_corpora(args: &CorpusArgs) -> Result<Vec<(Corpus, String)>, Failure> {
    let mut out = Vec::new();
    let mut labels = HashSet::new();
    for arg in &args.corpora {
        let (label, path) = split_corpus_arg(arg);
        if !path.exists() {
            return Err(Failure::Usage(format!("corpus path {} does not exist", path.display())));
        }
        let format = match args.input_format {
            Some(f) => f,
            None => InputFormat::detect(&path).map_err(|e| Failure::Usage(e.to_string()))?,
        };
        let options = LoadOptions {
            label,
            source: args.source.clone(),
            style: args.style.clone(),
            template: None,
        };
        let mut corpus = load_corpus(&path, format, &options).map_err(anyhow::Error::from)?;
        if !args.no_strip_prefatory {
            corpus = strip_fixed_form_prefatory(&corpus);
        }
        if !labels.insert(corpus.label.clone()) {
            return Err(Failure::Usage(format!(
                "two corpora are labelled {:?}; use LABEL=PATH",
                corpus.label
            )));
        }
        out.push((corpus, path.display().to_string()));
    }
    Ok(out)
}

fn settings(args: &CorpusArgs) -> Result<Settings, Failure> {
    let mut excluded = HashSet::new();
    for g in &args.exclude_subject_group {
        let subjects = subject_group(g).ok_or_else(|| Failure::Usage(format!("unknown subject group {g:?}")))?;
        excluded.extend(subjects.iter().map(|s| s.to_string()));
    }
    let touchstones = if args.touchstones.is_empty() {
        vec![TouchstoneGroup::gpt35_default(), TouchstoneGroup::gpt4_default()]
    } else {
        args.touchstones.iter().map(|s| TouchstoneGroup::parse(s)).collect()
    };
    if args.grid_rows == 0 || args.grid_cols == 0 {
        return Err(Failure::Usage("grid dimensions must be positive".into()));
    }
    Ok(Settings {
        min_docs: args.min_docs,
        doc_freq_mode: if args.min_docs_each {
            DocFreqMode::EachCorpus
        } else {
            DocFreqMode::Pooled
        },
        top_k: args.top_k,
        threshold: args.threshold,
        grid_rows: args.grid_rows,
        grid_cols: args.grid_cols,
        exclude_subjects: (!excluded.is_empty()).then_some(excluded),
        normalization: if args.per_poem_pronouns {
            PronounNormalization::PerPoemMean
        } else {
            PronounNormalization::Pooled
        },
        touchstones,
    })
}

fn load_dictionary(path: Option<&Path>) -> Result<(Dictionary, String)> {
    match path {
        Some(p) => {
            let d = Dictionary::load(p).with_context(|| format!("loading dictionary {}", p.display()))?;
            if d.skipped_lines() > 0 {
                log::warn!("{}: skipped {} unparseable lines", p.display(), d.skipped_lines());
            }
            Ok((d, p.display().to_string()))
        }
        None => Ok((Dictionary::bundled(), "bundled".to_string())),
    }
}

fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn run_analysis(cli: &Cli, command: &'static str, args: &CorpusArgs, compare: bool) -> Result<(), Failure> {
    let mut families = match command {
        "analyze" => vec![
            Family::Lengths,
            Family::Quatrains,
            Family::Rhyme,
            Family::Meter,
            Family::Pronouns,
            Family::Touchstones,
        ],
        "structure" => vec![Family::Lengths, Family::Quatrains],
        "rhyme" => vec![Family::Rhyme, Family::RhymePoems],
        "meter" => vec![Family::Meter, Family::MeterPoems],
        "lexstats" => vec![Family::Pronouns, Family::Touchstones, Family::FirstWords],
        "compare" => vec![],
        other => unreachable!("no analysis for {other}"),
    };
    if compare {
        families.extend([Family::LogOdds, Family::FirstWordLogOdds]);
    }
    let with_grids = matches!(command, "analyze" | "structure");

    let settings = settings(args)?;
    let loaded = load_corpora(args)?;
    if compare && loaded.len() < 2 {
        return Err(Failure::Usage("comparison needs at least two --corpus arguments".into()));
    }
    let (dict, dict_name) = load_dictionary(cli.dict.as_deref())?;
    let corpora: Vec<Corpus> = loaded.iter().map(|(c, _)| c.clone()).collect();

    let tables = analysis::build_tables(&corpora, &dict, &settings, &families)?;
    let grids = if with_grids {
        analysis::grids(&corpora, &settings)?
    } else {
        Vec::new()
    };

    let report = Report {
        metadata: Metadata {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            dictionary: dict_name,
            dictionary_sha256: dict.checksum().to_string(),
            dictionary_entries: dict.len(),
            stopwords: STOPWORDS_VERSION,
            flags: FlagsMeta {
                command,
                format: cli.format,
                compare,
                strip_prefatory: !args.no_strip_prefatory,
                exclude_subject_groups: args.exclude_subject_group.clone(),
                pronoun_normalization: if args.per_poem_pronouns { "per_poem_mean" } else { "pooled" },
                touchstones: settings.touchstones.clone(),
                min_docs: args.min_docs,
                min_docs_each: args.min_docs_each,
                top_k: args.top_k,
                threshold: args.threshold,
                grid_rows: args.grid_rows,
                grid_cols: args.grid_cols,
                emit_plots: args.emit_plots,
            },
        },
        corpora: loaded
            .iter()
            .map(|(c, path)| {
                let mut styles = c.styles();
                styles.sort();
                CorpusMeta {
                    label: c.label.clone(),
                    path: path.clone(),
                    poems: c.len(),
                    styles,
                }
            })
            .collect(),
        tables: TableMap(&tables),
    };

    let out = &cli.out;
    let mut json = serde_json::to_vec_pretty(&report).context("serializing report")?;
    json.push(b'\n');
    write_file(&out.join("report.json"), &json)?;
    for t in &tables {
        let mut buf = Vec::new();
        let ext = match cli.format {
            TableFormat::Csv => {
                t.write_csv(&mut buf).context("rendering table")?;
                "csv"
            }
            TableFormat::Json => {
                t.write_json(&mut buf).context("rendering table")?;
                "json"
            }
        };
        write_file(&out.join("tables").join(format!("{}.{ext}", t.name)), &buf)?;
    }
    for (label, grid) in &grids {
        let mut buf = Vec::new();
        grid.write_csv(&mut buf).context("rendering grid")?;
        write_file(&out.join("grids").join(format!("{}.csv", file_label(label))), &buf)?;
    }
    if args.emit_plots {
        for c in &corpora {
            let summaries = analysis::length_summaries(c)?;
            let svg = plots::boxplot_svg(&format!("Poem length in lines: {}", c.label), &summaries);
            write_file(&out.join("plots").join(format!("lengths_{}.svg", file_label(&c.label))), svg.as_bytes())?;
        }
        for (label, grid) in &grids {
            let svg = plots::heatmap_svg(&format!("Character occupancy: {label}"), grid);
            write_file(&out.join("plots").join(format!("heatmap_{}.svg", file_label(label))), svg.as_bytes())?;
        }
    }
    eprintln!("wrote {} tables to {}", tables.len(), out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }
    match &cli.command {
        Command::Generate(_) => {
            let Command::Generate(args) = cli.command else { unreachable!() };
            generate::run(args, &cli.out)
        }
        Command::Analyze(a) => run_analysis(&cli, "analyze", &a.corpus, a.compare),
        Command::Structure(a) => run_analysis(&cli, "structure", a, false),
        Command::Rhyme(a) => run_analysis(&cli, "rhyme", a, false),
        Command::Meter(a) => run_analysis(&cli, "meter", a, false),
        Command::Lexstats(a) => run_analysis(&cli, "lexstats", a, false),
        Command::Compare(a) => run_analysis(&cli, "compare", a, true),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
