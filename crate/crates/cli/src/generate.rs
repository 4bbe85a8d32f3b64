use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use poetics_core::taxonomy::{all_subjects, is_generated_style, GENERATED_STYLES};
use poetics_core::{Source, Template};
use poetics_gen::client::{DEFAULT_API_KEY_VAR, DEFAULT_BASE_URL};
use poetics_gen::{build_grid, run_job, ChatClient, GenerationJob, PromptSpec, RequestParams, RetryPolicy};

use crate::Failure;

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Model name sent to the endpoint (e.g. gpt-3.5-turbo, gpt-4).
    #[arg(long, required_unless_present = "dry_run")]
    model: Option<String>,
    /// Corpus file to append to [default: <out>/<model>.jsonl].
    #[arg(long)]
    output: Option<PathBuf>,
    /// Continue an existing output file, skipping specs already present.
    #[arg(long)]
    resume: bool,
    /// Print the rendered prompts and exit without contacting the endpoint.
    #[arg(long)]
    dry_run: bool,
    #[arg(long, default_value = DEFAULT_BASE_URL)]
    base_url: String,
    /// Environment variable holding the API key.
    #[arg(long, default_value = DEFAULT_API_KEY_VAR)]
    api_key_env: String,
    /// Comma-separated subset of styles [default: all 24].
    #[arg(long, value_delimiter = ',')]
    styles: Vec<String>,
    /// Comma-separated subset of subjects [default: all 40].
    #[arg(long, value_delimiter = ',')]
    subjects: Vec<String>,
    /// Comma-separated subset of templates: general, figurative, specific.
    #[arg(long, value_delimiter = ',')]
    templates: Vec<String>,
    /// Source label for the records [default: derived from the model name].
    #[arg(long)]
    source: Option<Source>,
    #[arg(long, default_value_t = 4)]
    max_in_flight: usize,
    #[arg(long)]
    requests_per_minute: Option<f64>,
    #[arg(long, default_value_t = 5)]
    max_retries: u32,
    #[arg(long, default_value_t = 1.0)]
    temperature: f32,
    #[arg(long, default_value_t = 1024)]
    max_tokens: u32,
}

fn grid(args: &GenerateArgs) -> Result<Vec<PromptSpec>, Failure> {
    let styles: Vec<String> = if args.styles.is_empty() {
        GENERATED_STYLES.iter().map(|s| s.to_string()).collect()
    } else {
        args.styles.iter().map(|s| s.trim().to_string()).collect()
    };
    if let Some(bad) = styles.iter().find(|s| !is_generated_style(s)) {
        return Err(Failure::Usage(format!("unknown style {bad:?}")));
    }
    let subjects: Vec<String> = if args.subjects.is_empty() {
        all_subjects().iter().map(|s| s.to_string()).collect()
    } else {
        args.subjects.iter().map(|s| s.trim().to_string()).collect()
    };
    let templates: Vec<Template> = if args.templates.is_empty() {
        Template::ALL.to_vec()
    } else {
        args.templates
            .iter()
            .map(|t| t.parse())
            .collect::<Result<_, _>>()
            .map_err(|e| Failure::Usage(format!("{e}")))?
    };
    build_grid(&styles, &subjects, &templates).map_err(|e| Failure::Usage(e.to_string()))
}

fn file_is_nonempty(path: &Path) -> bool {
    path.metadata().map(|m| m.len() > 0).unwrap_or(false)
}

pub fn run(args: GenerateArgs, out_dir: &Path) -> Result<(), Failure> {
    let specs = grid(&args)?;
    if args.dry_run {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        for s in &specs {
            writeln!(lock, "{}", s.rendered).context("writing prompts")?;
        }
        return Ok(());
    }
    let model = args.model.clone().expect("clap requires --model without --dry-run");
    let output = args.output.clone().unwrap_or_else(|| out_dir.join(format!("{model}.jsonl")));
    if file_is_nonempty(&output) && !args.resume {
        return Err(Failure::Usage(format!(
            "{} already exists; pass --resume to continue it",
            output.display()
        )));
    }
    let client = ChatClient::from_env(&args.base_url, &args.api_key_env, &model)
        .map_err(|e| Failure::Usage(e.to_string()))?;

    let mut job = GenerationJob::new(&model, specs, &output);
    if let Some(source) = args.source {
        job.source = source;
    }
    job.params = RequestParams {
        temperature: args.temperature,
        max_tokens: args.max_tokens,
    };
    job.retry = RetryPolicy {
        max_retries: args.max_retries,
        ..RetryPolicy::default()
    };
    job.max_in_flight = args.max_in_flight.max(1);
    job.requests_per_minute = args.requests_per_minute;

    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .context("starting async runtime")?;
    let summary = runtime.block_on(run_job(&job, &client)).context("generation job")?;
    log::info!("{}", serde_json::to_string(&summary).unwrap_or_default());
    eprintln!(
        "{}: {} completed, {} already present, {} failed, {} retries",
        output.display(),
        summary.completed,
        summary.skipped_existing,
        summary.failed,
        summary.retries
    );
    if summary.failed > 0 {
        eprintln!("failed prompts are listed in {}", job.failures_path().display());
    }
    Ok(())
}
