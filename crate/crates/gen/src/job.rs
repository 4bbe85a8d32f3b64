//! Running a prompt grid against a backend and persisting completions.
//!
//! Completions are appended to a JSON Lines corpus as they arrive, one record
//! per line, flushed after each write. Re-running a job against the same
//! output skips every spec whose record id is already present. Requests that
//! still fail after their retries go to a sidecar `<output>.failures.jsonl`
//! so the corpus file itself always loads cleanly.

use std::collections::HashSet;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use futures::stream::{self, StreamExt};
use poetics_core::{PoemRecord, Source};
use serde::Serialize;
use thiserror::Error;
use tokio::sync::Mutex;
use tokio::time::Instant;

use crate::client::{CompletionBackend, RequestError, RequestParams};
use crate::prompts::PromptSpec;

#[derive(Debug, Error)]
pub enum JobError {
    #[error("authentication failed, aborting: {0}")]
    Auth(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{location}: existing output is not a valid record: {message}")]
    CorruptOutput { location: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 5,
            base_delay: Duration::from_secs(1),
            max_delay: Duration::from_secs(60),
        }
    }
}

impl RetryPolicy {
    fn delay(&self, attempt: u32, hint: Option<Duration>) -> Duration {
        hint.unwrap_or_else(|| self.base_delay.saturating_mul(1u32 << attempt.min(16)))
            .min(self.max_delay)
    }
}

#[derive(Debug, Clone)]
pub struct GenerationJob {
    pub model: String,
    pub source: Source,
    pub specs: Vec<PromptSpec>,
    pub params: RequestParams,
    pub retry: RetryPolicy,
    pub max_in_flight: usize,
    /// Ceiling on request starts per minute; `None` for no ceiling.
    pub requests_per_minute: Option<f64>,
    pub output: PathBuf,
}

impl GenerationJob {
    pub fn new(model: impl Into<String>, specs: Vec<PromptSpec>, output: impl Into<PathBuf>) -> Self {
        let model = model.into();
        GenerationJob {
            source: Source::from_model_id(&model),
            model,
            specs,
            params: RequestParams::default(),
            retry: RetryPolicy::default(),
            max_in_flight: 4,
            requests_per_minute: None,
            output: output.into(),
        }
    }

    pub fn failures_path(&self) -> PathBuf {
        let mut name = self.output.file_name().unwrap_or_default().to_os_string();
        name.push(".failures.jsonl");
        self.output.with_file_name(name)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct JobSummary {
    pub requested: usize,
    pub skipped_existing: usize,
    pub completed: usize,
    pub failed: usize,
    pub retries: usize,
}

#[derive(Debug, Serialize)]
struct FailureRow<'a> {
    id: &'a str,
    template: &'a str,
    style: &'a str,
    subject: &'a str,
    retries: usize,
    error: String,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> JobError + '_ {
    move |source| JobError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Ids already present in `path`. An unterminated last line (an interrupted
/// write) is cut off so appends start on a clean line.
pub fn completed_ids(path: &Path) -> Result<HashSet<String>, JobError> {
    let mut ids = HashSet::new();
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(ids),
        Err(e) => return Err(io_err(path)(e)),
    };
    let complete_len = bytes.iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
    if complete_len < bytes.len() {
        log::warn!("{}: dropping unterminated trailing record", path.display());
        let f = OpenOptions::new().write(true).open(path).map_err(io_err(path))?;
        f.set_len(complete_len as u64).map_err(io_err(path))?;
    }
    for (i, line) in BufReader::new(&bytes[..complete_len]).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PoemRecord = serde_json::from_str(&line).map_err(|e| JobError::CorruptOutput {
            location: format!("{}:{}", path.display(), i + 1),
            message: e.to_string(),
        })?;
        ids.insert(record.id);
    }
    Ok(ids)
}

struct RateLimiter {
    interval: Option<Duration>,
    next: Mutex<Instant>,
}

impl RateLimiter {
    fn new(per_minute: Option<f64>) -> Self {
        RateLimiter {
            interval: per_minute
                .filter(|r| *r > 0.0 && r.is_finite())
                .map(|r| Duration::from_secs_f64(60.0 / r)),
            next: Mutex::new(Instant::now()),
        }
    }

    async fn acquire(&self) {
        let Some(interval) = self.interval else { return };
        let slot = {
            let mut next = self.next.lock().await;
            let slot = (*next).max(Instant::now());
            *next = slot + interval;
            slot
        };
        tokio::time::sleep_until(slot).await;
    }
}

async fn request_with_retries<B: CompletionBackend + ?Sized>(
    backend: &B,
    spec: &PromptSpec,
    job: &GenerationJob,
    limiter: &RateLimiter,
) -> (Result<String, RequestError>, usize) {
    let mut attempt = 0u32;
    loop {
        limiter.acquire().await;
        match backend.complete(&spec.rendered, &job.params).await {
            Ok(text) => return (Ok(text), attempt as usize),
            Err(e) if e.is_retryable() && attempt < job.retry.max_retries => {
                let hint = match &e {
                    RequestError::Throttled { retry_after } => *retry_after,
                    _ => None,
                };
                let wait = job.retry.delay(attempt, hint);
                log::warn!(
                    "{}: {e}; retry {} of {} in {wait:?}",
                    spec.record_id(&job.model),
                    attempt + 1,
                    job.retry.max_retries
                );
                tokio::time::sleep(wait).await;
                attempt += 1;
            }
            Err(e) => return (Err(e), attempt as usize),
        }
    }
}

/// Collects completions for every spec not already in `job.output`.
///
/// Up to `job.max_in_flight` requests run concurrently; a single writer
/// appends results in completion order. An authentication failure aborts the
/// job, keeping everything written so far.
pub async fn run_job<B: CompletionBackend + ?Sized>(job: &GenerationJob, backend: &B) -> Result<JobSummary, JobError> {
    if let Some(dir) = job.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let done = completed_ids(&job.output)?;
    let mut summary = JobSummary {
        requested: job.specs.len(),
        ..JobSummary::default()
    };
    let mut queued = HashSet::new();
    let pending: Vec<&PromptSpec> = job
        .specs
        .iter()
        .filter(|s| {
            let id = s.record_id(&job.model);
            if done.contains(&id) {
                summary.skipped_existing += 1;
                false
            } else {
                queued.insert(id)
            }
        })
        .collect();
    if pending.is_empty() {
        return Ok(summary);
    }

    let open_append = |path: &Path| -> Result<BufWriter<File>, JobError> {
        OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map(BufWriter::new)
            .map_err(io_err(path))
    };
    let mut out = open_append(&job.output)?;
    let failures_path = job.failures_path();
    let mut failures: Option<BufWriter<File>> = None;

    let limiter = RateLimiter::new(job.requests_per_minute);
    let mut results = stream::iter(pending)
        .map(|spec| {
            let limiter = &limiter;
            async move {
                let (result, retries) = request_with_retries(backend, spec, job, limiter).await;
                (spec, result, retries)
            }
        })
        .buffer_unordered(job.max_in_flight.max(1));

    while let Some((spec, result, retries)) = results.next().await {
        summary.retries += retries;
        let id = spec.record_id(&job.model);
        let outcome = result.and_then(|text| {
            let record = PoemRecord {
                id: id.clone(),
                text,
                source: job.source.clone(),
                style: spec.style.clone(),
                subject: Some(spec.subject.clone()),
                template: Some(spec.template),
                title: None,
            };
            record
                .validate()
                .map(|_| record)
                .map_err(RequestError::Malformed)
        });
        match outcome {
            Ok(record) => {
                serde_json::to_writer(&mut out, &record)
                    .map_err(|e| io_err(&job.output)(e.into()))?;
                out.write_all(b"\n").map_err(io_err(&job.output))?;
                out.flush().map_err(io_err(&job.output))?;
                summary.completed += 1;
            }
            Err(RequestError::Auth(msg)) => return Err(JobError::Auth(msg)),
            Err(error) => {
                log::error!("{id}: giving up after {retries} retries: {error}");
                let writer = match failures.as_mut() {
                    Some(w) => w,
                    None => failures.insert(open_append(&failures_path)?),
                };
                let row = FailureRow {
                    id: &id,
                    template: spec.template.as_str(),
                    style: &spec.style,
                    subject: &spec.subject,
                    retries,
                    error: error.to_string(),
                };
                serde_json::to_writer(&mut *writer, &row).map_err(|e| io_err(&failures_path)(e.into()))?;
                writer.write_all(b"\n").map_err(io_err(&failures_path))?;
                writer.flush().map_err(io_err(&failures_path))?;
                summary.failed += 1;
            }
        }
    }
    Ok(summary)
}
