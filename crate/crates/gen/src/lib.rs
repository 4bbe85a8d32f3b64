//! Builds the zero-shot prompt grid and collects one completion per prompt
//! from an OpenAI-compatible chat endpoint into a JSON Lines poem corpus.

pub mod client;
pub mod job;
pub mod prompts;

pub use client::{ChatClient, CompletionBackend, RequestError, RequestParams};
pub use job::{run_job, GenerationJob, JobError, JobSummary, RetryPolicy};
pub use prompts::{build_grid, full_grid, render_prompt, PromptSpec};
