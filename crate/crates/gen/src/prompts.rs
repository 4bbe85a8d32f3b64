//! Zero-shot prompt templates and the style × subject × template grid.

use poetics_core::taxonomy::{all_subjects, GENERATED_STYLES};
use poetics_core::Template;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GridError {
    #[error("no {0} given")]
    Empty(&'static str),
}

/// Renders one prompt. `subject` fills X and `style` fills Y.
pub fn render_prompt(template: Template, style: &str, subject: &str) -> String {
    let base = format!("Write a poem about the subject of {subject} in the following form or style: {style}.");
    match template {
        Template::General => base,
        Template::Figurative => {
            format!("{base} Do not use the actual word(s) {subject} or {style} in the poem.")
        }
        Template::Specific => format!("{base} Make the poem about something specific."),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PromptSpec {
    pub template: Template,
    pub style: String,
    pub subject: String,
    pub rendered: String,
}

impl PromptSpec {
    pub fn new(template: Template, style: &str, subject: &str) -> Self {
        PromptSpec {
            template,
            style: style.to_string(),
            subject: subject.to_string(),
            rendered: render_prompt(template, style, subject),
        }
    }

    /// Record id of this spec's completion under `model`; doubles as the
    /// resume key.
    pub fn record_id(&self, model: &str) -> String {
        format!("{model}:{}:{}:{}", self.template, self.style, self.subject)
    }
}

/// Cartesian product ordered by template, then style, then subject.
pub fn build_grid<S: AsRef<str>, T: AsRef<str>>(
    styles: &[S],
    subjects: &[T],
    templates: &[Template],
) -> Result<Vec<PromptSpec>, GridError> {
    if templates.is_empty() {
        return Err(GridError::Empty("templates"));
    }
    if styles.is_empty() {
        return Err(GridError::Empty("styles"));
    }
    if subjects.is_empty() {
        return Err(GridError::Empty("subjects"));
    }
    let mut specs = Vec::with_capacity(templates.len() * styles.len() * subjects.len());
    for &template in templates {
        for style in styles {
            for subject in subjects {
                specs.push(PromptSpec::new(template, style.as_ref(), subject.as_ref()));
            }
        }
    }
    Ok(specs)
}

/// The full 3 × 24 × 40 grid.
pub fn full_grid() -> Vec<PromptSpec> {
    build_grid(&GENERATED_STYLES, &all_subjects(), &Template::ALL).expect("non-empty taxonomy")
}
