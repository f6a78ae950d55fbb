//! Uniform contract to text-to-text model backends.
//!
//! A backend serves four generation tasks: answer extraction over a context
//! with one highlighted sentence, answer-aware question generation,
//! extractive question answering, and summarization. It may also supply its
//! own token counter. Backends are in-process plugins ([`Backend`]
//! implementors, including [`FakeBackend`]) or remote HTTP endpoints
//! ([`HttpBackend`]).

mod fake;
#[cfg(feature = "http")]
mod http;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::segmentation::{self, Chunk, RuleSplitter, SegmentationError, TokenCounter, WhitespaceCounter};

pub use fake::FakeBackend;
#[cfg(feature = "http")]
pub use http::{HttpBackend, RateLimiter, BACKEND_URL_ENV};

/// Highlight literal used by the fake backend.
pub const DEFAULT_HIGHLIGHT: &str = "\u{27e8}hl\u{27e9}";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Capability {
    ExtractAnswer,
    GenerateQuestion,
    AnswerQuestion,
    Summarize,
    CountTokens,
}

impl Capability {
    pub const ALL: [Capability; 5] = [
        Capability::ExtractAnswer,
        Capability::GenerateQuestion,
        Capability::AnswerQuestion,
        Capability::Summarize,
        Capability::CountTokens,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    InProcess,
    Http,
    Fake,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackendDescriptor {
    pub name: String,
    pub kind: BackendKind,
    pub capabilities: BTreeSet<Capability>,
    /// Literal inserted before and after the highlighted sentence.
    pub highlight_marker: String,
    /// Decoding parameters and other backend settings, recorded verbatim in
    /// run manifests.
    #[serde(default)]
    pub config: BTreeMap<String, serde_json::Value>,
}

impl BackendDescriptor {
    pub fn supports(&self, cap: Capability) -> bool {
        self.capabilities.contains(&cap)
    }
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("backend {backend:?} unsupported capability {capability:?}")]
    Unsupported { backend: String, capability: Capability },
    #[error("backend transport failure: {0}")]
    Transport(String),
    #[error("sentence index {index} out of range for chunk of {len} sentences")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("chunk text already contains the highlight marker {0:?}")]
    MarkerInText(String),
    #[error("answer is not present in the chunk")]
    AnswerNotInChunk,
    #[error("empty question")]
    EmptyQuestion,
    #[error("empty answer")]
    EmptyAnswer,
    #[error("empty input")]
    EmptyInput,
    #[error("empty summary")]
    EmptySummary,
    #[error(transparent)]
    Segmentation(#[from] SegmentationError),
    #[error("summarization failed on chunk {failed_chunk} of {total_chunks} ({} completed): {source}", completed.len())]
    PartialSummary {
        completed: Vec<String>,
        failed_chunk: usize,
        total_chunks: usize,
        #[source]
        source: Box<GatewayError>,
    },
}

/// One request to a backend.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Task<'a> {
    /// `highlighted` carries the chunk with exactly one marked sentence.
    ExtractAnswer { highlighted: &'a str },
    GenerateQuestion { context: &'a str, answer: &'a str },
    AnswerQuestion { context: &'a str, question: &'a str },
    Summarize { text: &'a str },
}

impl Task<'_> {
    pub fn capability(&self) -> Capability {
        match self {
            Task::ExtractAnswer { .. } => Capability::ExtractAnswer,
            Task::GenerateQuestion { .. } => Capability::GenerateQuestion,
            Task::AnswerQuestion { .. } => Capability::AnswerQuestion,
            Task::Summarize { .. } => Capability::Summarize,
        }
    }
}

/// A text-to-text model backend.
///
/// Implementations must be safe to call concurrently; the pipeline issues
/// independent requests from several threads.
pub trait Backend: Send + Sync {
    fn descriptor(&self) -> &BackendDescriptor;

    /// Runs one task and returns the decoded output string.
    fn run(&self, task: &Task<'_>) -> Result<String, GatewayError>;

    /// Token counter used for chunking. Falls back to whitespace counting.
    fn token_counter(&self) -> &dyn TokenCounter {
        &WhitespaceCounter
    }
}

fn require(backend: &dyn Backend, capability: Capability) -> Result<(), GatewayError> {
    let d = backend.descriptor();
    if d.supports(capability) {
        Ok(())
    } else {
        Err(GatewayError::Unsupported { backend: d.name.clone(), capability })
    }
}

fn call(backend: &dyn Backend, task: &Task<'_>) -> Result<String, GatewayError> {
    require(backend, task.capability())?;
    backend.run(task)
}

/// A chunk rendered with one sentence wrapped in highlight markers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HighlightedContext {
    pub chunk_index: usize,
    /// Position of the highlighted sentence within the chunk.
    pub highlighted_sentence_index: usize,
    pub rendered_text: String,
    pub marker: String,
    pub sentence_text: String,
    pub chunk_text: String,
}

impl HighlightedContext {
    /// Removes the marker pair, recovering the chunk text.
    pub fn strip_markers(&self) -> String {
        strip_highlights(&self.rendered_text, &self.marker)
    }
}

/// Removes one highlight pair as inserted by [`insert_highlights`].
pub fn strip_highlights(rendered: &str, marker: &str) -> String {
    let open = format!("{marker} ");
    let close = format!(" {marker}");
    let Some(start) = rendered.find(&open) else {
        return rendered.to_owned();
    };
    let mut out = String::with_capacity(rendered.len());
    out.push_str(&rendered[..start]);
    let rest = &rendered[start + open.len()..];
    match rest.find(&close) {
        Some(end) => {
            out.push_str(&rest[..end]);
            out.push_str(&rest[end + close.len()..]);
        }
        None => out.push_str(rest),
    }
    out
}

/// Wraps sentence `sentence_index` of `chunk` in `marker`.
pub fn insert_highlights(chunk: &Chunk, sentence_index: usize, marker: &str) -> Result<HighlightedContext, GatewayError> {
    let len = chunk.sentences.len();
    if sentence_index >= len {
        return Err(GatewayError::IndexOutOfRange { index: sentence_index, len });
    }
    let chunk_text = chunk.text();
    if marker.is_empty() || chunk_text.contains(marker) {
        return Err(GatewayError::MarkerInText(marker.to_owned()));
    }
    let mut rendered = String::with_capacity(chunk_text.len() + 2 * marker.len() + 2);
    for (i, s) in chunk.sentences.iter().enumerate() {
        if i > 0 {
            rendered.push(' ');
        }
        if i == sentence_index {
            rendered.push_str(marker);
            rendered.push(' ');
            rendered.push_str(&s.text);
            rendered.push(' ');
            rendered.push_str(marker);
        } else {
            rendered.push_str(&s.text);
        }
    }
    Ok(HighlightedContext {
        chunk_index: chunk.chunk_index,
        highlighted_sentence_index: sentence_index,
        rendered_text: rendered,
        marker: marker.to_owned(),
        sentence_text: chunk.sentences[sentence_index].text.clone(),
        chunk_text,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerSpan {
    pub text: String,
    pub found_in_sentence: bool,
    pub found_in_chunk: bool,
}

/// Result of an extraction attempt, before the pipeline discards rejects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Extraction {
    Accepted(AnswerSpan),
    /// The backend returned text that does not occur in the chunk.
    Rejected { raw: String },
    NoAnswer,
}

/// Asks the backend for at most one answer span in the highlighted sentence
/// and validates it against the sentence and the chunk.
pub fn extract_answer_checked(backend: &dyn Backend, hc: &HighlightedContext) -> Result<Extraction, GatewayError> {
    let raw = call(backend, &Task::ExtractAnswer { highlighted: &hc.rendered_text })?;
    let text = raw.trim();
    if text.is_empty() {
        return Ok(Extraction::NoAnswer);
    }
    let found_in_sentence = hc.sentence_text.contains(text);
    let found_in_chunk = found_in_sentence || hc.chunk_text.contains(text);
    if !found_in_chunk {
        tracing::warn!(
            backend = %backend.descriptor().name,
            chunk = hc.chunk_index,
            sentence = hc.highlighted_sentence_index,
            span = %text,
            "rejected answer span absent from chunk"
        );
        return Ok(Extraction::Rejected { raw: text.to_owned() });
    }
    Ok(Extraction::Accepted(AnswerSpan { text: text.to_owned(), found_in_sentence, found_in_chunk }))
}

/// Like [`extract_answer_checked`], collapsing rejections into `None`.
pub fn extract_answer(backend: &dyn Backend, hc: &HighlightedContext) -> Result<Option<AnswerSpan>, GatewayError> {
    Ok(match extract_answer_checked(backend, hc)? {
        Extraction::Accepted(span) => Some(span),
        Extraction::Rejected { .. } | Extraction::NoAnswer => None,
    })
}

/// Generates one question for an answer that occurs in the chunk.
pub fn generate_question(backend: &dyn Backend, chunk: &Chunk, answer: &AnswerSpan) -> Result<String, GatewayError> {
    let context = chunk.text();
    if !answer.found_in_chunk || answer.text.is_empty() || !context.contains(&answer.text) {
        return Err(GatewayError::AnswerNotInChunk);
    }
    let question = call(backend, &Task::GenerateQuestion { context: &context, answer: &answer.text })?;
    let question = question.trim();
    if question.is_empty() {
        return Err(GatewayError::EmptyQuestion);
    }
    Ok(question.to_owned())
}

pub fn answer_question(backend: &dyn Backend, chunk: &Chunk, question: &str) -> Result<String, GatewayError> {
    answer_question_text(backend, &chunk.text(), question)
}

/// [`answer_question`] over raw context text.
pub fn answer_question_text(backend: &dyn Backend, context: &str, question: &str) -> Result<String, GatewayError> {
    require(backend, Capability::AnswerQuestion)?;
    if context.trim().is_empty() || question.trim().is_empty() {
        return Err(GatewayError::EmptyInput);
    }
    let answer = backend.run(&Task::AnswerQuestion { context, question })?;
    let answer = answer.trim();
    if answer.is_empty() {
        return Err(GatewayError::EmptyAnswer);
    }
    Ok(answer.to_owned())
}

/// Summarizes text of any length.
///
/// The text is split into sentences and balanced chunks under `token_limit`
/// (using the backend's token counter); each chunk is summarized on its own
/// and the outputs are joined with single spaces in order. A failure on any
/// chunk aborts with [`GatewayError::PartialSummary`] carrying the completed
/// prefix.
pub fn summarize_long(
    backend: &dyn Backend,
    text: &str,
    token_limit: usize,
    exec: Execution,
) -> Result<String, GatewayError> {
    require(backend, Capability::Summarize)?;
    let sentences = segmentation::split_sentences_with(text, &RuleSplitter::default(), backend.token_counter());
    if sentences.is_empty() {
        return Err(GatewayError::EmptyInput);
    }
    let chunks = segmentation::chunk(&sentences, token_limit)?;
    if chunks.len() == 1 {
        let out = backend.run(&Task::Summarize { text: &chunks[0].text() })?;
        return non_empty_summary(out);
    }
    let results = exec.map(&chunks, |c| {
        backend.run(&Task::Summarize { text: &c.text() }).and_then(non_empty_summary)
    });
    let total_chunks = results.len();
    let mut completed = Vec::with_capacity(total_chunks);
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => completed.push(s),
            Err(source) => {
                return Err(GatewayError::PartialSummary {
                    completed,
                    failed_chunk: i,
                    total_chunks,
                    source: Box::new(source),
                })
            }
        }
    }
    Ok(completed.join(" "))
}

fn non_empty_summary(out: String) -> Result<String, GatewayError> {
    let trimmed = out.trim();
    if trimmed.is_empty() {
        Err(GatewayError::EmptySummary)
    } else {
        Ok(trimmed.to_owned())
    }
}

type Factory = Box<dyn Fn() -> Result<Arc<dyn Backend>, GatewayError> + Send + Sync>;

/// Name-to-constructor table for backends selectable from the command line.
pub struct BackendRegistry {
    factories: HashMap<String, Factory>,
}

impl Default for BackendRegistry {
    /// Registers `fake`, plus `http` (reads [`BACKEND_URL_ENV`]) when the
    /// `http` feature is enabled.
    fn default() -> Self {
        let mut reg = Self { factories: HashMap::new() };
        reg.register("fake", || Ok(Arc::new(FakeBackend::new()) as Arc<dyn Backend>));
        #[cfg(feature = "http")]
        reg.register("http", || Ok(Arc::new(HttpBackend::from_env()?) as Arc<dyn Backend>));
        reg
    }
}

impl BackendRegistry {
    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn() -> Result<Arc<dyn Backend>, GatewayError> + Send + Sync + 'static,
    {
        self.factories.insert(name.to_owned(), Box::new(factory));
    }

    pub fn create(&self, name: &str) -> Result<Arc<dyn Backend>, GatewayError> {
        match self.factories.get(name) {
            Some(f) => f(),
            None => Err(GatewayError::Transport(format!("unknown backend {name:?}"))),
        }
    }

    pub fn names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.factories.keys().map(String::as_str).collect();
        names.sort_unstable();
        names
    }
}
