//! Answer-agnostic question generation for textbook text.
//!
//! The crate is organised around the stages of the workbench:
//!
//! - [`corpus`]: ingest cleaned chapters, bolded key terms and human-written
//!   summary sets; summary statistics.
//! - [`segmentation`]: sentence splitting and balanced, token-bounded chunking.
//! - [`gateway`]: a uniform contract to text-to-text model backends (answer
//!   extraction, question generation, question answering, summarization),
//!   including a deterministic fake backend and an HTTP client.
//! - [`pipeline`]: end-to-end generation for the original-text, human-summary
//!   and automatic-summary source modes, deduplication, round-trip filtering
//!   and evaluation-set sampling.
//! - [`metrics`]: key-term coverage, annotation skip logic, majority vote,
//!   Cohen's kappa and the agreement report.
//!
//! Data-parallel loops go through [`exec`], which uses rayon when the
//! `parallel` feature is enabled and falls back to plain iteration otherwise.

pub mod corpus;
pub mod exec;
pub mod gateway;
pub mod metrics;
pub mod pipeline;
pub mod segmentation;
pub mod text;

pub use corpus::{Chapter, KeyTerm, Section, SourceDocument, SummaryEntry, SummarySet, SummaryStats};
pub use exec::Execution;
pub use gateway::{AnswerSpan, Backend, BackendDescriptor, Capability, FakeBackend, HighlightedContext};
pub use metrics::{AnnotationLabel, AnnotationRecord, Category, Judgment};
pub use pipeline::{EvalSet, GenerateConfig, QAPair, QuestionSet, SourceKind};
pub use segmentation::{Chunk, Sentence, TokenCounter, WhitespaceCounter};
