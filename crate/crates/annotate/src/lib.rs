//! Annotation service for generated question-answer pairs.
//!
//! Annotators fetch questions one at a time (question and answer only, no
//! source passage), submit five yes/no judgments, and may resubmit; the last
//! revision per (pair, annotator) wins. Every submission is appended to a
//! JSON Lines log before it is acknowledged, and the log is replayed on
//! start-up.

mod api;
mod guidelines;
mod store;

pub use api::{router, serve, SubmitResponse};
pub use guidelines::{CategoryGuideline, Guidelines};
pub use store::{AnnotationStore, NextItem, Progress, StoreError, Submission};
