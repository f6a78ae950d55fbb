//! Evaluation metrics: key-term coverage, annotation skip logic and majority
//! vote, Cohen's kappa, and the combined agreement report.

mod agreement;
mod coverage;
mod kappa;
mod labels;
mod report;

use thiserror::Error;

pub use agreement::{agreement_report, AgreementReport};
pub use coverage::{key_term_coverage, key_term_coverage_over, CoverageReport, TermCoverage};
pub use kappa::{cohen_kappa, cohen_kappa_detailed, KappaEstimate};
pub use labels::{expand_annotation, majority_vote, AnnotationLabel, AnnotationRecord, Category, Judgment};
pub use report::{render_agreement_table, render_chapter_table, render_coverage_table, render_source_table};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("no key terms")]
    NoKeyTerms,
    #[error("incomplete annotation: acceptable is {acceptable} but {field} is skipped")]
    IncompleteAnnotation { acceptable: &'static str, field: &'static str },
    #[error("acceptable must be answered yes or no")]
    AcceptableSkipped,
    #[error("label is not expanded: {0} is skipped")]
    NotExpanded(&'static str),
    #[error("majority vote needs exactly 3 labels, got {0}")]
    WrongLabelCount(usize),
    #[error("label vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("label vectors are empty")]
    EmptyLabels,
    #[error("expected exactly 3 annotators, found {0:?}")]
    WrongAnnotatorCount(Vec<String>),
    #[error("missing annotations for pairs {0:?}")]
    MissingAnnotations(Vec<String>),
    #[error("evaluation-set pair {0:?} not found in any question set")]
    UnknownPair(String),
    #[error("invalid label for pair {pair_id:?} by {annotator_id:?}: {reason}")]
    InvalidRecord { pair_id: String, annotator_id: String, reason: String },
}
