use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::corpus::KeyTerm;
use crate::exec::Execution;
use crate::pipeline::{QAPair, QuestionSet, SourceKind};
use crate::text::{match_key, percent_1dp};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermCoverage {
    pub term: String,
    pub in_q: bool,
    pub in_a: bool,
}

/// Share of key terms found in a set's questions, answers, or either.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub source_kind: SourceKind,
    pub n: usize,
    pub pct_in_questions: f64,
    pub pct_in_answers: f64,
    pub pct_in_either: f64,
    pub per_term: Vec<TermCoverage>,
}

impl CoverageReport {
    fn count(&self, f: impl Fn(&TermCoverage) -> bool) -> usize {
        self.per_term.iter().filter(|t| f(t)).count()
    }

    /// (questions, answers, either) as percentages rounded to one decimal.
    pub fn rounded_percentages(&self) -> (f64, f64, f64) {
        let total = self.per_term.len();
        (
            percent_1dp(self.count(|t| t.in_q), total),
            percent_1dp(self.count(|t| t.in_a), total),
            percent_1dp(self.count(|t| t.in_q || t.in_a), total),
        )
    }
}

pub fn key_term_coverage(qs: &QuestionSet, key_terms: &[KeyTerm], exec: Execution) -> Result<CoverageReport, MetricsError> {
    key_term_coverage_over(qs.source_kind, &qs.pairs, key_terms, exec)
}

/// Coverage over an arbitrary slice of pairs.
///
/// A term counts as covered when its normalized form is a substring of the
/// normalized text of any question (or answer).
pub fn key_term_coverage_over(
    source_kind: SourceKind,
    pairs: &[QAPair],
    key_terms: &[KeyTerm],
    exec: Execution,
) -> Result<CoverageReport, MetricsError> {
    if key_terms.is_empty() {
        return Err(MetricsError::NoKeyTerms);
    }
    let questions: Vec<String> = pairs.iter().map(|p| match_key(&p.question)).collect();
    let answers: Vec<String> = pairs.iter().map(|p| match_key(&p.answer)).collect();
    let per_term = exec.map(key_terms, |term| {
        let key = term.match_key();
        let hit = |texts: &[String]| !key.is_empty() && texts.iter().any(|t| t.contains(&key));
        TermCoverage { term: term.surface.clone(), in_q: hit(&questions), in_a: hit(&answers) }
    });
    let total = per_term.len() as f64;
    let frac = |f: &dyn Fn(&TermCoverage) -> bool| per_term.iter().filter(|t| f(t)).count() as f64 / total;
    Ok(CoverageReport {
        source_kind,
        n: pairs.len(),
        pct_in_questions: frac(&|t| t.in_q),
        pct_in_answers: frac(&|t| t.in_a),
        pct_in_either: frac(&|t| t.in_q || t.in_a),
        per_term,
    })
}
