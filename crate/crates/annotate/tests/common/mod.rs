#![allow(dead_code)]

use std::path::Path;

use chrono::{DateTime, TimeZone, Utc};
use flashqg::pipeline::{generate, SourceInput};
use flashqg::{AnnotationLabel, EvalSet, FakeBackend, GenerateConfig, QuestionSet, SourceKind};
use flashqg_annotate::{AnnotationStore, Submission};

pub const TEXT: &str = "Dynamic Programming was introduced in 1957. It solves overlapping subproblems. \
    The Bellman Equation relates values of successive states. Memoization stores earlier results. \
    A Greedy Algorithm picks the locally best option. Graph Search explores neighbours in order. \
    The Knapsack Problem has a classic tabular solution. Richard Bellman named the method.";

pub fn question_set() -> QuestionSet {
    let cfg = GenerateConfig { token_limit: 24, ..GenerateConfig::default() };
    generate(SourceInput::Text { doc_id: "fixture", text: TEXT }, SourceKind::Original, &FakeBackend::new(), &cfg)
        .expect("fixture generates")
}

pub fn eval_set(qs: &QuestionSet) -> EvalSet {
    EvalSet {
        eval_id: "eval-7".into(),
        entries: qs.pairs.iter().map(|p| p.pair_id.clone()).collect(),
        per_source_quota: qs.pairs.len(),
        seed: 7,
    }
}

pub fn annotators() -> Vec<String> {
    vec!["a1".into(), "a2".into(), "a3".into()]
}

pub fn open(path: &Path) -> (AnnotationStore, QuestionSet, EvalSet) {
    let qs = question_set();
    let eval = eval_set(&qs);
    let store = AnnotationStore::open(path, &eval, std::slice::from_ref(&qs), annotators()).expect("store opens");
    (store, qs, eval)
}

pub fn at(secs: i64) -> DateTime<Utc> {
    Utc.timestamp_opt(1_700_000_000 + secs, 0).unwrap()
}

pub fn submission(pair_id: &str, annotator: &str, label: AnnotationLabel, secs: i64) -> Submission {
    Submission {
        pair_id: pair_id.into(),
        annotator_id: annotator.into(),
        label,
        submitted_at: Some(at(secs)),
        revision: None,
    }
}
