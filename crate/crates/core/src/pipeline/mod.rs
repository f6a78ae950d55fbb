//! End-to-end generation of question-answer pairs.
//!
//! For every sentence of every chunk: highlight it, ask the backend for at
//! most one answer span, keep the span only if it occurs in the chunk, then
//! generate one question for it. Three source modes are supported: the
//! original text, human-written summaries, and automatic summaries produced
//! by the backend first.

mod persist;
mod sample;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{SourceDocument, SummarySet};
use crate::exec::Execution;
use crate::gateway::{self, Backend, BackendDescriptor, Capability, Extraction, GatewayError};
use crate::segmentation::{self, Chunk, RuleSplitter, DEFAULT_TOKEN_LIMIT, HIGHLIGHT_MARGIN};
use crate::text::{collapse_whitespace, loose_key};

pub use persist::{
    manifest_path, read_eval_set, read_question_set, write_eval_set, write_question_set, PersistError,
};
pub use sample::{sample_eval_set, EvalSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Original,
    HumanSummary,
    AutoSummary,
}

impl SourceKind {
    pub const ALL: [SourceKind; 3] = [SourceKind::Original, SourceKind::HumanSummary, SourceKind::AutoSummary];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Original => "original",
            SourceKind::HumanSummary => "human_summary",
            SourceKind::AutoSummary => "auto_summary",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            SourceKind::Original => "Original Text",
            SourceKind::HumanSummary => "Human Summary",
            SourceKind::AutoSummary => "Auto Summary",
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QAPair {
    pub pair_id: String,
    pub question: String,
    pub answer: String,
    pub source_kind: SourceKind,
    pub doc_id: String,
    pub chapter_id: String,
    pub section_id: String,
    pub chunk_index: usize,
    pub sentence_index: usize,
    pub author_id: Option<String>,
    pub run_id: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryGranularity {
    /// One passage per (author, chapter): section summaries concatenated in
    /// section order.
    #[default]
    PerChapter,
    /// One passage per summarized section.
    PerSection,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureMarker {
    pub message: String,
    /// Items that did not complete, as `chapter/section[/chunk/sentence]`.
    pub failed_items: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub source_kind: SourceKind,
    pub backend: BackendDescriptor,
    pub token_counter: String,
    pub token_limit: usize,
    /// Budget actually used for chunking, after the highlight margin.
    pub chunk_token_limit: usize,
    pub summary_granularity: SummaryGranularity,
    pub dedupe: bool,
    pub roundtrip_filter: bool,
    pub seed: Option<u64>,
    pub sentence_count: usize,
    pub chunk_count: usize,
    pub rejected_spans: usize,
    pub pair_count: usize,
    pub failure: Option<FailureMarker>,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
}

/// Pairs from one source mode plus the run manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuestionSet {
    pub run_id: String,
    pub source_kind: SourceKind,
    pub pairs: Vec<QAPair>,
    pub manifest: RunManifest,
    /// Chunk text each pair was generated from, keyed by pair id. Kept in
    /// memory only.
    #[serde(skip)]
    pub contexts: BTreeMap<String, String>,
}

impl QuestionSet {
    pub fn is_partial(&self) -> bool {
        self.manifest.failure.is_some()
    }
}

#[derive(Clone, Debug)]
pub struct GenerateConfig {
    pub token_limit: usize,
    pub dedupe: bool,
    pub roundtrip_filter: bool,
    pub summary_granularity: SummaryGranularity,
    pub execution: Execution,
    /// Overrides the content-derived run id.
    pub run_id: Option<String>,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self {
            token_limit: DEFAULT_TOKEN_LIMIT,
            dedupe: false,
            roundtrip_filter: false,
            summary_granularity: SummaryGranularity::PerChapter,
            execution: Execution::Parallel,
            run_id: None,
        }
    }
}

/// What to generate from.
#[derive(Clone, Copy, Debug)]
pub enum SourceInput<'a> {
    /// A whole document; one passage per section.
    Document(&'a SourceDocument),
    /// Human-written summary sets. When `doc` is given, chapters and sections
    /// follow its order; otherwise first-seen order.
    Summaries { doc: Option<&'a SourceDocument>, sets: &'a [SummarySet] },
    /// A single passage of free text.
    Text { doc_id: &'a str, text: &'a str },
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("empty input")]
    EmptyInput,
    #[error("source {kind} cannot be generated from {input}")]
    ModeMismatch { kind: SourceKind, input: &'static str },
    #[error("backend {backend:?} lacks capability {capability:?}")]
    Unsupported { backend: String, capability: Capability },
    #[error("token limit {limit} leaves no room after the {margin}-token highlight margin")]
    TokenLimitTooSmall { limit: usize, margin: usize },
    #[error("generation stopped with {} completed pairs: {source}", partial.pairs.len())]
    Partial {
        partial: Box<QuestionSet>,
        #[source]
        source: GatewayError,
    },
    #[error("pair {0:?} has no recorded context")]
    MissingContext(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

/// A unit of text to segment, with provenance. Multiple pieces are
/// concatenated before sentence splitting; each sentence is attributed to
/// the piece its first token came from.
#[derive(Clone, Debug)]
struct Passage {
    doc_id: String,
    chapter_id: String,
    author_id: Option<String>,
    pieces: Vec<(String, String)>,
}

impl Passage {
    fn label(&self) -> String {
        let sections: Vec<&str> = self.pieces.iter().map(|(s, _)| s.as_str()).collect();
        match &self.author_id {
            Some(a) => format!("{}/{}@{}", self.chapter_id, sections.join("+"), a),
            None => format!("{}/{}", self.chapter_id, sections.join("+")),
        }
    }
}

struct SegmentedPassage {
    passage: Passage,
    chunks: Vec<Chunk>,
    /// Section id per passage-level sentence index.
    sentence_sections: Vec<String>,
}

fn passages(input: &SourceInput<'_>, granularity: SummaryGranularity) -> Vec<Passage> {
    match *input {
        SourceInput::Document(doc) => doc
            .chapters
            .iter()
            .flat_map(|ch| {
                ch.sections.iter().map(|s| Passage {
                    doc_id: doc.doc_id.clone(),
                    chapter_id: ch.chapter_id.clone(),
                    author_id: None,
                    pieces: vec![(s.section_id.clone(), s.text.clone())],
                })
            })
            .collect(),
        SourceInput::Text { doc_id, text } => vec![Passage {
            doc_id: doc_id.to_owned(),
            chapter_id: String::new(),
            author_id: None,
            pieces: vec![(String::new(), text.to_owned())],
        }],
        SourceInput::Summaries { doc, sets } => {
            let doc_id = doc.map_or_else(|| "summaries".to_owned(), |d| d.doc_id.clone());
            let mut chapter_order: Vec<String> = doc
                .map(|d| d.chapters.iter().map(|c| c.chapter_id.clone()).collect())
                .unwrap_or_default();
            for set in sets {
                for e in &set.entries {
                    if !chapter_order.contains(&e.chapter_id) {
                        chapter_order.push(e.chapter_id.clone());
                    }
                }
            }
            let section_rank = |chapter: &str, section: &str| -> usize {
                doc.and_then(|d| d.chapter(chapter))
                    .and_then(|c| c.sections.iter().position(|s| s.section_id == section))
                    .unwrap_or(usize::MAX)
            };
            let mut out = Vec::new();
            for chapter in &chapter_order {
                for set in sets {
                    let mut entries: Vec<_> = set.entries.iter().filter(|e| &e.chapter_id == chapter).collect();
                    // Stable: sections unknown to the document keep input order.
                    entries.sort_by_key(|e| section_rank(chapter, &e.section_id));
                    if entries.is_empty() {
                        continue;
                    }
                    let pieces: Vec<(String, String)> =
                        entries.iter().map(|e| (e.section_id.clone(), e.summary_text.clone())).collect();
                    let make = |pieces| Passage {
                        doc_id: doc_id.clone(),
                        chapter_id: chapter.clone(),
                        author_id: Some(set.author_id.clone()),
                        pieces,
                    };
                    match granularity {
                        SummaryGranularity::PerChapter => out.push(make(pieces)),
                        SummaryGranularity::PerSection => out.extend(pieces.into_iter().map(|p| make(vec![p]))),
                    }
                }
            }
            out
        }
    }
}

fn segment(passage: Passage, backend: &dyn Backend, chunk_limit: usize) -> Result<SegmentedPassage, GatewayError> {
    let counter = backend.token_counter();
    let splitter = RuleSplitter::default();
    // Token ownership: normalized pieces joined by single spaces.
    let mut owners = Vec::new();
    let mut joined = String::new();
    for (section, text) in &passage.pieces {
        let norm = collapse_whitespace(text);
        if norm.is_empty() {
            continue;
        }
        owners.extend(std::iter::repeat_n(section.clone(), norm.split(' ').count()));
        if !joined.is_empty() {
            joined.push(' ');
        }
        joined.push_str(&norm);
    }
    let sentences = segmentation::split_sentences_with(&joined, &splitter, counter);
    let mut sentence_sections = Vec::with_capacity(sentences.len());
    let mut token_pos = 0;
    for s in &sentences {
        sentence_sections.push(owners[token_pos].clone());
        token_pos += s.text.split(' ').count();
    }
    let chunks = segmentation::chunk(&sentences, chunk_limit)?;
    Ok(SegmentedPassage { passage, chunks, sentence_sections })
}

enum SentenceOutcome {
    Pair { question: String, answer: String },
    Rejected,
    NoAnswer,
}

fn process_sentence(backend: &dyn Backend, chunk: &Chunk, pos: usize) -> Result<SentenceOutcome, GatewayError> {
    let hc = gateway::insert_highlights(chunk, pos, &backend.descriptor().highlight_marker)?;
    match gateway::extract_answer_checked(backend, &hc)? {
        Extraction::Accepted(span) => {
            let question = gateway::generate_question(backend, chunk, &span)?;
            Ok(SentenceOutcome::Pair { question, answer: span.text })
        }
        Extraction::Rejected { .. } => Ok(SentenceOutcome::Rejected),
        Extraction::NoAnswer => Ok(SentenceOutcome::NoAnswer),
    }
}

fn require(backend: &dyn Backend, capability: Capability) -> Result<(), PipelineError> {
    if backend.descriptor().supports(capability) {
        Ok(())
    } else {
        Err(PipelineError::Unsupported { backend: backend.descriptor().name.clone(), capability })
    }
}

fn derive_run_id(kind: SourceKind, backend: &BackendDescriptor, config: &GenerateConfig, passages: &[Passage]) -> String {
    let mut h = Sha256::new();
    h.update(kind.as_str());
    h.update([0]);
    h.update(serde_json::to_vec(backend).unwrap_or_default());
    h.update(config.token_limit.to_le_bytes());
    h.update([u8::from(config.dedupe), u8::from(config.roundtrip_filter)]);
    for p in passages {
        h.update(p.label());
        h.update([0]);
        for (_, text) in &p.pieces {
            h.update(text);
            h.update([0]);
        }
    }
    let digest = h.finalize();
    let hex: String = digest[..6].iter().map(|b| format!("{b:02x}")).collect();
    format!("{}-{hex}", kind.as_str())
}

/// Generates a question set.
///
/// Backend failures do not discard completed work: the returned
/// [`PipelineError::Partial`] carries every pair that did complete, with a
/// failure marker in its manifest.
pub fn generate(
    input: SourceInput<'_>,
    source_kind: SourceKind,
    backend: &dyn Backend,
    config: &GenerateConfig,
) -> Result<QuestionSet, PipelineError> {
    let started_at = Utc::now();
    require(backend, Capability::ExtractAnswer)?;
    require(backend, Capability::GenerateQuestion)?;
    if config.roundtrip_filter {
        require(backend, Capability::AnswerQuestion)?;
    }
    let chunk_limit = config
        .token_limit
        .checked_sub(HIGHLIGHT_MARGIN)
        .filter(|l| *l > 0)
        .ok_or(PipelineError::TokenLimitTooSmall { limit: config.token_limit, margin: HIGHLIGHT_MARGIN })?;

    let input_name = match input {
        SourceInput::Document(_) => "a document",
        SourceInput::Summaries { .. } => "summary sets",
        SourceInput::Text { .. } => "free text",
    };
    match (source_kind, &input) {
        (SourceKind::HumanSummary, SourceInput::Summaries { .. }) => {}
        (SourceKind::Original | SourceKind::AutoSummary, SourceInput::Document(_) | SourceInput::Text { .. }) => {}
        _ => return Err(PipelineError::ModeMismatch { kind: source_kind, input: input_name }),
    }

    let mut passages = passages(&input, config.summary_granularity);
    passages.retain(|p| p.pieces.iter().any(|(_, t)| !t.trim().is_empty()));
    if passages.is_empty() {
        return Err(PipelineError::EmptyInput);
    }
    let run_id = config
        .run_id
        .clone()
        .unwrap_or_else(|| derive_run_id(source_kind, backend.descriptor(), config, &passages));

    let mut failures: Vec<(String, GatewayError)> = Vec::new();

    if source_kind == SourceKind::AutoSummary {
        require(backend, Capability::Summarize)?;
        let summaries = config.execution.map(&passages, |p| {
            let text = p.pieces.iter().map(|(_, t)| t.as_str()).collect::<Vec<_>>().join(" ");
            gateway::summarize_long(backend, &text, config.token_limit, config.execution)
        });
        let mut kept = Vec::with_capacity(passages.len());
        for (mut p, summary) in passages.into_iter().zip(summaries) {
            match summary {
                Ok(s) => {
                    let section = p.pieces[0].0.clone();
                    p.pieces = vec![(section, s)];
                    kept.push(p);
                }
                Err(e) => failures.push((p.label(), e)),
            }
        }
        passages = kept;
    }

    let segmented: Vec<SegmentedPassage> = passages
        .into_iter()
        .map(|p| segment(p, backend, chunk_limit))
        .collect::<Result<_, _>>()?;

    // (passage, chunk, position within chunk)
    let jobs: Vec<(usize, usize, usize)> = segmented
        .iter()
        .enumerate()
        .flat_map(|(pi, sp)| {
            sp.chunks
                .iter()
                .enumerate()
                .flat_map(move |(ci, c)| (0..c.sentences.len()).map(move |si| (pi, ci, si)))
        })
        .collect();
    let outcomes = config
        .execution
        .map(&jobs, |&(pi, ci, si)| process_sentence(backend, &segmented[pi].chunks[ci], si));

    let mut pairs = Vec::new();
    let mut contexts = BTreeMap::new();
    let mut rejected_spans = 0;
    for (&(pi, ci, si), outcome) in jobs.iter().zip(outcomes) {
        let sp = &segmented[pi];
        let chunk = &sp.chunks[ci];
        let sentence = &chunk.sentences[si];
        let section_id = sp.sentence_sections[sentence.index].clone();
        match outcome {
            Ok(SentenceOutcome::Pair { question, answer }) => {
                let pair_id = format!("{run_id}-{:05}", pairs.len());
                contexts.insert(pair_id.clone(), chunk.text());
                pairs.push(QAPair {
                    pair_id,
                    question,
                    answer,
                    source_kind,
                    doc_id: sp.passage.doc_id.clone(),
                    chapter_id: sp.passage.chapter_id.clone(),
                    section_id,
                    chunk_index: chunk.chunk_index,
                    sentence_index: sentence.index,
                    author_id: sp.passage.author_id.clone(),
                    run_id: run_id.clone(),
                });
            }
            Ok(SentenceOutcome::Rejected) => rejected_spans += 1,
            Ok(SentenceOutcome::NoAnswer) => {}
            Err(e) => failures.push((
                format!("{}/{}/{}/{}", sp.passage.chapter_id, section_id, chunk.chunk_index, sentence.index),
                e,
            )),
        }
    }

    let mut qs = QuestionSet {
        run_id: run_id.clone(),
        source_kind,
        pairs,
        manifest: RunManifest {
            run_id,
            source_kind,
            backend: backend.descriptor().clone(),
            token_counter: backend.token_counter().name().to_owned(),
            token_limit: config.token_limit,
            chunk_token_limit: chunk_limit,
            summary_granularity: config.summary_granularity,
            dedupe: config.dedupe,
            roundtrip_filter: config.roundtrip_filter,
            seed: None,
            sentence_count: segmented.iter().map(|s| s.sentence_sections.len()).sum(),
            chunk_count: segmented.iter().map(|s| s.chunks.len()).sum(),
            rejected_spans,
            pair_count: 0,
            failure: None,
            started_at,
            finished_at: started_at,
        },
        contexts,
    };

    if config.dedupe {
        qs = dedupe(qs);
    }
    if config.roundtrip_filter && failures.is_empty() {
        match roundtrip_filter(qs.clone(), backend, config.execution) {
            Ok(filtered) => qs = filtered,
            Err(PipelineError::Gateway(e)) => failures.push(("roundtrip_filter".to_owned(), e)),
            Err(other) => return Err(other),
        }
    }
    qs.manifest.pair_count = qs.pairs.len();
    qs.manifest.finished_at = Utc::now();

    if failures.is_empty() {
        return Ok(qs);
    }
    let items: Vec<String> = failures.iter().map(|(item, _)| item.clone()).collect();
    let (_, first) = failures.swap_remove(0);
    qs.manifest.failure = Some(FailureMarker { message: first.to_string(), failed_items: items });
    Err(PipelineError::Partial { partial: Box::new(qs), source: first })
}

/// Drops later pairs whose case-folded (question, answer) already appeared.
pub fn dedupe(mut qs: QuestionSet) -> QuestionSet {
    let mut seen = HashSet::new();
    qs.pairs.retain(|p| seen.insert((p.question.to_lowercase(), p.answer.to_lowercase())));
    let kept: HashSet<&str> = qs.pairs.iter().map(|p| p.pair_id.as_str()).collect();
    qs.contexts.retain(|id, _| kept.contains(id.as_str()));
    qs.manifest.pair_count = qs.pairs.len();
    qs
}

/// True when the predicted and stored answers agree after case-folding and
/// punctuation removal (either contains the other).
pub fn answers_agree(predicted: &str, stored: &str) -> bool {
    let (p, s) = (loose_key(predicted), loose_key(stored));
    !p.is_empty() && !s.is_empty() && (p.contains(&s) || s.contains(&p))
}

/// Keeps pairs whose question, answered by the backend against the
/// originating chunk, yields the stored answer.
pub fn roundtrip_filter(qs: QuestionSet, backend: &dyn Backend, exec: Execution) -> Result<QuestionSet, PipelineError> {
    require(backend, Capability::AnswerQuestion)?;
    let mut qs = qs;
    let contexts: Vec<&str> = qs
        .pairs
        .iter()
        .map(|p| {
            qs.contexts
                .get(&p.pair_id)
                .map(String::as_str)
                .ok_or_else(|| PipelineError::MissingContext(p.pair_id.clone()))
        })
        .collect::<Result<_, _>>()?;
    let verdicts = exec.map_range(qs.pairs.len(), |i| {
        let pair = &qs.pairs[i];
        gateway::answer_question_text(backend, contexts[i], &pair.question).map(|pred| answers_agree(&pred, &pair.answer))
    });
    let keep: Vec<bool> = verdicts.into_iter().collect::<Result<_, _>>()?;
    let mut flags = keep.into_iter();
    qs.pairs.retain(|_| flags.next().unwrap_or(false));
    let kept: HashSet<String> = qs.pairs.iter().map(|p| p.pair_id.clone()).collect();
    qs.contexts.retain(|id, _| kept.contains(id));
    qs.manifest.pair_count = qs.pairs.len();
    Ok(qs)
}
