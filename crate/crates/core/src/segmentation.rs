//! Sentence splitting and balanced, token-bounded chunking.
//!
//! A passage is split into sentences, then grouped into contiguous chunks so
//! that no sentence straddles two chunks, every chunk fits the token budget,
//! and chunk sizes (in sentences) differ by at most one with the larger
//! groups first. The number of chunks is the smallest that satisfies the
//! budget under that balanced profile.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::collapse_whitespace;

/// Tokens reserved for the two highlight markers inserted after chunking.
pub const HIGHLIGHT_MARGIN: usize = 8;

/// Default model input budget.
pub const DEFAULT_TOKEN_LIMIT: usize = 512;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SegmentationError {
    #[error("token limit must be at least 1")]
    ZeroTokenLimit,
}

/// Counts model input tokens for a piece of text.
pub trait TokenCounter: Send + Sync {
    /// Recorded in run manifests.
    fn name(&self) -> &str;
    fn count(&self, text: &str) -> usize;
}

/// Whitespace-delimited token count; the fallback when a backend has no
/// tokenizer of its own.
#[derive(Clone, Copy, Debug, Default)]
pub struct WhitespaceCounter;

impl TokenCounter for WhitespaceCounter {
    fn name(&self) -> &str {
        "whitespace"
    }

    fn count(&self, text: &str) -> usize {
        text.split_whitespace().count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    /// Position within the source passage.
    pub index: usize,
    pub token_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub chunk_index: usize,
    pub sentences: Vec<Sentence>,
    pub total_tokens: usize,
    /// Set when the chunk is a single sentence larger than the budget.
    pub oversized: bool,
}

impl Chunk {
    /// Member sentences joined with single spaces.
    pub fn text(&self) -> String {
        join_sentences(&self.sentences)
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

pub fn join_sentences(sentences: &[Sentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&s.text);
    }
    out
}

/// Splits text into sentence strings.
pub trait SentenceSplitter: Send + Sync {
    fn split(&self, text: &str) -> Vec<String>;
}

/// Punctuation-driven splitter.
///
/// A boundary falls after a token ending in `.`, `!` or `?` (optionally
/// followed by closing quotes or brackets) when the next token starts with an
/// uppercase letter. Known abbreviations and single-letter initials suppress
/// the split.
#[derive(Clone, Debug)]
pub struct RuleSplitter {
    abbreviations: Vec<String>,
}

const DEFAULT_ABBREVIATIONS: &[&str] = &[
    "e.g.", "i.e.", "fig.", "figs.", "eq.", "eqs.", "cf.", "vs.", "al.", "sec.", "ch.", "chap.",
    "no.", "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "jr.", "sr.", "approx.", "resp.", "p.",
    "pp.", "vol.", "ed.", "eds.",
];

impl Default for RuleSplitter {
    fn default() -> Self {
        Self::new(DEFAULT_ABBREVIATIONS.iter().copied())
    }
}

impl RuleSplitter {
    pub fn new<'a>(abbreviations: impl IntoIterator<Item = &'a str>) -> Self {
        Self {
            abbreviations: abbreviations.into_iter().map(str::to_lowercase).collect(),
        }
    }

    fn ends_sentence(&self, token: &str, next: &str) -> bool {
        let core = token.trim_end_matches(is_closing);
        let Some(last) = core.chars().last() else {
            return false;
        };
        if !matches!(last, '.' | '!' | '?') {
            return false;
        }
        let starts_upper = next
            .trim_start_matches(is_opening)
            .chars()
            .next()
            .is_some_and(char::is_uppercase);
        if !starts_upper {
            return false;
        }
        if last == '.' {
            let word = core.trim_start_matches(is_opening).to_lowercase();
            if self.abbreviations.contains(&word) {
                return false;
            }
            // Initials such as "J. Smith".
            let initial = core.trim_start_matches(is_opening);
            let mut chars = initial.chars();
            if let (Some(c), Some('.'), None) = (chars.next(), chars.next(), chars.next()) {
                if c.is_uppercase() {
                    return false;
                }
            }
        }
        true
    }
}

fn is_closing(c: char) -> bool {
    matches!(c, ')' | ']' | '"' | '\'' | '\u{201d}' | '\u{2019}')
}

fn is_opening(c: char) -> bool {
    matches!(c, '(' | '[' | '"' | '\'' | '\u{201c}' | '\u{2018}')
}

impl SentenceSplitter for RuleSplitter {
    fn split(&self, text: &str) -> Vec<String> {
        let normalized = collapse_whitespace(text);
        let tokens: Vec<&str> = normalized.split(' ').filter(|t| !t.is_empty()).collect();
        let mut out = Vec::new();
        let mut start = 0;
        for i in 0..tokens.len() {
            let boundary = match tokens.get(i + 1) {
                Some(next) => self.ends_sentence(tokens[i], next),
                None => true,
            };
            if boundary {
                out.push(tokens[start..=i].join(" "));
                start = i + 1;
            }
        }
        out
    }
}

/// Splits with the default rules and whitespace token counts.
pub fn split_sentences(text: &str) -> Vec<Sentence> {
    split_sentences_with(text, &RuleSplitter::default(), &WhitespaceCounter)
}

pub fn split_sentences_with(
    text: &str,
    splitter: &dyn SentenceSplitter,
    counter: &dyn TokenCounter,
) -> Vec<Sentence> {
    splitter
        .split(text)
        .into_iter()
        .enumerate()
        .map(|(index, text)| {
            let token_count = counter.count(&text).max(1);
            Sentence { text, index, token_count }
        })
        .collect()
}

/// One group of a chunk plan: a contiguous range of sentence positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlannedChunk {
    pub range: Range<usize>,
    pub oversized: bool,
}

/// Sizes of the balanced partition of `n` items into `k` groups: `n % k`
/// groups of `ceil(n/k)` followed by groups of `floor(n/k)`.
pub fn balanced_sizes(n: usize, k: usize) -> impl Iterator<Item = usize> {
    let (q, r) = (n / k, n % k);
    (0..k).map(move |i| if i < r { q + 1 } else { q })
}

/// Plans chunk boundaries over per-sentence token counts.
///
/// Sentences larger than `token_limit` each become a flagged chunk of their
/// own; the runs between them are partitioned independently.
pub fn plan_chunks(token_counts: &[usize], token_limit: usize) -> Result<Vec<PlannedChunk>, SegmentationError> {
    if token_limit == 0 {
        return Err(SegmentationError::ZeroTokenLimit);
    }
    let mut plan = Vec::new();
    let mut run_start = 0;
    for (i, &count) in token_counts.iter().enumerate() {
        if count > token_limit {
            plan_run(token_counts, run_start..i, token_limit, &mut plan);
            plan.push(PlannedChunk { range: i..i + 1, oversized: true });
            run_start = i + 1;
        }
    }
    plan_run(token_counts, run_start..token_counts.len(), token_limit, &mut plan);
    Ok(plan)
}

// Every sentence in `run` fits on its own, so k = n always succeeds.
fn plan_run(counts: &[usize], run: Range<usize>, limit: usize, plan: &mut Vec<PlannedChunk>) {
    let n = run.len();
    if n == 0 {
        return;
    }
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0usize);
    for &c in &counts[run.clone()] {
        prefix.push(prefix.last().unwrap() + c);
    }
    for k in 1..=n {
        let mut offset = 0;
        let fits = balanced_sizes(n, k).all(|size| {
            let total = prefix[offset + size] - prefix[offset];
            offset += size;
            total <= limit
        });
        if fits {
            let mut offset = run.start;
            for size in balanced_sizes(n, k) {
                plan.push(PlannedChunk { range: offset..offset + size, oversized: false });
                offset += size;
            }
            return;
        }
    }
    unreachable!("a run of individually fitting sentences always admits k = n");
}

/// Groups sentences into chunks of at most `token_limit` tokens.
pub fn chunk(sentences: &[Sentence], token_limit: usize) -> Result<Vec<Chunk>, SegmentationError> {
    let counts: Vec<usize> = sentences.iter().map(|s| s.token_count).collect();
    let plan = plan_chunks(&counts, token_limit)?;
    Ok(plan
        .into_iter()
        .enumerate()
        .map(|(chunk_index, p)| {
            let members = sentences[p.range.clone()].to_vec();
            let total_tokens = members.iter().map(|s| s.token_count).sum();
            Chunk { chunk_index, sentences: members, total_tokens, oversized: p.oversized }
        })
        .collect())
}
