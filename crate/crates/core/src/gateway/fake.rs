//! Deterministic stand-in for a fine-tuned model.
//!
//! Rules:
//! - answer extraction: first maximal run of capitalized alphabetic tokens in
//!   the highlighted sentence, preferring runs that do not start the
//!   sentence; otherwise the longest token (earliest on ties).
//! - question generation: `"What is " + answer + "?"`.
//! - question answering: first capitalized run in the context, otherwise the
//!   longest token.
//! - summarization: the first sentence of the input.
//! - token counting: whitespace-delimited.

use std::collections::BTreeMap;

use super::{Backend, BackendDescriptor, BackendKind, Capability, GatewayError, Task, DEFAULT_HIGHLIGHT};
use crate::segmentation::split_sentences;

#[derive(Clone, Debug)]
pub struct FakeBackend {
    descriptor: BackendDescriptor,
}

impl Default for FakeBackend {
    fn default() -> Self {
        Self::new()
    }
}

impl FakeBackend {
    pub fn new() -> Self {
        Self {
            descriptor: BackendDescriptor {
                name: "fake".to_owned(),
                kind: BackendKind::Fake,
                capabilities: Capability::ALL.into_iter().collect(),
                highlight_marker: DEFAULT_HIGHLIGHT.to_owned(),
                config: BTreeMap::new(),
            },
        }
    }

    /// Restricts the advertised capabilities, for exercising capability checks.
    pub fn with_capabilities(caps: impl IntoIterator<Item = Capability>) -> Self {
        let mut b = Self::new();
        b.descriptor.capabilities = caps.into_iter().collect();
        b
    }

    fn highlighted_sentence<'a>(&self, rendered: &'a str) -> &'a str {
        let marker = self.descriptor.highlight_marker.as_str();
        let Some(start) = rendered.find(marker) else {
            return rendered;
        };
        let rest = &rendered[start + marker.len()..];
        let end = rest.find(marker).unwrap_or(rest.len());
        rest[..end].trim()
    }
}

impl Backend for FakeBackend {
    fn descriptor(&self) -> &BackendDescriptor {
        &self.descriptor
    }

    fn run(&self, task: &Task<'_>) -> Result<String, GatewayError> {
        Ok(match task {
            Task::ExtractAnswer { highlighted } => extract_rule(self.highlighted_sentence(highlighted)),
            Task::GenerateQuestion { answer, .. } => format!("What is {answer}?"),
            Task::AnswerQuestion { context, .. } => answer_rule(context),
            Task::Summarize { text } => split_sentences(text)
                .into_iter()
                .next()
                .map(|s| s.text)
                .unwrap_or_default(),
        })
    }
}

fn strip_trailing_punct(token: &str) -> &str {
    token.trim_end_matches(|c: char| !c.is_alphanumeric())
}

fn is_capitalized_word(token: &str) -> bool {
    let word = strip_trailing_punct(token);
    let mut chars = word.chars();
    chars.next().is_some_and(char::is_uppercase) && chars.all(char::is_alphabetic)
}

/// Maximal runs of capitalized tokens as (start position, token count).
///
/// A token carrying trailing punctuation closes its run so that the joined
/// run stays a contiguous substring of the source.
fn capitalized_runs(tokens: &[&str]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        if !is_capitalized_word(tokens[i]) {
            i += 1;
            continue;
        }
        let start = i;
        loop {
            let closes = strip_trailing_punct(tokens[i]).len() != tokens[i].len();
            i += 1;
            if closes || i >= tokens.len() || !is_capitalized_word(tokens[i]) {
                break;
            }
        }
        runs.push((start, i - start));
    }
    runs
}

fn render_run(tokens: &[&str], (start, len): (usize, usize)) -> String {
    strip_trailing_punct(&tokens[start..start + len].join(" ")).to_owned()
}

fn longest_token(tokens: &[&str]) -> String {
    let mut best = "";
    for t in tokens {
        let stripped = strip_trailing_punct(t);
        if stripped.chars().count() > best.chars().count() {
            best = stripped;
        }
    }
    best.to_owned()
}

// A single capitalized word at position 0 is ordinary sentence case and not
// a candidate; a longer run there is used only when nothing else qualifies.
fn extract_rule(sentence: &str) -> String {
    let tokens: Vec<&str> = sentence.split_whitespace().collect();
    let runs = capitalized_runs(&tokens);
    if let Some(&run) = runs.iter().find(|(start, _)| *start > 0) {
        return render_run(&tokens, run);
    }
    if let Some(&run) = runs.iter().find(|(start, len)| *start == 0 && *len > 1) {
        return render_run(&tokens, run);
    }
    longest_token(&tokens)
}

fn answer_rule(context: &str) -> String {
    let tokens: Vec<&str> = context.split_whitespace().collect();
    match capitalized_runs(&tokens).first() {
        Some(&run) => render_run(&tokens, run),
        None => longest_token(&tokens),
    }
}
