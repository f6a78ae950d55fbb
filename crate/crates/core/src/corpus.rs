//! Textbook ingest: chapters and sections, bolded key terms, human-written
//! summary sets, and summary statistics.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::segmentation::SentenceSplitter;
use crate::text::{collapse_whitespace, match_key};

/// Delimiter around bolded key terms in the cleaned text export.
pub const BOLD_MARKER: &str = "**";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("empty document")]
    EmptyDocument,
    #[error("malformed section header at line {line}: {reason}")]
    MalformedHeader { line: usize, reason: &'static str },
    #[error("text outside any section at line {line}")]
    TextOutsideSection { line: usize },
    #[error("duplicate chapter {0:?}")]
    DuplicateChapter(String),
    #[error("duplicate section {section:?} in chapter {chapter:?}")]
    DuplicateSection { chapter: String, section: String },
    #[error("empty section {section:?} in chapter {chapter:?}")]
    EmptySection { chapter: String, section: String },
    #[error("chapter {0:?} has no sections")]
    EmptyChapter(String),
    #[error("unbalanced bold marker at character offset {offset}")]
    UnbalancedBold { offset: usize },
    #[error("in chapter {chapter:?} section {section:?}: unbalanced bold marker at character offset {offset}")]
    UnbalancedBoldInSection { chapter: String, section: String, offset: usize },
    #[error("summary line {line}: {source}")]
    SummaryParse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("duplicate summary for author {author:?}, chapter {chapter:?}, section {section:?}")]
    DuplicateSummary { author: String, chapter: String, section: String },
    #[error("empty summary for author {author:?}, chapter {chapter:?}, section {section:?}")]
    EmptySummary { author: String, chapter: String, section: String },
    #[error("no key terms")]
    NoKeyTerms,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub section_id: String,
    /// Whitespace-normalized body with bold markers removed.
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chapter {
    pub chapter_id: String,
    pub title: String,
    pub sections: Vec<Section>,
}

impl Chapter {
    pub fn section(&self, section_id: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.section_id == section_id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KeyTerm {
    pub surface: String,
    pub chapter_id: String,
}

impl KeyTerm {
    pub fn match_key(&self) -> String {
        match_key(&self.surface)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDocument {
    pub doc_id: String,
    pub chapters: Vec<Chapter>,
    pub key_terms: Vec<KeyTerm>,
}

impl SourceDocument {
    pub fn chapter(&self, chapter_id: &str) -> Option<&Chapter> {
        self.chapters.iter().find(|c| c.chapter_id == chapter_id)
    }

    pub fn key_terms_for<'a>(&'a self, chapter_id: &'a str) -> impl Iterator<Item = &'a KeyTerm> + 'a {
        self.key_terms.iter().filter(move |k| k.chapter_id == chapter_id)
    }

    pub fn section_count(&self) -> usize {
        self.chapters.iter().map(|c| c.sections.len()).sum()
    }
}

/// Supported on-disk document layouts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DocumentFormat {
    /// `## <chapter_id> <title>` opens a chapter, `### <section_id>` opens a
    /// section, everything else is body text.
    #[default]
    PlainSections,
}

/// Reads a document from disk. The file stem becomes the `doc_id`.
pub fn load_document(path: &Path, format: DocumentFormat) -> Result<SourceDocument, CorpusError> {
    let raw = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let doc_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "document".to_owned());
    parse_document(&doc_id, &raw, format)
}

enum Line<'a> {
    Chapter { id: &'a str, title: &'a str },
    Section { id: &'a str },
    Body(&'a str),
}

fn classify(line: &str, lineno: usize) -> Result<Line<'_>, CorpusError> {
    let hashes = line.chars().take_while(|&c| c == '#').count();
    let rest = &line[hashes..];
    if !(hashes == 2 || hashes == 3) || !(rest.is_empty() || rest.starts_with(char::is_whitespace)) {
        return Ok(Line::Body(line));
    }
    let rest = rest.trim();
    let (id, tail) = match rest.split_once(char::is_whitespace) {
        Some((id, tail)) => (id, tail.trim()),
        None => (rest, ""),
    };
    if id.is_empty() {
        let reason = if hashes == 2 { "missing chapter id" } else { "missing section id" };
        return Err(CorpusError::MalformedHeader { line: lineno, reason });
    }
    Ok(if hashes == 2 {
        Line::Chapter { id, title: tail }
    } else {
        Line::Section { id }
    })
}

/// Parses the plain-sections format from a string.
pub fn parse_document(doc_id: &str, raw: &str, _format: DocumentFormat) -> Result<SourceDocument, CorpusError> {
    struct Open {
        chapter: Chapter,
        raw_sections: Vec<(String, Vec<String>)>,
    }
    let mut chapters: Vec<Open> = Vec::new();
    let mut seen_chapters = HashSet::new();

    for (i, line) in raw.lines().enumerate() {
        let lineno = i + 1;
        match classify(line, lineno)? {
            Line::Chapter { id, title } => {
                if !seen_chapters.insert(id.to_owned()) {
                    return Err(CorpusError::DuplicateChapter(id.to_owned()));
                }
                chapters.push(Open {
                    chapter: Chapter { chapter_id: id.to_owned(), title: title.to_owned(), sections: Vec::new() },
                    raw_sections: Vec::new(),
                });
            }
            Line::Section { id } => {
                let Some(open) = chapters.last_mut() else {
                    return Err(CorpusError::MalformedHeader { line: lineno, reason: "section before any chapter" });
                };
                if open.raw_sections.iter().any(|(s, _)| s == id) {
                    return Err(CorpusError::DuplicateSection {
                        chapter: open.chapter.chapter_id.clone(),
                        section: id.to_owned(),
                    });
                }
                open.raw_sections.push((id.to_owned(), Vec::new()));
            }
            Line::Body(text) => {
                if text.trim().is_empty() {
                    continue;
                }
                match chapters.last_mut().and_then(|c| c.raw_sections.last_mut()) {
                    Some((_, lines)) => lines.push(text.to_owned()),
                    None => return Err(CorpusError::TextOutsideSection { line: lineno }),
                }
            }
        }
    }

    if chapters.is_empty() {
        return Err(CorpusError::EmptyDocument);
    }

    let mut doc = SourceDocument { doc_id: doc_id.to_owned(), chapters: Vec::new(), key_terms: Vec::new() };
    for open in chapters {
        let mut chapter = open.chapter;
        if open.raw_sections.is_empty() {
            return Err(CorpusError::EmptyChapter(chapter.chapter_id));
        }
        let mut terms = Vec::new();
        for (section_id, lines) in open.raw_sections {
            let marked = collapse_whitespace(&lines.join(" "));
            if marked.is_empty() {
                return Err(CorpusError::EmptySection { chapter: chapter.chapter_id, section: section_id });
            }
            let section_terms = extract_key_terms(&marked, &chapter.chapter_id).map_err(|e| match e {
                CorpusError::UnbalancedBold { offset } => CorpusError::UnbalancedBoldInSection {
                    chapter: chapter.chapter_id.clone(),
                    section: section_id.clone(),
                    offset,
                },
                other => other,
            })?;
            terms.extend(section_terms);
            let text = collapse_whitespace(&marked.replace(BOLD_MARKER, ""));
            if text.is_empty() {
                return Err(CorpusError::EmptySection { chapter: chapter.chapter_id, section: section_id });
            }
            chapter.sections.push(Section { section_id, text });
        }
        doc.key_terms.extend(dedupe_terms(terms));
        doc.chapters.push(chapter);
    }
    Ok(doc)
}

fn dedupe_terms(terms: Vec<KeyTerm>) -> Vec<KeyTerm> {
    let mut seen = HashSet::new();
    terms.into_iter().filter(|t| seen.insert(t.match_key())).collect()
}

/// Extracts one key term per maximal `**...**` span.
///
/// Case-insensitive duplicates collapse to the first occurrence. Empty spans
/// are ignored. An opening marker without a partner is reported at its
/// character offset.
pub fn extract_key_terms(marked_text: &str, chapter_id: &str) -> Result<Vec<KeyTerm>, CorpusError> {
    let mut terms = Vec::new();
    let mut rest = marked_text;
    let mut consumed_bytes = 0;
    while let Some(open) = rest.find(BOLD_MARKER) {
        let after_open = &rest[open + BOLD_MARKER.len()..];
        let Some(close) = after_open.find(BOLD_MARKER) else {
            let byte_offset = consumed_bytes + open;
            return Err(CorpusError::UnbalancedBold { offset: marked_text[..byte_offset].chars().count() });
        };
        let surface = collapse_whitespace(&after_open[..close]);
        if !surface.is_empty() {
            terms.push(KeyTerm { surface, chapter_id: chapter_id.to_owned() });
        }
        let advance = open + 2 * BOLD_MARKER.len() + close;
        consumed_bytes += advance;
        rest = &rest[advance..];
    }
    Ok(dedupe_terms(terms))
}

/// Renders terms back into marked text, one span each.
pub fn render_key_terms(terms: &[KeyTerm]) -> String {
    terms
        .iter()
        .map(|t| format!("{BOLD_MARKER}{}{BOLD_MARKER}", t.surface))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub chapter_id: String,
    pub section_id: String,
    pub summary_text: String,
}

/// One author's section summaries, in input order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummarySet {
    pub author_id: String,
    pub entries: Vec<SummaryEntry>,
}

impl SummarySet {
    /// Builds a set, enforcing one non-empty entry per (chapter, section).
    pub fn new(author_id: impl Into<String>, entries: Vec<SummaryEntry>) -> Result<Self, CorpusError> {
        let author_id = author_id.into();
        let mut seen = HashSet::new();
        for e in &entries {
            if e.summary_text.trim().is_empty() {
                return Err(CorpusError::EmptySummary {
                    author: author_id.clone(),
                    chapter: e.chapter_id.clone(),
                    section: e.section_id.clone(),
                });
            }
            if !seen.insert((e.chapter_id.as_str(), e.section_id.as_str())) {
                return Err(CorpusError::DuplicateSummary {
                    author: author_id.clone(),
                    chapter: e.chapter_id.clone(),
                    section: e.section_id.clone(),
                });
            }
        }
        Ok(Self { author_id, entries })
    }

    pub fn chapter_ids(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.chapter_id.as_str()) {
                out.push(&e.chapter_id);
            }
        }
        out
    }
}

#[derive(Deserialize)]
struct SummaryLine {
    author_id: String,
    chapter_id: String,
    section_id: String,
    summary_text: String,
}

/// Reads summary sets from JSON Lines, grouping by author in first-seen order.
pub fn read_summary_sets(reader: impl BufRead) -> Result<Vec<SummarySet>, CorpusError> {
    let mut order: Vec<String> = Vec::new();
    let mut grouped: HashMap<String, Vec<SummaryEntry>> = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| CorpusError::Io { path: "<summaries>".into(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: SummaryLine =
            serde_json::from_str(&line).map_err(|source| CorpusError::SummaryParse { line: i + 1, source })?;
        if !grouped.contains_key(&parsed.author_id) {
            order.push(parsed.author_id.clone());
        }
        grouped.entry(parsed.author_id).or_default().push(SummaryEntry {
            chapter_id: parsed.chapter_id,
            section_id: parsed.section_id,
            summary_text: parsed.summary_text,
        });
    }
    order
        .into_iter()
        .map(|author| {
            let entries = grouped.remove(&author).unwrap_or_default();
            SummarySet::new(author, entries)
        })
        .collect()
}

pub fn load_summary_sets(path: &Path) -> Result<Vec<SummarySet>, CorpusError> {
    let file = std::fs::File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_summary_sets(std::io::BufReader::new(file))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub key_term_coverage: f64,
    pub total_sentences: usize,
    pub avg_sentence_length: f64,
}

/// Key-term coverage and sentence statistics of one summary set.
///
/// Coverage is tested against the concatenation of all summary texts.
/// Sentences are split per entry; lengths are space-delimited token counts.
pub fn summary_stats(
    summary_set: &SummarySet,
    key_terms: &[KeyTerm],
    splitter: &dyn SentenceSplitter,
) -> Result<SummaryStats, CorpusError> {
    if key_terms.is_empty() {
        return Err(CorpusError::NoKeyTerms);
    }
    let joined = summary_set
        .entries
        .iter()
        .map(|e| e.summary_text.as_str())
        .collect::<Vec<_>>()
        .join(" ");
    let haystack = match_key(&joined);
    let covered = key_terms
        .iter()
        .filter(|t| {
            let key = t.match_key();
            !key.is_empty() && haystack.contains(&key)
        })
        .count();

    let mut total_sentences = 0usize;
    let mut total_tokens = 0usize;
    for entry in &summary_set.entries {
        for sentence in splitter.split(&entry.summary_text) {
            total_sentences += 1;
            total_tokens += sentence.split(' ').filter(|t| !t.is_empty()).count();
        }
    }
    let avg_sentence_length = if total_sentences == 0 {
        0.0
    } else {
        total_tokens as f64 / total_sentences as f64
    };
    Ok(SummaryStats {
        key_term_coverage: covered as f64 / key_terms.len() as f64,
        total_sentences,
        avg_sentence_length,
    })
}
