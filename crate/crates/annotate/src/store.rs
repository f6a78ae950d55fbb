use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use arc_swap::ArcSwap;
use chrono::{DateTime, Utc};
use flashqg::metrics::{expand_annotation, MetricsError};
use flashqg::{AnnotationLabel, AnnotationRecord, EvalSet, QuestionSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("annotation log {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("annotation log line {line}: {source}")]
    CorruptLog { line: usize, source: serde_json::Error },
    #[error("annotation log line {line} refers to unknown {what} {id:?}")]
    ForeignRecord { line: usize, what: &'static str, id: String },
    #[error("unknown annotator {0:?}")]
    UnknownAnnotator(String),
    #[error("unknown pair {0:?}")]
    UnknownPair(String),
    #[error("unknown evaluation set {0:?}")]
    UnknownEval(String),
    #[error("evaluation entry {0:?} is missing from the question sets")]
    MissingPair(String),
    #[error("duplicate annotator {0:?}")]
    DuplicateAnnotator(String),
    #[error("no annotators configured")]
    NoAnnotators,
    #[error(transparent)]
    InvalidLabel(#[from] MetricsError),
}

/// Body of a submission. `revision` is assigned by the store and ignored
/// if present; `submitted_at` defaults to the server clock.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submission {
    pub pair_id: String,
    pub annotator_id: String,
    pub label: AnnotationLabel,
    #[serde(default)]
    pub submitted_at: Option<DateTime<Utc>>,
    #[serde(default)]
    pub revision: Option<u64>,
}

/// What an annotator should look at next. Only the question and answer are
/// sent; the source passage is withheld.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum NextItem {
    Question { pair_id: String, question: String, answer: String },
    Done,
}

/// Assignment state of one annotator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub annotator_id: String,
    pub pending: Vec<String>,
    pub completed: usize,
}

#[derive(Clone, Debug)]
struct Item {
    pair_id: String,
    question: String,
    answer: String,
}

type Key = (String, String);

#[derive(Clone, Default)]
struct Snapshot {
    latest: BTreeMap<Key, AnnotationRecord>,
}

struct LogWriter {
    file: File,
    len: u64,
}

/// Durable store of annotation records for one evaluation set.
///
/// Submissions are serialized through a single writer and fsynced before
/// they are acknowledged. Readers work on an immutable snapshot that is
/// swapped atomically after each write, so they never block on the writer.
pub struct AnnotationStore {
    eval_id: String,
    items: Vec<Item>,
    index: HashMap<String, usize>,
    annotators: Vec<String>,
    path: PathBuf,
    writer: Mutex<LogWriter>,
    snapshot: ArcSwap<Snapshot>,
}

impl AnnotationStore {
    /// Opens (or creates) the log at `path` and replays it.
    ///
    /// A final line without a trailing newline is a write that was cut off
    /// by a crash: it was never acknowledged, so it is dropped and the file
    /// is truncated. Any complete line that fails to parse is an error.
    pub fn open(
        path: &Path,
        eval: &EvalSet,
        sets: &[QuestionSet],
        annotators: Vec<String>,
    ) -> Result<Self, StoreError> {
        if annotators.is_empty() {
            return Err(StoreError::NoAnnotators);
        }
        let mut seen = HashSet::new();
        for a in &annotators {
            if !seen.insert(a.as_str()) {
                return Err(StoreError::DuplicateAnnotator(a.clone()));
            }
        }

        let by_id: HashMap<&str, _> = sets.iter().flat_map(|s| &s.pairs).map(|p| (p.pair_id.as_str(), p)).collect();
        let mut items = Vec::with_capacity(eval.entries.len());
        let mut index = HashMap::new();
        for id in &eval.entries {
            let p = by_id.get(id.as_str()).ok_or_else(|| StoreError::MissingPair(id.clone()))?;
            index.insert(id.clone(), items.len());
            items.push(Item { pair_id: id.clone(), question: p.question.clone(), answer: p.answer.clone() });
        }

        let io = |source| StoreError::Io { path: path.to_owned(), source };
        let mut file = OpenOptions::new().read(true).write(true).create(true).truncate(false).open(path).map_err(io)?;
        let mut raw = Vec::new();
        file.read_to_end(&mut raw).map_err(io)?;
        let complete = raw.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        if complete < raw.len() {
            tracing::warn!(
                path = %path.display(),
                dropped_bytes = raw.len() - complete,
                "discarding incomplete final record"
            );
            file.set_len(complete as u64).map_err(io)?;
            file.sync_data().map_err(io)?;
        }
        file.seek(SeekFrom::Start(complete as u64)).map_err(io)?;

        let mut snapshot = Snapshot::default();
        for (i, line) in raw[..complete].split(|&b| b == b'\n').enumerate() {
            if line.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            let line_no = i + 1;
            let rec: AnnotationRecord =
                serde_json::from_slice(line).map_err(|source| StoreError::CorruptLog { line: line_no, source })?;
            if !index.contains_key(&rec.pair_id) {
                return Err(StoreError::ForeignRecord { line: line_no, what: "pair", id: rec.pair_id });
            }
            if !seen.contains(rec.annotator_id.as_str()) {
                return Err(StoreError::ForeignRecord { line: line_no, what: "annotator", id: rec.annotator_id });
            }
            let key = (rec.pair_id.clone(), rec.annotator_id.clone());
            match snapshot.latest.get(&key) {
                Some(prev) if prev.revision >= rec.revision => {}
                _ => {
                    snapshot.latest.insert(key, rec);
                }
            }
        }

        Ok(Self {
            eval_id: eval.eval_id.clone(),
            items,
            index,
            annotators,
            path: path.to_owned(),
            writer: Mutex::new(LogWriter { file, len: complete as u64 }),
            snapshot: ArcSwap::from_pointee(snapshot),
        })
    }

    pub fn eval_id(&self) -> &str {
        &self.eval_id
    }

    pub fn annotators(&self) -> &[String] {
        &self.annotators
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn check_annotator(&self, annotator_id: &str) -> Result<(), StoreError> {
        if self.annotators.iter().any(|a| a == annotator_id) {
            Ok(())
        } else {
            Err(StoreError::UnknownAnnotator(annotator_id.to_owned()))
        }
    }

    /// The first item, in evaluation-set order, this annotator has not yet
    /// labelled.
    pub fn next_question(&self, annotator_id: &str) -> Result<NextItem, StoreError> {
        self.check_annotator(annotator_id)?;
        let snap = self.snapshot.load();
        let next = self
            .items
            .iter()
            .find(|it| !snap.latest.contains_key(&(it.pair_id.clone(), annotator_id.to_owned())));
        Ok(match next {
            Some(it) => NextItem::Question {
                pair_id: it.pair_id.clone(),
                question: it.question.clone(),
                answer: it.answer.clone(),
            },
            None => NextItem::Done,
        })
    }

    /// Validates, appends and fsyncs one submission; returns its revision.
    pub fn record(&self, sub: Submission) -> Result<u64, StoreError> {
        self.check_annotator(&sub.annotator_id)?;
        if !self.index.contains_key(&sub.pair_id) {
            return Err(StoreError::UnknownPair(sub.pair_id));
        }
        expand_annotation(sub.label)?;

        let mut w = self.writer.lock().unwrap_or_else(|e| e.into_inner());
        let current = self.snapshot.load_full();
        let key = (sub.pair_id, sub.annotator_id);
        let revision = current.latest.get(&key).map_or(0, |r| r.revision) + 1;
        let rec = AnnotationRecord {
            pair_id: key.0.clone(),
            annotator_id: key.1.clone(),
            label: sub.label,
            submitted_at: sub.submitted_at.unwrap_or_else(Utc::now),
            revision,
        };
        let mut line = serde_json::to_vec(&rec).expect("record serializes");
        line.push(b'\n');

        let written = w.file.write_all(&line).and_then(|()| w.file.sync_data());
        if let Err(source) = written {
            // Roll back a partial append so the next write starts on a clean line.
            let len = w.len;
            let _ = w.file.set_len(len).and_then(|()| w.file.seek(SeekFrom::Start(len)).map(drop));
            return Err(StoreError::Io { path: self.path.clone(), source });
        }
        w.len += line.len() as u64;

        let mut next = (*current).clone();
        next.latest.insert(key, rec);
        self.snapshot.store(Arc::new(next));
        Ok(revision)
    }

    /// Latest record per (pair, annotator) with labels expanded, ordered by
    /// pair id then annotator id.
    pub fn export(&self) -> Vec<AnnotationRecord> {
        let snap = self.snapshot.load();
        snap.latest
            .values()
            .map(|r| AnnotationRecord {
                label: expand_annotation(r.label).expect("labels are validated before they are stored"),
                ..r.clone()
            })
            .collect()
    }

    /// Export for a named evaluation set; this instance serves exactly one.
    pub fn export_for(&self, eval_id: &str) -> Result<Vec<AnnotationRecord>, StoreError> {
        if eval_id != self.eval_id {
            return Err(StoreError::UnknownEval(eval_id.to_owned()));
        }
        Ok(self.export())
    }

    pub fn progress(&self) -> Vec<Progress> {
        let snap = self.snapshot.load();
        self.annotators
            .iter()
            .map(|a| {
                let pending: Vec<String> = self
                    .items
                    .iter()
                    .filter(|it| !snap.latest.contains_key(&(it.pair_id.clone(), a.clone())))
                    .map(|it| it.pair_id.clone())
                    .collect();
                Progress { annotator_id: a.clone(), completed: self.items.len() - pending.len(), pending }
            })
            .collect()
    }
}
