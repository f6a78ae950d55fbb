//! Question sets on disk: one [`QAPair`] per line, with the run manifest in a
//! sidecar `<stem>.manifest.json`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::{EvalSet, QAPair, QuestionSet, RunManifest};

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Json {
        path: String,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: pairs belong to run {found:?}, manifest says {expected:?}")]
    RunMismatch { path: String, expected: String, found: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PersistError + '_ {
    move |source| PersistError::Io { path: path.display().to_string(), source }
}

pub fn manifest_path(pairs_path: &Path) -> PathBuf {
    let stem = pairs_path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    pairs_path.with_file_name(format!("{stem}.manifest.json"))
}

pub fn write_question_set(qs: &QuestionSet, path: &Path) -> Result<(), PersistError> {
    let mut out = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for pair in &qs.pairs {
        serde_json::to_writer(&mut out, pair).map_err(|source| PersistError::Json {
            path: path.display().to_string(),
            line: 0,
            source,
        })?;
        out.write_all(b"\n").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))?;

    let mpath = manifest_path(path);
    let json = serde_json::to_string_pretty(&qs.manifest).map_err(|source| PersistError::Json {
        path: mpath.display().to_string(),
        line: 0,
        source,
    })?;
    std::fs::write(&mpath, json + "\n").map_err(io_err(&mpath))
}

pub fn read_question_set(path: &Path) -> Result<QuestionSet, PersistError> {
    let mpath = manifest_path(path);
    let manifest_raw = std::fs::read_to_string(&mpath).map_err(io_err(&mpath))?;
    let manifest: RunManifest = serde_json::from_str(&manifest_raw).map_err(|source| PersistError::Json {
        path: mpath.display().to_string(),
        line: 0,
        source,
    })?;
    let reader = BufReader::new(File::open(path).map_err(io_err(path))?);
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let pair: QAPair = serde_json::from_str(&line).map_err(|source| PersistError::Json {
            path: path.display().to_string(),
            line: i + 1,
            source,
        })?;
        if pair.run_id != manifest.run_id {
            return Err(PersistError::RunMismatch {
                path: path.display().to_string(),
                expected: manifest.run_id.clone(),
                found: pair.run_id,
            });
        }
        pairs.push(pair);
    }
    Ok(QuestionSet {
        run_id: manifest.run_id.clone(),
        source_kind: manifest.source_kind,
        pairs,
        manifest,
        contexts: Default::default(),
    })
}

pub fn write_eval_set(eval: &EvalSet, path: &Path) -> Result<(), PersistError> {
    let json = serde_json::to_string_pretty(eval).map_err(|source| PersistError::Json {
        path: path.display().to_string(),
        line: 0,
        source,
    })?;
    std::fs::write(path, json + "\n").map_err(io_err(path))
}

pub fn read_eval_set(path: &Path) -> Result<EvalSet, PersistError> {
    let raw = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&raw).map_err(|source| PersistError::Json { path: path.display().to_string(), line: 0, source })
}
