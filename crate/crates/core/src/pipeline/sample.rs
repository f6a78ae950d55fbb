use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{QuestionSet, SourceKind};

/// Pair ids drawn for human evaluation: the same quota from every source.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalSet {
    pub eval_id: String,
    pub entries: Vec<String>,
    pub per_source_quota: usize,
    pub seed: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SampleError {
    #[error("quota {quota} exceeds the {available} pairs of {source_kind} set {run_id:?}")]
    QuotaTooLarge { quota: usize, available: usize, source_kind: SourceKind, run_id: String },
    #[error("more than one question set for source {0}")]
    DuplicateSource(SourceKind),
    #[error("pair id {0:?} appears in more than one set")]
    DuplicatePair(String),
}

/// Draws `quota` pairs uniformly without replacement from each set.
///
/// A ChaCha8 stream seeded with `seed` is consumed set by set, in the given
/// order, so the result is reproducible across platforms. Within a set the
/// sampled pairs keep their generation order.
pub fn sample_eval_set(sets: &[QuestionSet], quota: usize, seed: u64) -> Result<EvalSet, SampleError> {
    let mut kinds = HashSet::new();
    for set in sets {
        if !kinds.insert(set.source_kind) {
            return Err(SampleError::DuplicateSource(set.source_kind));
        }
        if set.pairs.len() < quota {
            return Err(SampleError::QuotaTooLarge {
                quota,
                available: set.pairs.len(),
                source_kind: set.source_kind,
                run_id: set.run_id.clone(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(quota * sets.len());
    let mut seen = HashSet::new();
    for set in sets {
        let mut picked = rand::seq::index::sample(&mut rng, set.pairs.len(), quota).into_vec();
        picked.sort_unstable();
        for i in picked {
            let id = &set.pairs[i].pair_id;
            if !seen.insert(id.clone()) {
                return Err(SampleError::DuplicatePair(id.clone()));
            }
            entries.push(id.clone());
        }
    }
    Ok(EvalSet { eval_id: format!("eval-{seed}"), entries, per_source_quota: quota, seed })
}
