use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::kappa::cohen_kappa_detailed;
use super::labels::{expand_annotation, AnnotationLabel, AnnotationRecord, Category};
use super::MetricsError;
use crate::exec::Execution;
use crate::pipeline::{EvalSet, QAPair, QuestionSet, SourceKind};

/// Everything computed from a fully annotated evaluation set.
///
/// Pairwise kappas are ordered (first-second, second-third, third-first)
/// over `annotators`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub eval_id: String,
    pub annotators: Vec<String>,
    pub item_count: usize,
    pub per_annotator_yes_rate: BTreeMap<Category, BTreeMap<String, f64>>,
    pub pairwise_kappa: BTreeMap<Category, [f64; 3]>,
    /// Marks kappas computed under the constant-rater rule.
    pub degenerate_kappa: BTreeMap<Category, [bool; 3]>,
    pub majority_labels: BTreeMap<String, BTreeMap<Category, bool>>,
    pub proportions_by_source: BTreeMap<SourceKind, BTreeMap<Category, f64>>,
    pub proportions_by_chapter: BTreeMap<String, BTreeMap<Category, f64>>,
    pub items_by_source: BTreeMap<SourceKind, usize>,
    pub items_by_chapter: BTreeMap<String, usize>,
}

/// Builds the agreement report.
///
/// Only records for evaluation-set pairs are considered; for each (pair,
/// annotator) the highest revision wins. Exactly three annotators are
/// required, ordered lexicographically unless `annotator_order` is given.
pub fn agreement_report(
    records: &[AnnotationRecord],
    eval_set: &EvalSet,
    sets: &[QuestionSet],
    annotator_order: Option<&[String]>,
    exec: Execution,
) -> Result<AgreementReport, MetricsError> {
    let by_id: HashMap<&str, &QAPair> =
        sets.iter().flat_map(|s| s.pairs.iter()).map(|p| (p.pair_id.as_str(), p)).collect();
    let mut items: Vec<&QAPair> = Vec::with_capacity(eval_set.entries.len());
    for id in &eval_set.entries {
        items.push(by_id.get(id.as_str()).copied().ok_or_else(|| MetricsError::UnknownPair(id.clone()))?);
    }
    let in_eval: BTreeSet<&str> = eval_set.entries.iter().map(String::as_str).collect();

    let mut latest: HashMap<(&str, &str), &AnnotationRecord> = HashMap::new();
    for r in records.iter().filter(|r| in_eval.contains(r.pair_id.as_str())) {
        let key = (r.pair_id.as_str(), r.annotator_id.as_str());
        match latest.get(&key) {
            Some(prev) if prev.revision >= r.revision => {}
            _ => {
                latest.insert(key, r);
            }
        }
    }

    let annotators: Vec<String> = match annotator_order {
        Some(order) => order.to_vec(),
        None => latest
            .keys()
            .map(|(_, a)| a.to_string())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    };
    if annotators.len() != 3 {
        return Err(MetricsError::WrongAnnotatorCount(annotators));
    }

    // labels[item][annotator]
    let mut labels: Vec<[AnnotationLabel; 3]> = Vec::with_capacity(items.len());
    let mut missing = Vec::new();
    for item in &items {
        let mut row = [AnnotationLabel::all(super::Judgment::No); 3];
        let mut complete = true;
        for (k, a) in annotators.iter().enumerate() {
            match latest.get(&(item.pair_id.as_str(), a.as_str())) {
                Some(r) => {
                    row[k] = expand_annotation(r.label).map_err(|e| MetricsError::InvalidRecord {
                        pair_id: r.pair_id.clone(),
                        annotator_id: r.annotator_id.clone(),
                        reason: e.to_string(),
                    })?;
                }
                None => complete = false,
            }
        }
        if !complete {
            missing.push(item.pair_id.clone());
        }
        labels.push(row);
    }
    if !missing.is_empty() {
        return Err(MetricsError::MissingAnnotations(missing));
    }
    let n = items.len();

    struct PerCategory {
        rates: [f64; 3],
        kappa: [f64; 3],
        degenerate: [bool; 3],
        majority: Vec<bool>,
    }
    let per_category = exec.map(&Category::ALL, |&cat| -> Result<PerCategory, MetricsError> {
        let votes: Vec<[bool; 3]> = labels
            .iter()
            .map(|row| Ok([row[0].is_yes(cat)?, row[1].is_yes(cat)?, row[2].is_yes(cat)?]))
            .collect::<Result<_, MetricsError>>()?;
        let column = |k: usize| votes.iter().map(|v| v[k]).collect::<Vec<bool>>();
        let cols = [column(0), column(1), column(2)];
        let mut rates = [0.0; 3];
        for k in 0..3 {
            rates[k] = if n == 0 { 0.0 } else { cols[k].iter().filter(|&&y| y).count() as f64 / n as f64 };
        }
        let mut kappa = [0.0; 3];
        let mut degenerate = [false; 3];
        if n > 0 {
            for (slot, (x, y)) in [(0, 1), (1, 2), (2, 0)].into_iter().enumerate() {
                let k = cohen_kappa_detailed(&cols[x], &cols[y])?;
                kappa[slot] = k.kappa;
                degenerate[slot] = k.degenerate;
            }
        }
        let majority = votes.iter().map(|v| v.iter().filter(|&&y| y).count() >= 2).collect();
        Ok(PerCategory { rates, kappa, degenerate, majority })
    });
    let per_category: Vec<PerCategory> = per_category.into_iter().collect::<Result<_, _>>()?;

    let mut report = AgreementReport {
        eval_id: eval_set.eval_id.clone(),
        annotators: annotators.clone(),
        item_count: n,
        per_annotator_yes_rate: BTreeMap::new(),
        pairwise_kappa: BTreeMap::new(),
        degenerate_kappa: BTreeMap::new(),
        majority_labels: BTreeMap::new(),
        proportions_by_source: BTreeMap::new(),
        proportions_by_chapter: BTreeMap::new(),
        items_by_source: BTreeMap::new(),
        items_by_chapter: BTreeMap::new(),
    };
    for (cat, pc) in Category::ALL.iter().zip(&per_category) {
        report.per_annotator_yes_rate.insert(
            *cat,
            annotators.iter().cloned().zip(pc.rates).collect(),
        );
        report.pairwise_kappa.insert(*cat, pc.kappa);
        report.degenerate_kappa.insert(*cat, pc.degenerate);
    }

    let mut source_yes: BTreeMap<SourceKind, BTreeMap<Category, usize>> = BTreeMap::new();
    let mut chapter_yes: BTreeMap<String, BTreeMap<Category, usize>> = BTreeMap::new();
    for (i, item) in items.iter().enumerate() {
        *report.items_by_source.entry(item.source_kind).or_default() += 1;
        *report.items_by_chapter.entry(item.chapter_id.clone()).or_default() += 1;
        let mut row = BTreeMap::new();
        for (cat, pc) in Category::ALL.iter().zip(&per_category) {
            let yes = pc.majority[i];
            row.insert(*cat, yes);
            *source_yes.entry(item.source_kind).or_default().entry(*cat).or_default() += usize::from(yes);
            *chapter_yes.entry(item.chapter_id.clone()).or_default().entry(*cat).or_default() += usize::from(yes);
        }
        report.majority_labels.insert(item.pair_id.clone(), row);
    }
    for (source, counts) in source_yes {
        let total = report.items_by_source[&source] as f64;
        report
            .proportions_by_source
            .insert(source, counts.into_iter().map(|(c, y)| (c, y as f64 / total)).collect());
    }
    for (chapter, counts) in chapter_yes {
        let total = report.items_by_chapter[&chapter] as f64;
        report
            .proportions_by_chapter
            .insert(chapter, counts.into_iter().map(|(c, y)| (c, y as f64 / total)).collect());
    }
    Ok(report)
}
