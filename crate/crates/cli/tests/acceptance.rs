//! Acceptance suite. Prints one PASS / FAIL / SKIP line per criterion and
//! exits non-zero if any criterion fails.
//!
//! The two optional criteria read inputs from `data/` at the workspace root
//! and from `QG_BACKEND_URL`; they report SKIP when those are absent.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use flashqg::corpus::{load_document, load_summary_sets, DocumentFormat};
use flashqg::gateway::HttpBackend;
use flashqg::metrics::{
    agreement_report, cohen_kappa, expand_annotation, key_term_coverage, key_term_coverage_over, majority_vote,
};
use flashqg::pipeline::{
    generate, read_eval_set, read_question_set, sample_eval_set, write_question_set, SourceInput,
};
use flashqg::segmentation::chunk;
use flashqg::{
    AnnotationLabel, AnnotationRecord, Category, Execution, FakeBackend, GenerateConfig, Judgment, KeyTerm, QAPair,
    QuestionSet, Sentence, SourceKind,
};
use flashqg_annotate::{AnnotationStore, Submission};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("chunking oracle equivalence", || done(chunking_oracle())),
        ("kappa oracle equivalence", || done(kappa_oracle())),
        ("coverage fixture and monotonicity", || done(coverage())),
        ("end-to-end determinism", || done(end_to_end())),
        ("skip logic and majority vote", || done(skip_logic())),
        ("service durability", || done(durability())),
        ("released-data reproduction (optional)", released_data),
        ("real backend run (optional)", real_backend),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Outcome::Pass(d) => println!("PASS  {name} ({secs:.2}s): {d}"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("FAIL  {name} ({secs:.2}s): {d}");
            }
            Outcome::Skip(d) => println!("SKIP  {name}: {d}"),
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn done(r: Check) -> Outcome {
    match r {
        Ok(d) => Outcome::Pass(d),
        Err(d) => Outcome::Fail(d),
    }
}

fn sentences(counts: &[usize]) -> Vec<Sentence> {
    counts
        .iter()
        .enumerate()
        .map(|(index, &token_count)| Sentence { text: format!("S{index}."), index, token_count })
        .collect()
}

fn chunking_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let start = Instant::now();
    let mut oversized = 0;
    for case in 0..1000 {
        let n = rng.gen_range(1..=12);
        let counts: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=600)).collect();
        let got: Vec<(usize, bool)> =
            chunk(&sentences(&counts), 512).map_err(|e| e.to_string())?.iter().map(|c| (c.len(), c.oversized)).collect();
        let want = oracles::chunk_plan(&counts, 512);
        ensure(got == want, || format!("case {case} {counts:?}: got {got:?}, oracle {want:?}"))?;
        oversized += got.iter().filter(|c| c.1).count();
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("1000 lists match, {oversized} oversized chunks exercised, {:.2}s", elapsed.as_secs_f64()))
}

fn kappa_oracle() -> Check {
    let y = [true, true, false, false];
    let b = [true, false, false, true];
    let hand = cohen_kappa(&y, &b).map_err(|e| e.to_string())?;
    ensure(hand == 0.0, || format!("hand example gave {hand}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut max_err: f64 = 0.0;
    let mut degenerate = 0;
    for case in 0..1000 {
        let n = rng.gen_range(2..=50);
        // Skew some raters so constant and near-constant columns occur.
        let (pa, pb) = (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
        let a: Vec<bool> = (0..n).map(|_| rng.gen_bool(pa)).collect();
        let b: Vec<bool> = (0..n).map(|_| rng.gen_bool(pb)).collect();
        let k = cohen_kappa(&a, &b).map_err(|e| e.to_string())?;
        let k_rev = cohen_kappa(&b, &a).map_err(|e| e.to_string())?;
        ensure(k.to_bits() == k_rev.to_bits(), || format!("case {case}: asymmetric {k} vs {k_rev}"))?;
        match oracles::kappa(&a, &b) {
            Some(want) => {
                max_err = max_err.max((k - want).abs());
                ensure((k - want).abs() <= 1e-12, || format!("case {case}: {k} vs oracle {want}"))?;
            }
            None => {
                degenerate += 1;
                ensure(k == 1.0, || format!("case {case}: degenerate pair gave {k}"))?;
            }
        }
    }
    Ok(format!("1000 pairs, max |error| {max_err:.1e}, {degenerate} degenerate, symmetric, hand example 0.0"))
}

fn pair(i: usize, q: &str, a: &str) -> QAPair {
    QAPair {
        pair_id: format!("r-{i:05}"),
        question: q.into(),
        answer: a.into(),
        source_kind: SourceKind::Original,
        doc_id: "d".into(),
        chapter_id: "1".into(),
        section_id: "1.1".into(),
        chunk_index: 0,
        sentence_index: i,
        author_id: None,
        run_id: "r".into(),
    }
}

fn key_terms(surfaces: &[&str]) -> Vec<KeyTerm> {
    surfaces.iter().map(|s| KeyTerm { surface: (*s).into(), chapter_id: "1".into() }).collect()
}

fn coverage() -> Check {
    let r = key_term_coverage_over(
        SourceKind::Original,
        &[pair(0, "What is edit distance?", "smoothing")],
        &key_terms(&["edit distance", "smoothing"]),
        Execution::Sequential,
    )
    .map_err(|e| e.to_string())?;
    let got = (r.pct_in_questions, r.pct_in_answers, r.pct_in_either);
    ensure(got == (0.5, 0.5, 1.0), || format!("fixture gave {got:?}"))?;

    let vocab = ["edit distance", "smoothing", "Regular Expression", "lemma", "token", "n-gram", "corpus", "stem"];
    let filler = ["what", "is", "the", "a", "of", "used", "for", "model"];
    let terms = key_terms(&vocab);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let text = |rng: &mut ChaCha8Rng| {
        (0..rng.gen_range(1..6))
            .map(|_| if rng.gen_bool(0.25) { vocab[rng.gen_range(0..vocab.len())] } else { filler[rng.gen_range(0..8)] })
            .collect::<Vec<_>>()
            .join(" ")
    };
    for seq in 0..200 {
        let mut pairs = Vec::new();
        let mut last = (0.0, 0.0, 0.0);
        for i in 0..rng.gen_range(1..20) {
            pairs.push(pair(i, &text(&mut rng), &text(&mut rng)));
            let r = key_term_coverage_over(SourceKind::Original, &pairs, &terms, Execution::Parallel)
                .map_err(|e| e.to_string())?;
            let now = (r.pct_in_questions, r.pct_in_answers, r.pct_in_either);
            ensure(now.0 >= last.0 && now.1 >= last.1 && now.2 >= last.2, || {
                format!("sequence {seq} step {i}: {last:?} -> {now:?}")
            })?;
            last = now;
        }
    }
    Ok("fixture 0.5/0.5/1.0; 200 addition sequences monotone".into())
}

const TWO: &str = "Dynamic Programming was introduced in 1957. It solves subproblems.";

fn fifty_sentences() -> String {
    let subjects = ["Dynamic Programming", "The parser", "A Markov Chain", "Each state", "Viterbi Decoding"];
    let verbs = ["stores", "reduces", "explains", "links", "ranks"];
    let objects = ["partial results", "the Forward Algorithm", "long sequences", "hidden states", "Edit Distance"];
    (0..50)
        .map(|i| format!("{} {} {} in step {i}.", subjects[i % 5], verbs[(i / 5) % 5], objects[(i * 3) % 5]))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Persisted pairs file and manifest, with the run timestamps removed.
fn persisted_without_timestamps(qs: &QuestionSet, dir: &Path) -> Result<(Vec<u8>, String), String> {
    let path = dir.join("pairs.jsonl");
    write_question_set(qs, &path).map_err(|e| e.to_string())?;
    let pairs = std::fs::read(&path).map_err(|e| e.to_string())?;
    let manifest_raw = std::fs::read_to_string(flashqg::pipeline::manifest_path(&path)).map_err(|e| e.to_string())?;
    let mut manifest: serde_json::Value = serde_json::from_str(&manifest_raw).map_err(|e| e.to_string())?;
    let m = manifest.as_object_mut().ok_or("manifest is not an object")?;
    m.remove("started_at");
    m.remove("finished_at");
    Ok((pairs, manifest.to_string()))
}

fn end_to_end() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let text = fifty_sentences();
    let cfg = GenerateConfig { token_limit: 64, ..GenerateConfig::default() };
    let mut outputs = Vec::new();
    let mut count = 0;
    for run in 0..3 {
        let exec = if run == 1 { Execution::Sequential } else { Execution::Parallel };
        let cfg = GenerateConfig { execution: exec, ..cfg.clone() };
        let qs = generate(SourceInput::Text { doc_id: "fifty", text: &text }, SourceKind::Original, &FakeBackend::new(), &cfg)
            .map_err(|e| e.to_string())?;
        ensure(qs.manifest.sentence_count == 50, || format!("split into {} sentences", qs.manifest.sentence_count))?;
        ensure(qs.pairs.len() <= 50, || format!("{} pairs", qs.pairs.len()))?;
        for p in &qs.pairs {
            let ctx = qs.contexts.get(&p.pair_id).ok_or_else(|| format!("no context for {}", p.pair_id))?;
            ensure(ctx.contains(&p.answer), || format!("{:?} not in its chunk", p.answer))?;
        }
        count = qs.pairs.len();
        outputs.push(persisted_without_timestamps(&qs, tmp.path())?);
    }
    ensure(outputs.windows(2).all(|w| w[0] == w[1]), || "runs differ".into())?;

    let qs = generate(SourceInput::Text { doc_id: "t", text: TWO }, SourceKind::Original, &FakeBackend::new(), &cfg)
        .map_err(|e| e.to_string())?;
    let got: Vec<(&str, &str)> = qs.pairs.iter().map(|p| (p.question.as_str(), p.answer.as_str())).collect();
    let want = [("What is Dynamic Programming?", "Dynamic Programming"), ("What is subproblems?", "subproblems")];
    ensure(got == want, || format!("two-sentence example gave {got:?}"))?;
    Ok(format!("{count} pairs from 50 sentences, 3 identical runs, two-sentence example exact"))
}

fn skip_logic() -> Check {
    use Judgment::{No, Skipped, Yes};
    let all = [Yes, No, Skipped];
    let mut checked = 0;
    // Every raw label, against the skip rule stated directly.
    for &a in &all {
        for &g in &all {
            for &i in &all {
                for &r in &all {
                    for &c in &all {
                        let raw = AnnotationLabel::new(a, g, i, r, c);
                        let got = expand_annotation(raw);
                        let rest = [g, i, r, c];
                        match a {
                            Yes => ensure(got.as_ref().ok() == Some(&AnnotationLabel::all(Yes)), || {
                                format!("{raw} should expand to all yes, got {got:?}")
                            })?,
                            No if rest.contains(&Skipped) => ensure(
                                got.as_ref().is_err_and(|e| e.to_string().starts_with("incomplete annotation")),
                                || format!("{raw} should be incomplete, got {got:?}"),
                            )?,
                            No => ensure(got.as_ref().ok() == Some(&raw), || format!("{raw} should be unchanged"))?,
                            Skipped => ensure(got.is_err(), || format!("{raw} should be rejected"))?,
                        }
                        checked += 1;
                    }
                }
            }
        }
    }
    let y = AnnotationLabel::all(Yes);
    let n = AnnotationLabel::all(No);
    for cat in Category::ALL {
        for mask in 0u8..8 {
            let labels: Vec<AnnotationLabel> = (0..3).map(|k| if mask & (1 << k) != 0 { y } else { n }).collect();
            let want = mask.count_ones() >= 2;
            for perm in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                let permuted: Vec<_> = perm.iter().map(|&p| labels[p]).collect();
                let got = majority_vote(&permuted, cat).map_err(|e| e.to_string())?;
                ensure(got == want, || format!("{cat} pattern {mask:03b} perm {perm:?}: {got}"))?;
            }
        }
    }
    ensure(majority_vote(&[y, y], Category::Acceptable).is_err(), || "two labels accepted".into())?;
    ensure(
        majority_vote(&[AnnotationLabel::accept(), y, y], Category::Correct).is_err(),
        || "unexpanded label accepted".into(),
    )?;
    Ok(format!("{checked} raw labels, 8 vote patterns x 6 orders x 5 categories"))
}

fn durability() -> Check {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = GenerateConfig { token_limit: 40, ..GenerateConfig::default() };
    let qs = generate(
        SourceInput::Text { doc_id: "fifty", text: &fifty_sentences() },
        SourceKind::Original,
        &FakeBackend::new(),
        &cfg,
    )
    .map_err(|e| e.to_string())?;
    let eval = sample_eval_set(std::slice::from_ref(&qs), 6, 5).map_err(|e| e.to_string())?;
    let annotators: Vec<String> = ["a1", "a2", "a3"].map(String::from).to_vec();
    let sets = std::slice::from_ref(&qs);
    let open = |p: &Path| AnnotationStore::open(p, &eval, sets, annotators.clone()).map_err(|e| e.to_string());
    let export = |s: &AnnotationStore| serde_json::to_vec(&s.export()).expect("export serializes");

    let log = tmp.path().join("log.jsonl");
    let store = open(&log)?;
    let labels = [
        AnnotationLabel::accept(),
        AnnotationLabel::new(Judgment::No, Judgment::Yes, Judgment::No, Judgment::Yes, Judgment::Yes),
        AnnotationLabel::all(Judgment::No),
    ];
    let mut exports = vec![export(&store)];
    let mut t = 0i64;
    for (i, id) in eval.entries.iter().enumerate() {
        for (j, a) in annotators.iter().enumerate() {
            // A few resubmissions so revisions above 1 are replayed too.
            for _ in 0..1 + usize::from((i + j) % 4 == 0) {
                t += 1;
                let sub = Submission {
                    pair_id: id.clone(),
                    annotator_id: a.clone(),
                    label: labels[(i + j + t as usize) % 3],
                    submitted_at: Some(chrono_at(t)),
                    revision: None,
                };
                store.record(sub).map_err(|e| e.to_string())?;
                exports.push(export(&store));
            }
        }
    }
    let first = export(&store);
    ensure(first == export(&store), || "double export differs".into())?;
    drop(store);

    let bytes = std::fs::read(&log).map_err(|e| e.to_string())?;
    let crash = tmp.path().join("crash.jsonl");
    for cut in 0..=bytes.len() {
        std::fs::write(&crash, &bytes[..cut]).map_err(|e| e.to_string())?;
        let completed = bytes[..cut].iter().filter(|&&b| b == b'\n').count();
        let store = open(&crash).map_err(|e| format!("cut {cut}: {e}"))?;
        ensure(export(&store) == exports[completed], || format!("crash at byte {cut}: export mismatch"))?;
        ensure(export(&store) == export(&store), || format!("crash at byte {cut}: double export differs"))?;
    }
    let reopened = open(&log)?;
    ensure(export(&reopened) == first, || "clean reopen differs".into())?;
    let records: Vec<AnnotationRecord> = reopened.export();
    ensure(records.len() == 3 * eval.entries.len(), || format!("{} records", records.len()))?;
    Ok(format!("{} writes, {} crash points replayed", exports.len() - 1, bytes.len() + 1))
}

fn chrono_at(secs: i64) -> chrono::DateTime<chrono::Utc> {
    chrono::DateTime::from_timestamp(1_700_000_000 + secs, 0).expect("valid timestamp")
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Expected layout under `data/`:
/// `eval.json`, `annotations.json` (exported records) or
/// `annotations.jsonl` (service log), `sets/{original,human_summary,auto_summary}.jsonl`,
/// optional `annotators.txt` (A1..A3 ids, one per line), and optional
/// `document.txt` for key-term coverage.
fn released_data() -> Outcome {
    let dir = data_dir();
    let ann = ["annotations.json", "annotations.jsonl"].iter().map(|f| dir.join(f)).find(|p| p.exists());
    let (Some(ann), true) = (ann, dir.join("eval.json").exists()) else {
        return Outcome::Skip(format!("no annotation data under {}", dir.display()));
    };
    match released_data_check(&dir, &ann) {
        Ok(d) => Outcome::Pass(d),
        Err(d) => Outcome::Fail(d),
    }
}

fn load_records(path: &Path) -> Result<Vec<AnnotationRecord>, String> {
    let raw = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    if raw.trim_start().starts_with('[') {
        return serde_json::from_str(&raw).map_err(|e| e.to_string());
    }
    raw.lines().filter(|l| !l.trim().is_empty()).map(|l| serde_json::from_str(l).map_err(|e| e.to_string())).collect()
}

fn near(errors: &mut Vec<String>, what: String, got: f64, want: f64, tol: f64) {
    if (got - want).abs() > tol + 1e-9 {
        errors.push(format!("{what}: {got:.3} vs {want}"));
    }
}

fn released_data_check(dir: &Path, ann: &Path) -> Check {
    let start = Instant::now();
    let eval = read_eval_set(&dir.join("eval.json")).map_err(|e| e.to_string())?;
    let sets: Vec<QuestionSet> = SourceKind::ALL
        .iter()
        .map(|k| read_question_set(&dir.join("sets").join(format!("{}.jsonl", k.as_str()))).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    let records = load_records(ann)?;
    let order: Option<Vec<String>> = std::fs::read_to_string(dir.join("annotators.txt"))
        .ok()
        .map(|s| s.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect());
    let report = agreement_report(&records, &eval, &sets, order.as_deref(), Execution::Parallel)
        .map_err(|e| e.to_string())?;

    let mut errors = Vec::new();
    let table4: [(Category, [f64; 3], [f64; 3]); 5] = [
        (Category::Acceptable, [69.7, 48.7, 47.7], [0.41, 0.50, 0.33]),
        (Category::Grammatical, [98.3, 90.7, 86.3], [0.16, 0.49, 0.10]),
        (Category::Interpretable, [79.7, 70.7, 59.7], [0.51, 0.43, 0.32]),
        (Category::Relevant, [79.0, 71.3, 69.0], [0.41, 0.29, 0.25]),
        (Category::Correct, [91.7, 90.7, 90.0], [0.03, 0.08, 0.06]),
    ];
    for (cat, rates, kappas) in table4 {
        for (i, a) in report.annotators.iter().enumerate() {
            near(&mut errors, format!("{cat} yes-rate {a}"), 100.0 * report.per_annotator_yes_rate[&cat][a], rates[i], 0.1);
        }
        for (i, k) in report.pairwise_kappa[&cat].iter().enumerate() {
            near(&mut errors, format!("{cat} kappa pair {i}"), *k, kappas[i], 0.01);
        }
    }
    let fig3 = [
        (Category::Acceptable, 33.0, 83.0),
        (Category::Relevant, 61.0, 95.0),
        (Category::Interpretable, 56.0, 94.0),
    ];
    for (cat, original, human) in fig3 {
        near(&mut errors, format!("{cat} original"), 100.0 * report.proportions_by_source[&SourceKind::Original][&cat], original, 1.0);
        near(&mut errors, format!("{cat} human"), 100.0 * report.proportions_by_source[&SourceKind::HumanSummary][&cat], human, 1.0);
    }
    let chapters: [[f64; 5]; 3] = [
        [54.0, 94.2, 74.1, 72.7, 95.0],
        [58.1, 93.5, 76.3, 81.7, 100.0],
        [53.0, 93.9, 72.7, 83.3, 98.5],
    ];
    if report.proportions_by_chapter.len() == 3 {
        for ((ch, props), want) in report.proportions_by_chapter.iter().zip(chapters) {
            for (cat, w) in Category::ALL.iter().zip(want) {
                near(&mut errors, format!("chapter {ch} {cat}"), 100.0 * props[cat], w, 0.1);
            }
        }
    } else {
        errors.push(format!("expected 3 chapters, found {}", report.proportions_by_chapter.len()));
    }

    let mut coverage_note = "coverage not checked (no document.txt)";
    if let Ok(doc) = load_document(&dir.join("document.txt"), DocumentFormat::PlainSections) {
        let table3 = [
            (SourceKind::Original, [70.9, 70.3, 88.6]),
            (SourceKind::AutoSummary, [44.9, 43.0, 60.1]),
            (SourceKind::HumanSummary, [63.9, 68.4, 86.1]),
        ];
        for (kind, want) in table3 {
            let qs = sets.iter().find(|s| s.source_kind == kind).expect("all sources loaded");
            match key_term_coverage(qs, &doc.key_terms, Execution::Parallel) {
                Ok(r) => {
                    let got = r.rounded_percentages();
                    for (name, g, w) in [("Qs", got.0, want[0]), ("As", got.1, want[1]), ("either", got.2, want[2])] {
                        near(&mut errors, format!("{kind} coverage {name}"), g, w, 0.1);
                    }
                }
                Err(e) => errors.push(e.to_string()),
            }
        }
        coverage_note = "coverage checked";
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(60) {
        errors.push(format!("took {elapsed:?}"));
    }
    if errors.is_empty() {
        Ok(format!("{} records, {} items; {coverage_note}", records.len(), report.item_count))
    } else {
        Err(errors.join("; "))
    }
}

fn real_backend() -> Outcome {
    let Ok(url) = std::env::var(flashqg::gateway::BACKEND_URL_ENV) else {
        return Outcome::Skip("QG_BACKEND_URL not set".into());
    };
    let doc_path = data_dir().join("document.txt");
    if !doc_path.exists() {
        return Outcome::Skip(format!("{} not found", doc_path.display()));
    }
    match real_backend_check(&url, &doc_path) {
        Ok(d) => Outcome::Pass(d),
        Err(d) => Outcome::Fail(d),
    }
}

fn real_backend_check(url: &str, doc_path: &Path) -> Check {
    let doc = load_document(doc_path, DocumentFormat::PlainSections).map_err(|e| e.to_string())?;
    let backend = HttpBackend::new(url);
    let cfg = GenerateConfig::default();
    let mut one = doc.clone();
    one.chapters.truncate(1);
    let qs = generate(SourceInput::Document(&one), SourceKind::Original, &backend, &cfg).map_err(|e| e.to_string())?;
    let accepted = qs.manifest.pair_count;
    let total = accepted + qs.manifest.rejected_spans;
    let rate = if total == 0 { 0.0 } else { accepted as f64 / total as f64 };
    ensure(rate >= 0.9, || format!("only {:.1}% of spans found in their chunk", 100.0 * rate))?;
    let mut seen = HashSet::new();
    for p in &qs.pairs {
        let key = (&p.chapter_id, &p.section_id, p.chunk_index, p.sentence_index);
        ensure(seen.insert(key), || format!("two pairs for sentence {key:?}"))?;
    }
    let mut note = format!("{accepted} pairs from chapter {}, {:.1}% spans in chunk", one.chapters[0].chapter_id, 100.0 * rate);

    let summaries = data_dir().join("summaries.jsonl");
    if doc.chapters.len() >= 3 && summaries.exists() {
        let sets = load_summary_sets(&summaries).map_err(|e| e.to_string())?;
        let mut counts = BTreeMap::new();
        for (kind, want) in [
            (SourceKind::Original, 1208.0),
            (SourceKind::HumanSummary, 667.0),
            (SourceKind::AutoSummary, 318.0),
        ] {
            let input = match kind {
                SourceKind::HumanSummary => SourceInput::Summaries { doc: Some(&doc), sets: &sets },
                _ => SourceInput::Document(&doc),
            };
            let n = generate(input, kind, &backend, &cfg).map_err(|e| e.to_string())?.pairs.len();
            let dev = (n as f64 - want).abs() / want;
            ensure(dev <= 0.15, || format!("{kind}: {n} pairs, {:.1}% from {want}", 100.0 * dev))?;
            counts.insert(kind.as_str(), n);
        }
        note.push_str(&format!("; full counts {counts:?}"));
    }
    Ok(note)
}
