use flashqg::pipeline::{generate, SourceInput};
use flashqg::{Execution, FakeBackend, GenerateConfig, QuestionSet, SourceKind};

/// Fifty generated sentences of mixed shape, some with capitalized runs.
fn fifty_sentences() -> String {
    let subjects = ["Dynamic Programming", "the parser", "A Markov Chain", "each state", "Viterbi Decoding"];
    let verbs = ["stores", "reduces", "explains", "links", "ranks"];
    let objects = ["partial results", "the Forward Algorithm", "long sequences", "hidden states", "Edit Distance"];
    (0..50)
        .map(|i| {
            let s = subjects[i % 5];
            let mut first = s.chars();
            let s = first.next().unwrap().to_uppercase().chain(first).collect::<String>();
            format!("{s} {} {} in step {i}.", verbs[(i / 5) % 5], objects[(i * 3) % 5])
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn run(text: &str, exec: Execution) -> QuestionSet {
    let cfg = GenerateConfig { token_limit: 64, execution: exec, ..GenerateConfig::default() };
    generate(SourceInput::Text { doc_id: "fifty", text }, SourceKind::Original, &FakeBackend::new(), &cfg).unwrap()
}

fn without_timestamps(qs: &QuestionSet) -> String {
    let mut v = serde_json::to_value(qs).unwrap();
    let m = v["manifest"].as_object_mut().unwrap();
    m.remove("started_at");
    m.remove("finished_at");
    serde_json::to_string(&v).unwrap()
}

#[test]
fn fifty_sentence_fixture() {
    let text = fifty_sentences();
    let first = run(&text, Execution::Parallel);
    assert_eq!(first.manifest.sentence_count, 50);
    assert!(first.pairs.len() <= 50);
    assert!(!first.pairs.is_empty());
    for p in &first.pairs {
        let ctx = &first.contexts[&p.pair_id];
        assert!(ctx.contains(&p.answer), "{:?} not in chunk", p.answer);
    }
    let mut seen = std::collections::HashSet::new();
    assert!(first.pairs.iter().all(|p| seen.insert((p.chunk_index, p.sentence_index))));
    for exec in [Execution::Parallel, Execution::Sequential] {
        assert_eq!(without_timestamps(&run(&text, exec)), without_timestamps(&first));
    }
}
