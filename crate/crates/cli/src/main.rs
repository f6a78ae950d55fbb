use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use flashqg::corpus::{load_document, load_summary_sets, summary_stats, DocumentFormat};
use flashqg::gateway::{BackendRegistry, HttpBackend, BACKEND_URL_ENV};
use flashqg::metrics::{
    agreement_report, key_term_coverage, render_agreement_table, render_chapter_table, render_coverage_table,
    render_source_table, AgreementReport, CoverageReport,
};
use flashqg::pipeline::{
    generate, read_eval_set, read_question_set, sample_eval_set, write_eval_set, write_question_set,
    PipelineError, SourceInput, SummaryGranularity,
};
use flashqg::segmentation::RuleSplitter;
use flashqg::{AnnotationRecord, Backend, Execution, GenerateConfig, QuestionSet, SourceKind};
use flashqg_annotate::{router, serve, AnnotationStore, Guidelines};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "flashqg", version, about = "Generate and evaluate flashcard questions from textbook text")]
struct Cli {
    /// Run every stage on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Original,
    HumanSummary,
    AutoSummary,
}

impl From<Source> for SourceKind {
    fn from(s: Source) -> Self {
        match s {
            Source::Original => SourceKind::Original,
            Source::HumanSummary => SourceKind::HumanSummary,
            Source::AutoSummary => SourceKind::AutoSummary,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Granularity {
    PerChapter,
    PerSection,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a document, list its key terms and describe any summary sets.
    Ingest {
        #[arg(long)]
        document: PathBuf,
        #[arg(long)]
        summaries: Option<PathBuf>,
    },
    /// Generate question-answer pairs from one source.
    Generate {
        #[arg(long, value_enum)]
        source: Source,
        #[arg(long, default_value = "fake")]
        backend: String,
        #[arg(long, default_value_t = 512)]
        token_limit: usize,
        #[arg(long)]
        dedupe: bool,
        #[arg(long)]
        roundtrip_filter: bool,
        /// Source document; required for original and auto-summary.
        #[arg(long)]
        document: Option<PathBuf>,
        /// Summary sets (JSON Lines); required for human-summary.
        #[arg(long)]
        summaries: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "per-chapter")]
        granularity: Granularity,
        /// Requests per second for the http backend.
        #[arg(long)]
        rate_limit: Option<f64>,
        /// Output pairs file (JSON Lines); the manifest is written next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw the same number of pairs from every question set.
    Sample {
        #[arg(long)]
        quota: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long = "set", required = true)]
        sets: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Key-term coverage of each question set.
    Coverage {
        #[arg(long)]
        document: PathBuf,
        #[arg(long = "set", required = true)]
        sets: Vec<PathBuf>,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Per-annotator rates, pairwise kappa and majority proportions.
    Agreement {
        #[arg(long)]
        eval: PathBuf,
        #[arg(long = "set", required = true)]
        sets: Vec<PathBuf>,
        /// Exported records (JSON array) or a raw annotation log (JSON Lines).
        #[arg(long)]
        annotations: PathBuf,
        /// Annotator order for the kappa pairs, comma separated.
        #[arg(long, value_delimiter = ',')]
        annotators: Option<Vec<String>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render saved coverage and agreement JSON as text tables.
    Report {
        #[arg(long)]
        coverage: Option<PathBuf>,
        #[arg(long)]
        agreement: Option<PathBuf>,
    },
    /// Run the annotation service.
    Serve {
        #[arg(long)]
        eval: PathBuf,
        #[arg(long = "set", required = true)]
        sets: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        annotators: Vec<String>,
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// JSON file overriding the built-in guideline text.
        #[arg(long)]
        guidelines: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match cli.command {
        Command::Ingest { document, summaries } => ingest(&document, summaries.as_deref()),
        Command::Generate {
            source,
            backend,
            token_limit,
            dedupe,
            roundtrip_filter,
            document,
            summaries,
            granularity,
            rate_limit,
            out,
        } => {
            let config = GenerateConfig {
                token_limit,
                dedupe,
                roundtrip_filter,
                summary_granularity: match granularity {
                    Granularity::PerChapter => SummaryGranularity::PerChapter,
                    Granularity::PerSection => SummaryGranularity::PerSection,
                },
                execution: exec,
                run_id: None,
            };
            let backend = make_backend(&backend, rate_limit)?;
            run_generate(source.into(), backend.as_ref(), &config, document.as_deref(), summaries.as_deref(), &out)
        }
        Command::Sample { quota, seed, sets, out } => {
            let sets = read_sets(&sets)?;
            let eval = sample_eval_set(&sets, quota, seed)?;
            write_eval_set(&eval, &out)?;
            println!("{} entries written to {}", eval.entries.len(), out.display());
            Ok(())
        }
        Command::Coverage { document, sets, json } => {
            let doc = load_document(&document, DocumentFormat::PlainSections)?;
            let reports = read_sets(&sets)?
                .iter()
                .map(|qs| key_term_coverage(qs, &doc.key_terms, exec))
                .collect::<Result<Vec<_>, _>>()?;
            if json {
                print_json(&reports)
            } else {
                print!("{}", render_coverage_table(&reports));
                Ok(())
            }
        }
        Command::Agreement { eval, sets, annotations, annotators, out } => {
            let eval = read_eval_set(&eval)?;
            let sets = read_sets(&sets)?;
            let records = read_records(&annotations)?;
            let report = agreement_report(&records, &eval, &sets, annotators.as_deref(), exec)?;
            match out {
                Some(path) => {
                    let mut f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                    serde_json::to_writer_pretty(&mut f, &report)?;
                    writeln!(f)?;
                    Ok(())
                }
                None => print_json(&report),
            }
        }
        Command::Report { coverage, agreement } => report(coverage.as_deref(), agreement.as_deref()),
        Command::Serve { eval, sets, annotators, log, addr, guidelines } => {
            let eval = read_eval_set(&eval)?;
            let sets = read_sets(&sets)?;
            let store = AnnotationStore::open(&log, &eval, &sets, annotators)?;
            let guidelines = match guidelines {
                Some(p) => Guidelines::load(&p).with_context(|| format!("loading {}", p.display()))?,
                None => Guidelines::default(),
            };
            run_server(store, guidelines, addr)
        }
    }
}

fn make_backend(name: &str, rate_limit: Option<f64>) -> Result<Arc<dyn Backend>> {
    if name == "http" {
        let url = std::env::var(BACKEND_URL_ENV).with_context(|| format!("{BACKEND_URL_ENV} is not set"))?;
        let mut b = HttpBackend::new(&url);
        if let Some(rps) = rate_limit {
            b = b.with_rate_limit(rps);
        }
        return Ok(Arc::new(b));
    }
    let registry = BackendRegistry::default();
    registry.create(name).with_context(|| format!("available backends: {}", registry.names().join(", ")))
}

fn run_generate(
    kind: SourceKind,
    backend: &dyn Backend,
    config: &GenerateConfig,
    document: Option<&Path>,
    summaries: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let doc = document.map(|p| load_document(p, DocumentFormat::PlainSections)).transpose()?;
    let sets = summaries.map(load_summary_sets).transpose()?;
    let input = match kind {
        SourceKind::HumanSummary => match &sets {
            Some(sets) => SourceInput::Summaries { doc: doc.as_ref(), sets },
            None => bail!("--summaries is required for human-summary"),
        },
        _ => match &doc {
            Some(doc) => SourceInput::Document(doc),
            None => bail!("--document is required for {kind}"),
        },
    };
    match generate(input, kind, backend, config) {
        Ok(qs) => {
            write_question_set(&qs, out)?;
            println!("{} pairs written to {} (run {})", qs.pairs.len(), out.display(), qs.run_id);
            Ok(())
        }
        Err(PipelineError::Partial { partial, source }) => {
            write_question_set(&partial, out)?;
            bail!(
                "generation failed after {} pairs; partial set written to {}: {source}",
                partial.pairs.len(),
                out.display()
            )
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct IngestSummary<'a> {
    doc_id: &'a str,
    chapters: Vec<ChapterSummary<'a>>,
    summary_sets: Vec<SummarySetSummary<'a>>,
}

#[derive(Serialize)]
struct ChapterSummary<'a> {
    chapter_id: &'a str,
    title: &'a str,
    sections: usize,
    key_terms: Vec<&'a str>,
}

#[derive(Serialize)]
struct SummarySetSummary<'a> {
    author_id: &'a str,
    entries: usize,
    stats: flashqg::SummaryStats,
}

fn ingest(document: &Path, summaries: Option<&Path>) -> Result<()> {
    let doc = load_document(document, DocumentFormat::PlainSections)?;
    let sets = summaries.map(load_summary_sets).transpose()?.unwrap_or_default();
    let splitter = RuleSplitter::default();
    let chapters = doc
        .chapters
        .iter()
        .map(|c| ChapterSummary {
            chapter_id: &c.chapter_id,
            title: &c.title,
            sections: c.sections.len(),
            key_terms: doc.key_terms_for(&c.chapter_id).map(|k| k.surface.as_str()).collect(),
        })
        .collect();
    let summary_sets = sets
        .iter()
        .map(|s| {
            Ok(SummarySetSummary {
                author_id: &s.author_id,
                entries: s.entries.len(),
                stats: summary_stats(s, &doc.key_terms, &splitter)?,
            })
        })
        .collect::<Result<_>>()?;
    print_json(&IngestSummary { doc_id: &doc.doc_id, chapters, summary_sets })
}

fn report(coverage: Option<&Path>, agreement: Option<&Path>) -> Result<()> {
    if coverage.is_none() && agreement.is_none() {
        bail!("nothing to report: pass --coverage and/or --agreement");
    }
    if let Some(p) = coverage {
        let reports: Vec<CoverageReport> = read_json(p)?;
        println!("{}", render_coverage_table(&reports));
    }
    if let Some(p) = agreement {
        let r: AgreementReport = read_json(p)?;
        println!("{}", render_agreement_table(&r));
        println!("{}", render_source_table(&r));
        print!("{}", render_chapter_table(&r));
    }
    Ok(())
}

fn run_server(store: AnnotationStore, guidelines: Guidelines, addr: SocketAddr) -> Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
        eprintln!("listening on http://{} ({} items, eval {})", listener.local_addr()?, store.len(), store.eval_id());
        let app = router(Arc::new(store), guidelines);
        serve(listener, app, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
        Ok(())
    })
}

fn read_sets(paths: &[PathBuf]) -> Result<Vec<QuestionSet>> {
    paths
        .iter()
        .map(|p| read_question_set(p).with_context(|| format!("reading {}", p.display())))
        .collect()
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(BufReader::new(f)).with_context(|| format!("parsing {}", path.display()))
}

/// Accepts either an exported JSON array or the service's JSON Lines log.
fn read_records(path: &Path) -> Result<Vec<AnnotationRecord>> {
    let raw = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if raw.trim_start().starts_with('[') {
        return serde_json::from_str(&raw).with_context(|| format!("parsing {}", path.display()));
    }
    let mut out = Vec::new();
    for (i, line) in raw.as_bytes().lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).with_context(|| format!("{} line {}", path.display(), i + 1))?);
    }
    Ok(out)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}
