use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use readlab::baseline::{FeatureConfig, TrainConfig};
use readlab::corpus::{
    chunk_corpus, generate_synthetic, load_manifest, stratified_split, write_corpus_dir, write_manifest_for_loaded,
    LabeledCorpus, SplitSpec, MANIFEST_HEADER,
};
use readlab::formulas::{score_all, GfiVariant, Measure, ScoreConfig, ScoreEntry};
use readlab::langmodel::{
    load_precomputed, train_ngram, write_precomputed, LikelihoodProvider, NGramModel, Smoothing, TrainOptions,
};
use readlab::metrics::KappaWeighting;
use readlab::output::{to_json_bytes, write_atomic, RunMeta};
use readlab::pipeline::{
    csv_field, parse_predictions, run_supervised_eval, run_unsupervised_eval, BaselineOptions, BaselineProtocol,
    EvalMeasure, SupervisedInput, UnsupervisedOptions,
};
use readlab::rsrs::document_lm_scores;
use readlab::textseg::{profile, Document, SyllableProfile, WordList};
use readlab::{Error, Result};

/// Readability formulas, language-model readability scores and evaluation.
#[derive(Parser)]
#[command(name = "readlab", version)]
struct Cli {
    /// Seed for every random choice. Recorded in all outputs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output format. Defaults to `table` for evaluation reports and `json`
    /// elsewhere.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Surface counts of each document.
    Profile(ProfileArgs),
    /// Traditional readability formulas.
    Score(ScoreArgs),
    /// Train a smoothed n-gram language model.
    TrainLm(TrainLmArgs),
    /// RSRS and perplexity per document.
    Rsrs(RsrsArgs),
    /// Cut documents into fixed-size sentence chunks.
    Chunk(ChunkArgs),
    /// Stratified train/validation/test split of a manifest.
    Split(SplitArgs),
    /// Generate a synthetic graded corpus.
    Synth(SynthArgs),
    /// Correlate measures with gold labels and rank them.
    EvalUnsup(EvalUnsupArgs),
    /// Classification metrics from a prediction file or the baseline classifier.
    EvalSup(EvalSupArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Labeled manifest (TSV with doc_path, class_name, class_index).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Plain-text documents. A single file starting with the manifest header
    /// is read as a manifest.
    #[arg(long, num_args = 1..)]
    input: Vec<PathBuf>,
}

#[derive(Args)]
struct TextArgs {
    /// Syllable profile.
    #[arg(long, default_value = "en")]
    lang: SyllableProfile,
    /// Easy-word list for DCRF (one word per line).
    #[arg(long)]
    wordlist: Option<PathBuf>,
    #[arg(long, default_value = "paper")]
    gfi_variant: GfiVariant,
}

#[derive(Args)]
struct ProviderArgs {
    /// N-gram model written by `train-lm`.
    #[arg(long, conflicts_with = "scores")]
    model: Option<PathBuf>,
    /// Precomputed token log-probabilities (JSONL).
    #[arg(long)]
    scores: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "en")]
    lang: SyllableProfile,
    #[arg(long)]
    wordlist: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    text: TextArgs,
    /// Comma-separated measures (default: all).
    #[arg(long, value_delimiter = ',')]
    measures: Vec<Measure>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainLmArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Only train on documents of this class index.
    #[arg(long)]
    class: Option<usize>,
    #[arg(long, default_value_t = 2)]
    order: usize,
    #[arg(long, default_value = "add-k")]
    smoothing: Smoothing,
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    #[arg(long, default_value_t = 1)]
    min_count: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RsrsArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    provider: ProviderArgs,
    /// Also export the token scores in the precomputed JSONL format.
    #[arg(long)]
    emit_scores: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ChunkArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Sentences per chunk.
    #[arg(long, default_value_t = 25)]
    n: usize,
    /// A trailing chunk shorter than this is merged into the previous one.
    #[arg(long, default_value_t = 1)]
    min_tail: usize,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Train, validation and test ratios.
    #[arg(long, value_delimiter = ',', default_values_t = [0.8, 0.1, 0.1])]
    ratios: Vec<f64>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 3)]
    classes: usize,
    #[arg(long, default_value_t = 150)]
    docs_per_class: usize,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct EvalUnsupArgs {
    /// Labeled manifest; repeat for several datasets.
    #[arg(long, required = true)]
    manifest: Vec<PathBuf>,
    #[command(flatten)]
    provider: ProviderArgs,
    #[command(flatten)]
    text: TextArgs,
    /// Comma-separated measures, including RSRS and PPL (default: all that
    /// the given inputs support).
    #[arg(long, value_delimiter = ',')]
    measures: Vec<EvalMeasure>,
    /// Directory for scores.csv, report.json and report.txt.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct EvalSupArgs {
    /// Gold manifest.
    #[arg(long)]
    manifest: PathBuf,
    /// TSV of doc_id and predicted_class.
    #[arg(long, conflicts_with = "train_baseline")]
    predictions: Option<PathBuf>,
    /// Train and test the logistic-regression baseline.
    #[arg(long)]
    train_baseline: bool,
    /// Cross-validation folds for the baseline; without it a single split is used.
    #[arg(long)]
    cv: Option<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.8, 0.1, 0.1])]
    ratios: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 1000)]
    epochs: usize,
    /// Add RSRS as a baseline feature.
    #[arg(long)]
    rsrs_feature: bool,
    /// Add log-perplexity as a baseline feature.
    #[arg(long)]
    ppl_feature: bool,
    #[command(flatten)]
    provider: ProviderArgs,
    #[command(flatten)]
    text: TextArgs,
    #[arg(long, default_value = "linear-paper")]
    qwk_weights: KappaWeighting,
    /// Directory for metrics.json, confusion.csv and report.txt.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match configure_workers().and_then(|_| run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("readlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn configure_workers() -> Result<()> {
    let Ok(raw) = std::env::var("READLAB_WORKERS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::Usage(format!("READLAB_WORKERS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Internal(e.to_string()))
}

fn run(cli: &Cli) -> Result<()> {
    let seed = cli.seed;
    match &cli.command {
        Command::Profile(a) => cmd_profile(a, seed, cli.format.unwrap_or(Format::Json)),
        Command::Score(a) => cmd_score(a, seed, cli.format.unwrap_or(Format::Json)),
        Command::TrainLm(a) => cmd_train_lm(a, seed, cli.format.unwrap_or(Format::Json)),
        Command::Rsrs(a) => cmd_rsrs(a, seed, cli.format.unwrap_or(Format::Csv)),
        Command::Chunk(a) => cmd_chunk(a, seed, cli.format.unwrap_or(Format::Json)),
        Command::Split(a) => cmd_split(a, seed, cli.format.unwrap_or(Format::Json)),
        Command::Synth(a) => cmd_synth(a, seed, cli.format.unwrap_or(Format::Json)),
        Command::EvalUnsup(a) => cmd_eval_unsup(a, seed, cli.format.unwrap_or(Format::Table)),
        Command::EvalSup(a) => cmd_eval_sup(a, seed, cli.format.unwrap_or(Format::Table)),
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn is_manifest(path: &Path) -> bool {
    fs::read_to_string(path)
        .ok()
        .and_then(|t| t.lines().find(|l| !l.starts_with('#')).map(|l| l.trim_end() == MANIFEST_HEADER.join("\t")))
        .unwrap_or(false)
}

/// Documents from `--manifest` or `--input`. Plain files become one
/// `unlabeled` class whose document ids are the given paths.
fn load_inputs(args: &InputArgs) -> Result<LabeledCorpus> {
    match (&args.manifest, args.input.as_slice()) {
        (Some(_), [_, ..]) => Err(Error::Usage("give either --manifest or --input, not both".into())),
        (Some(m), []) => Ok(load_manifest(m)?),
        (None, []) => Err(Error::Usage("no input documents (use --manifest or --input)".into())),
        (None, [single]) if is_manifest(single) => Ok(load_manifest(single)?),
        (None, files) => {
            let mut documents = Vec::with_capacity(files.len());
            for f in files {
                let text = fs::read_to_string(f).map_err(|e| Error::Input(format!("{}: {e}", f.display())))?;
                documents.push(Document::new(path_str(f), text));
            }
            let labels = vec![0; documents.len()];
            Ok(LabeledCorpus::new(documents, labels, vec!["unlabeled".into()])?)
        }
    }
}

fn input_desc(args: &InputArgs) -> Value {
    json!({
        "manifest": args.manifest.as_deref().map(path_str),
        "input": args.input.iter().map(|p| path_str(p)).collect::<Vec<_>>(),
    })
}

fn load_wordlist(path: &Option<PathBuf>) -> Result<Option<WordList>> {
    path.as_ref()
        .map(|p| WordList::load(p).map_err(|e| Error::Input(format!("{}: {e}", p.display()))))
        .transpose()
}

fn load_provider(args: &ProviderArgs) -> Result<Option<Box<dyn LikelihoodProvider>>> {
    if let Some(m) = &args.model {
        let model = NGramModel::load(m).map_err(|e| Error::from(e).context(m.display()))?;
        return Ok(Some(Box::new(model)));
    }
    if let Some(s) = &args.scores {
        let scores = load_precomputed(s).map_err(|e| Error::from(e).context(s.display()))?;
        return Ok(Some(Box::new(scores)));
    }
    Ok(None)
}

fn provider_desc(args: &ProviderArgs) -> Value {
    json!({
        "model": args.model.as_deref().map(path_str),
        "scores": args.scores.as_deref().map(path_str),
    })
}

fn text_desc(args: &TextArgs) -> Value {
    json!({
        "lang": args.lang,
        "wordlist": args.wordlist.as_deref().map(path_str),
        "gfi_variant": args.gfi_variant,
    })
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => Ok(write_atomic(path, bytes)?),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            Ok(stdout.flush()?)
        }
    }
}

/// Rows with a header, rendered as JSON objects, CSV or an aligned table.
struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Value>>,
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Table {
    fn render(&self, format: Format, meta: &RunMeta) -> Vec<u8> {
        match format {
            Format::Json => {
                let rows: Vec<serde_json::Map<String, Value>> = self
                    .rows
                    .iter()
                    .map(|r| self.header.iter().cloned().zip(r.iter().cloned()).collect())
                    .collect();
                to_json_bytes(&json!({ "meta": meta, "rows": rows }))
            }
            Format::Csv => {
                let mut out = meta.comment_line();
                let line = |cells: Vec<String>| cells.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",");
                out.push_str(&line(self.header.clone()));
                out.push('\n');
                for r in &self.rows {
                    out.push_str(&line(r.iter().map(cell_text).collect()));
                    out.push('\n');
                }
                out.into_bytes()
            }
            Format::Table => {
                let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(cell_text).collect()).collect();
                let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
                for r in &cells {
                    for (w, c) in widths.iter_mut().zip(r) {
                        *w = (*w).max(c.chars().count());
                    }
                }
                let mut out = meta.comment_line();
                let mut line = |cells: &[String]| {
                    let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
                    let _ = writeln!(out, "{}", padded.join("  ").trim_end());
                };
                line(&self.header);
                for r in &cells {
                    line(r);
                }
                out.into_bytes()
            }
        }
    }
}

fn summary(format: Format, meta: &RunMeta, pairs: Vec<(&str, Value)>) -> Vec<u8> {
    let table = Table {
        header: pairs.iter().map(|(k, _)| k.to_string()).collect(),
        rows: vec![pairs.into_iter().map(|(_, v)| v).collect()],
    };
    table.render(format, meta)
}

fn cmd_profile(a: &ProfileArgs, seed: u64, format: Format) -> Result<()> {
    let config = json!({
        "input": input_desc(&a.input),
        "lang": a.lang,
        "wordlist": a.wordlist.as_deref().map(path_str),
    });
    let corpus = load_inputs(&a.input)?;
    let wordlist = load_wordlist(&a.wordlist)?;
    let meta = RunMeta::new("profile", seed, &config);
    let mut rows = Vec::with_capacity(corpus.len());
    for doc in &corpus.documents {
        let p = profile(doc, wordlist.as_ref(), a.lang);
        rows.push(vec![
            json!(doc.id),
            json!(p.total_sentences),
            json!(p.total_words),
            json!(p.total_syllables),
            json!(p.total_characters),
            json!(p.long_words),
            json!(p.polysyllables),
            json!(p.difficult_words),
        ]);
    }
    let header = [
        "doc_id",
        "total_sentences",
        "total_words",
        "total_syllables",
        "total_characters",
        "long_words",
        "polysyllables",
        "difficult_words",
    ];
    let table = Table { header: header.iter().map(|h| h.to_string()).collect(), rows };
    emit(a.out.as_deref(), &table.render(format, &meta))
}

fn cmd_score(a: &ScoreArgs, seed: u64, format: Format) -> Result<()> {
    let measures = if a.measures.is_empty() { Measure::ALL.to_vec() } else { a.measures.clone() };
    let config = json!({
        "input": input_desc(&a.input),
        "text": text_desc(&a.text),
        "measures": measures,
    });
    let corpus = load_inputs(&a.input)?;
    let score_config = ScoreConfig {
        measures: measures.clone(),
        gfi_variant: a.text.gfi_variant,
        wordlist: load_wordlist(&a.text.wordlist)?,
        lang: a.text.lang,
    };
    let meta = RunMeta::new("score", seed, &config);
    let reports: Vec<_> = corpus.documents.iter().map(|d| score_all(d, &score_config)).collect();
    let bytes = match format {
        Format::Json => to_json_bytes(&json!({ "meta": meta, "documents": reports })),
        _ => {
            let mut header = vec!["doc_id".to_string()];
            header.extend(measures.iter().map(|m| m.name().to_string()));
            let rows = reports
                .iter()
                .map(|r| {
                    let mut row = vec![json!(r.doc_id)];
                    row.extend(measures.iter().map(|m| match r.scores.get(m) {
                        Some(ScoreEntry::Value(v)) => json!(v),
                        _ => json!("error"),
                    }));
                    row
                })
                .collect();
            Table { header, rows }.render(format, &meta)
        }
    };
    emit(a.out.as_deref(), &bytes)?;
    let failed: Vec<&str> = reports.iter().filter(|r| r.has_errors()).map(|r| r.doc_id.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Degenerate(format!("measures undefined for {} document(s): {}", failed.len(), failed.join(", "))))
    }
}

fn cmd_train_lm(a: &TrainLmArgs, seed: u64, format: Format) -> Result<()> {
    let options = TrainOptions { order: a.order, smoothing: a.smoothing, k: a.k, min_count: a.min_count };
    let config = json!({
        "input": input_desc(&a.input),
        "class": a.class,
        "order": a.order,
        "smoothing": a.smoothing.to_string(),
        "k": a.k,
        "min_count": a.min_count,
    });
    let corpus = load_inputs(&a.input)?;
    if let Some(c) = a.class {
        if c >= corpus.n_classes() {
            return Err(Error::Usage(format!("--class {c} outside 0..{}", corpus.n_classes())));
        }
    }
    let sentences: Vec<&[String]> = corpus
        .documents
        .iter()
        .zip(&corpus.labels)
        .filter(|(_, &l)| a.class.is_none_or(|c| c == l))
        .flat_map(|(d, _)| d.sentences.iter().map(|s| s.tokens.as_slice()))
        .filter(|t| !t.is_empty())
        .collect();
    let model = train_ngram(&sentences, options)?;
    let meta = RunMeta::new("train-lm", seed, &config);
    write_atomic(&a.out, model.to_text_with_comment(&meta.comment_line()).as_bytes())?;
    emit(
        None,
        &summary(
            format,
            &meta,
            vec![
                ("model", json!(path_str(&a.out))),
                ("order", json!(model.order())),
                ("smoothing", json!(model.smoothing().to_string())),
                ("vocab_size", json!(model.vocab_size())),
                ("training_sentences", json!(sentences.len())),
            ],
        ),
    )
}

fn cmd_rsrs(a: &RsrsArgs, seed: u64, format: Format) -> Result<()> {
    let config = json!({ "input": input_desc(&a.input), "provider": provider_desc(&a.provider) });
    let corpus = load_inputs(&a.input)?;
    let provider = load_provider(&a.provider)?
        .ok_or_else(|| Error::Usage("rsrs needs --model or --scores".into()))?;
    let meta = RunMeta::new("rsrs", seed, &config);

    let mut rows = Vec::with_capacity(corpus.len());
    let mut failed = Vec::new();
    for doc in &corpus.documents {
        match document_lm_scores(provider.as_ref(), doc) {
            Ok(s) => rows.push(vec![json!(doc.id), json!(s.rsrs), json!(s.perplexity)]),
            Err(e) => match Error::from(e) {
                Error::Degenerate(msg) => {
                    log::warn!("{}: {msg}", doc.id);
                    failed.push(doc.id.clone());
                    rows.push(vec![json!(doc.id), Value::Null, Value::Null]);
                }
                other => return Err(other.context(format!("document `{}`", doc.id))),
            },
        }
    }
    if let Some(path) = &a.emit_scores {
        let mut buf = Vec::new();
        write_precomputed(provider.as_ref(), &corpus.documents, &mut buf)?;
        write_atomic(path, &buf)?;
    }
    let table = Table { header: vec!["doc_id".into(), "rsrs".into(), "perplexity".into()], rows };
    emit(a.out.as_deref(), &table.render(format, &meta))?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Error::Degenerate(format!("no scorable tokens in: {}", failed.join(", "))))
    }
}

fn cmd_chunk(a: &ChunkArgs, seed: u64, format: Format) -> Result<()> {
    if a.n == 0 {
        return Err(Error::Usage("--n must be at least 1".into()));
    }
    let config = json!({ "input": input_desc(&a.input), "n": a.n, "min_tail": a.min_tail });
    let corpus = load_inputs(&a.input)?;
    let chunks = chunk_corpus(&corpus, a.n, a.min_tail);
    let manifest = write_corpus_dir(&chunks, &a.out_dir)?;
    let meta = RunMeta::new("chunk", seed, &config);
    emit(
        None,
        &summary(
            format,
            &meta,
            vec![
                ("manifest", json!(path_str(&manifest))),
                ("input_documents", json!(corpus.len())),
                ("chunks", json!(chunks.len())),
            ],
        ),
    )
}

fn ratios_of(v: &[f64]) -> Result<[f64; 3]> {
    <[f64; 3]>::try_from(v).map_err(|_| Error::Usage(format!("expected three ratios, got {}", v.len())))
}

fn cmd_split(a: &SplitArgs, seed: u64, format: Format) -> Result<()> {
    let spec = SplitSpec { ratios: ratios_of(&a.ratios)?, seed };
    let config = json!({ "manifest": path_str(&a.manifest), "ratios": spec.ratios });
    let corpus = load_manifest(&a.manifest)?;
    let (split, record) = stratified_split(&corpus, &spec).map_err(|e| match e {
        readlab::corpus::CorpusError::Invalid(m) => Error::Usage(m),
        other => other.into(),
    })?;
    let meta = RunMeta::new("split", seed, &config);
    fs::create_dir_all(&a.out_dir)?;
    let mut ids = serde_json::Map::new();
    for (name, part) in ["train", "validation", "test"].into_iter().zip(split.parts()) {
        let path = a.out_dir.join(format!("{name}.tsv"));
        let subset = corpus.subset(part);
        let text = meta.comment_line() + &write_manifest_for_loaded(&subset, &path)?;
        write_atomic(&path, text.as_bytes())?;
        ids.insert(name.into(), json!(subset.documents.iter().map(|d| &d.id).collect::<Vec<_>>()));
    }
    let split_json = json!({ "meta": meta, "record": record, "documents": ids });
    write_atomic(&a.out_dir.join("split.json"), &to_json_bytes(&split_json))?;
    emit(
        None,
        &summary(
            format,
            &meta,
            vec![
                ("out_dir", json!(path_str(&a.out_dir))),
                ("train", json!(split.train.len())),
                ("validation", json!(split.validation.len())),
                ("test", json!(split.test.len())),
            ],
        ),
    )
}

fn cmd_synth(a: &SynthArgs, seed: u64, format: Format) -> Result<()> {
    if a.classes < 2 || a.docs_per_class == 0 {
        return Err(Error::Usage("need --classes >= 2 and --docs-per-class >= 1".into()));
    }
    let config = json!({ "classes": a.classes, "docs_per_class": a.docs_per_class });
    let corpus = generate_synthetic(a.classes, a.docs_per_class, seed);
    let manifest = write_corpus_dir(&corpus, &a.out_dir)?;
    let meta = RunMeta::new("synth", seed, &config);
    emit(
        None,
        &summary(
            format,
            &meta,
            vec![("manifest", json!(path_str(&manifest))), ("documents", json!(corpus.len()))],
        ),
    )
}

/// Dataset names are manifest file stems, falling back to the full path
/// when two stems collide.
fn dataset_names(paths: &[PathBuf]) -> Vec<String> {
    let stems: Vec<String> = paths
        .iter()
        .map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path_str(p)))
        .collect();
    let mut seen = HashSet::new();
    let dup: HashSet<&String> = stems.iter().filter(|s| !seen.insert(*s)).collect();
    stems.iter().zip(paths).map(|(s, p)| if dup.contains(s) { path_str(p) } else { s.clone() }).collect()
}

fn cmd_eval_unsup(a: &EvalUnsupArgs, seed: u64, format: Format) -> Result<()> {
    let provider = load_provider(&a.provider)?;
    let measures = if a.measures.is_empty() {
        EvalMeasure::all().into_iter().filter(|m| provider.is_some() || !m.needs_provider()).collect()
    } else {
        a.measures.clone()
    };
    if provider.is_none() {
        if let Some(m) = measures.iter().find(|m| m.needs_provider()) {
            return Err(Error::Usage(format!("{m} requested but neither --model nor --scores given")));
        }
    }
    let config = json!({
        "manifests": a.manifest.iter().map(|p| path_str(p)).collect::<Vec<_>>(),
        "provider": provider_desc(&a.provider),
        "text": text_desc(&a.text),
        "measures": measures.iter().map(|m| m.name()).collect::<Vec<_>>(),
    });
    let names = dataset_names(&a.manifest);
    let datasets = a
        .manifest
        .iter()
        .zip(names)
        .map(|(p, name)| Ok((name, load_manifest(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let options = UnsupervisedOptions {
        measures,
        score: ScoreConfig {
            measures: Measure::ALL.to_vec(),
            gfi_variant: a.text.gfi_variant,
            wordlist: load_wordlist(&a.text.wordlist)?,
            lang: a.text.lang,
        },
    };
    let output = run_unsupervised_eval(&datasets, &options, provider.as_deref())?;
    let meta = RunMeta::new("eval-unsup", seed, &config);
    let scores = output.scores_csv(&meta);
    let report = output.report_json(&meta);
    let table = output.report_table(&meta);
    if let Some(dir) = &a.out_dir {
        write_atomic(&dir.join("scores.csv"), scores.as_bytes())?;
        write_atomic(&dir.join("report.json"), &report)?;
        write_atomic(&dir.join("report.txt"), table.as_bytes())?;
    }
    emit(
        None,
        match format {
            Format::Json => &report,
            Format::Csv => scores.as_bytes(),
            Format::Table => table.as_bytes(),
        },
    )
}

fn cmd_eval_sup(a: &EvalSupArgs, seed: u64, format: Format) -> Result<()> {
    if a.predictions.is_none() && !a.train_baseline {
        return Err(Error::Usage("give --predictions FILE or --train-baseline".into()));
    }
    let features = FeatureConfig {
        gfi_variant: a.text.gfi_variant,
        wordlist: load_wordlist(&a.text.wordlist)?,
        lang: a.text.lang,
        include_rsrs: a.rsrs_feature,
        include_log_perplexity: a.ppl_feature,
    };
    let protocol = match a.cv {
        Some(k) if k < 2 => return Err(Error::Usage(format!("--cv needs at least 2 folds, got {k}"))),
        Some(k) => BaselineProtocol::CrossValidation { k, seed },
        None => BaselineProtocol::Split(SplitSpec { ratios: ratios_of(&a.ratios)?, seed }),
    };
    let train = TrainConfig { learning_rate: a.lr, epochs: a.epochs };
    let config = json!({
        "manifest": path_str(&a.manifest),
        "predictions": a.predictions.as_deref().map(path_str),
        "baseline": a.train_baseline.then(|| json!({
            "protocol": protocol,
            "lr": a.lr,
            "epochs": a.epochs,
            "rsrs_feature": a.rsrs_feature,
            "ppl_feature": a.ppl_feature,
            "provider": provider_desc(&a.provider),
            "text": text_desc(&a.text),
        })),
        "qwk_weights": a.qwk_weights,
    });
    let gold = load_manifest(&a.manifest)?;
    let provider = load_provider(&a.provider)?;
    let predictions;
    let baseline;
    let input = match &a.predictions {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?;
            predictions = parse_predictions(&text).map_err(|e| e.context(p.display()))?;
            SupervisedInput::Predictions(&predictions)
        }
        None => {
            baseline = BaselineOptions { features, train, protocol, weighting: a.qwk_weights };
            SupervisedInput::Baseline(&baseline)
        }
    };
    let output = run_supervised_eval(&gold, input, a.qwk_weights, provider.as_deref())?;
    let meta = RunMeta::new("eval-sup", seed, &config);
    let metrics = output.report_json(&meta);
    let confusion = output.confusion_csv(&meta);
    let table = output.report_table(&meta);
    if let Some(dir) = &a.out_dir {
        write_atomic(&dir.join("metrics.json"), &metrics)?;
        write_atomic(&dir.join("confusion.csv"), confusion.as_bytes())?;
        write_atomic(&dir.join("report.txt"), table.as_bytes())?;
    }
    emit(
        None,
        match format {
            Format::Json => &metrics,
            Format::Csv => confusion.as_bytes(),
            Format::Table => table.as_bytes(),
        },
    )
}
