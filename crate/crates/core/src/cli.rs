//! The `polarity-gap` command line.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error.

use std::collections::{BTreeMap, HashMap};
use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::classify::{load_model, save_model, ClassifierKind, FeatureConfig, PolarityModel, TrainingConfig};
use crate::corpus::{
    balance_sample, label_by_score_with, read_labeled, read_reviews, score_distribution, word_count_filter_with,
    write_jsonl, CorpusStats, EnglishDetector, InputFormat, LabelSource, LabelThresholds, LabeledDocument, Review,
    ScoreScale,
};
use crate::error::{Error, Result};
use crate::eval::compare;
use crate::exec::{self, Execution};
use crate::manifest::{sidecar_path, RunManifest};
use crate::mismatch::{
    detect, mismatch_report, render_report, report_from_breakdown, sample_records, Category, MismatchRecord,
    SampledExample, ScoreBreakdown,
};
use crate::synth::{self, SynthConfig};
use crate::textpipe::{PipelineConfig, StemmerKind, Stopwords};

#[derive(Debug, Parser)]
#[command(name = "polarity-gap", version, about = "Detect polarity mismatches between review texts and scores")]
pub struct Cli {
    /// Worker threads; 0 uses all available cores, 1 runs sequentially.
    #[arg(long, global = true, env = "POLARITY_GAP_THREADS", default_value_t = 0)]
    pub threads: usize,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter, label and balance a ten-point scored corpus.
    Prepare(PrepareArgs),
    /// Cross-validate classifiers on a labeled corpus.
    Crossval(CrossvalArgs),
    /// Train a model on a labeled corpus.
    Train(TrainArgs),
    /// Score a five-point corpus and emit mismatch records.
    Detect(DetectArgs),
    /// Summarize mismatch records into report tables.
    Report(ReportArgs),
    /// Write a synthetic corpus.
    Generate(GenerateArgs),
    /// Score distribution of a corpus.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Ten,
    Five,
}

impl ScaleArg {
    fn scale(self) -> ScoreScale {
        match self {
            ScaleArg::Ten => ScoreScale::TEN_POINT,
            ScaleArg::Five => ScoreScale::FIVE_POINT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Jsonl,
    Csv,
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    #[arg(long, short, default_value = "-")]
    pub input: String,
    #[arg(long, short, default_value = "-")]
    pub output: String,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, value_enum, default_value = "ten")]
    pub scale: ScaleArg,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub min_words: u64,
    #[arg(long, default_value_t = 8.0)]
    pub pos_above: f64,
    #[arg(long, default_value_t = 4.0)]
    pub neg_below: f64,
    #[arg(long, default_value_t = 2000)]
    pub per_class: usize,
    #[arg(long, default_value_t = crate::corpus::DEFAULT_ENGLISH_THRESHOLD)]
    pub english_threshold: f64,
    #[arg(long)]
    pub no_english_filter: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Stage summary as JSON; printed to stderr when omitted.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FeatureArgs {
    /// Stopword file; the bundled English list is used when omitted.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    #[arg(long)]
    pub no_stem: bool,
    /// Keep apostrophes inside tokens ("didn't" stays one token).
    #[arg(long)]
    pub keep_apostrophes: bool,
    /// Presence (0/1) instead of word counts before weighting.
    #[arg(long)]
    pub binary: bool,
    #[arg(long)]
    pub no_tf_transform: bool,
    #[arg(long, default_value_t = 100_000_000)]
    pub words_to_keep: usize,
    #[arg(long, default_value_t = 0.0)]
    pub ig_threshold: f64,
    /// Keep the whole vocabulary instead of ranking by information gain.
    #[arg(long)]
    pub no_selection: bool,
}

impl FeatureArgs {
    fn config(&self) -> FeatureConfig {
        FeatureConfig {
            pipeline: PipelineConfig {
                lowercase: true,
                output_word_counts: !self.binary,
                tf_transform: !self.no_tf_transform,
                stemmer: if self.no_stem { StemmerKind::None } else { StemmerKind::Porter },
                stopword_file: self.stopwords.clone(),
                split_apostrophes: !self.keep_apostrophes,
                words_to_keep: self.words_to_keep,
            },
            ig_threshold: (!self.no_selection).then_some(self.ig_threshold),
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long = "c", default_value_t = 1.0)]
    pub c_parameter: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 200_000)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 1.0)]
    pub smoothing: f64,
    #[arg(long, default_value_t = 20)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 2)]
    pub min_leaf: usize,
}

impl ModelArgs {
    fn config(&self, classifier: ClassifierKind, seed: u64) -> Result<TrainingConfig> {
        if !(self.c_parameter > 0.0) || !(self.tolerance > 0.0) || !(self.smoothing > 0.0) {
            return Err(Error::Config("--c, --tolerance and --smoothing must be positive".into()));
        }
        Ok(TrainingConfig {
            classifier,
            c_parameter: self.c_parameter,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            smoothing: self.smoothing,
            max_depth: self.max_depth,
            min_leaf: self.min_leaf.max(1),
            seed,
        })
    }
}

fn parse_classifier(s: &str) -> std::result::Result<ClassifierKind, String> {
    ClassifierKind::parse(s).ok_or_else(|| format!("unknown classifier '{s}' (expected svm, nb or tree)"))
}

#[derive(Debug, Args)]
pub struct CrossvalArgs {
    #[arg(long, short, default_value = "-")]
    pub input: String,
    /// Metrics JSON.
    #[arg(long, short, default_value = "-")]
    pub output: String,
    /// Text table; printed to stderr when omitted.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "svm,nb,tree", value_parser = parse_classifier)]
    pub classifiers: Vec<ClassifierKind>,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(2..))]
    pub folds: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, short, default_value = "-")]
    pub input: String,
    #[arg(long, short)]
    pub output: PathBuf,
    #[arg(long, default_value = "svm", value_parser = parse_classifier)]
    pub classifier: ClassifierKind,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Dump training vectors as JSONL {doc_id, weights}.
    #[arg(long)]
    pub dump_vectors: Option<PathBuf>,
    /// Write the ranked attribute list as JSON.
    #[arg(long)]
    pub selection_report: Option<PathBuf>,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long, short)]
    pub model: PathBuf,
    #[arg(long, short, default_value = "-")]
    pub input: String,
    #[arg(long, short, default_value = "-")]
    pub output: String,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, default_value_t = 3)]
    pub exclude_score: u8,
    /// Keep every score; a score-3 review is then a data error.
    #[arg(long)]
    pub no_exclude: bool,
    #[arg(long)]
    pub no_english_filter: bool,
    #[arg(long, default_value_t = crate::corpus::DEFAULT_ENGLISH_THRESHOLD)]
    pub english_threshold: f64,
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Mismatch records JSONL.
    #[arg(long, short, default_value = "-", conflicts_with = "counts")]
    pub input: String,
    /// Per-score predicted counts JSON instead of records.
    #[arg(long)]
    pub counts: Option<PathBuf>,
    #[arg(long, short, default_value = "-")]
    pub output: String,
    /// Text tables; printed to stderr when omitted.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Examples per category.
    #[arg(long, default_value_t = 0)]
    pub sample: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Original five-point corpus, for example texts.
    #[arg(long)]
    pub corpus: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenerateKind {
    /// Balanced, annotated two-class corpus.
    Benchmark,
    /// Raw ten-point scored reviews.
    TenPoint,
    /// Five-point scored reviews including score 3.
    FivePoint,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: GenerateKind,
    /// Reviews to generate (per class for the benchmark).
    #[arg(long, short, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, short, default_value = "-")]
    pub output: String,
    #[arg(long, default_value_t = 0.30)]
    pub noise_share: f64,
    #[arg(long, default_value_t = 0.10)]
    pub contamination: f64,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long, short, default_value = "-")]
    pub input: String,
    #[arg(long, value_enum, default_value = "five")]
    pub scale: ScaleArg,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Input carries labels; per-label counts are added.
    #[arg(long)]
    pub labeled: bool,
    #[arg(long, short, default_value = "-")]
    pub output: String,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();
    let mode = if cli.threads == 1 { Execution::Sequential } else { Execution::Parallel };
    match exec::with_threads(cli.threads, || dispatch(cli.command, mode)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, mode: Execution) -> Result<()> {
    match command {
        Command::Prepare(a) => cmd_prepare(&a),
        Command::Crossval(a) => cmd_crossval(&a, mode),
        Command::Train(a) => cmd_train(&a, mode),
        Command::Detect(a) => cmd_detect(&a, mode),
        Command::Report(a) => cmd_report(&a),
        Command::Generate(a) => cmd_generate(&a),
        Command::Stats(a) => cmd_stats(&a),
    }
}

fn read_input(path: &str) -> Result<Vec<u8>> {
    if path == "-" {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf).map_err(|e| Error::io("<stdin>", e))?;
        Ok(buf)
    } else {
        std::fs::read(path).map_err(|e| Error::io(path, e))
    }
}

fn write_output(path: &str, data: &[u8]) -> Result<()> {
    if path == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(data).and_then(|_| out.flush()).map_err(|e| Error::io("<stdout>", e))
    } else {
        std::fs::write(path, data).map_err(|e| Error::io(path, e))
    }
}

fn write_path(path: &Path, data: &[u8]) -> Result<()> {
    std::fs::write(path, data).map_err(|e| Error::io(path, e))
}

/// Writes the manifest next to the primary output. Nothing is written
/// when the output is a stream.
fn finish_manifest(manifest: &mut RunManifest, primary: &str) -> Result<()> {
    manifest.finish();
    if primary != "-" {
        manifest.write(&sidecar_path(Path::new(primary)))?;
    }
    Ok(())
}

fn format_of(arg: Option<FormatArg>, path: &str) -> InputFormat {
    match arg {
        Some(FormatArg::Jsonl) => InputFormat::Jsonl,
        Some(FormatArg::Csv) => InputFormat::Csv,
        None => InputFormat::from_path(path),
    }
}

fn to_json_pretty<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn jsonl<T: Serialize>(items: &[T]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, items)?;
    Ok(buf)
}

fn read_jsonl<T: DeserializeOwned>(data: &[u8]) -> Result<Vec<T>> {
    let text = std::str::from_utf8(data).map_err(|e| Error::Parse {
        line: 0,
        message: format!("input is not UTF-8: {e}"),
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

fn emit_text(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_path(p, text.as_bytes()),
        None => {
            eprint!("{text}");
            Ok(())
        }
    }
}

#[derive(Debug, Serialize)]
struct PrepareSummary {
    input: usize,
    after_length_filter: usize,
    after_language_filter: usize,
    labeled_positive: usize,
    labeled_negative: usize,
    discarded_neutral: usize,
    output: usize,
}

fn cmd_prepare(a: &PrepareArgs) -> Result<()> {
    let data = read_input(&a.input)?;
    let mut manifest = RunManifest::start("prepare", a.seed);
    manifest
        .param("scale", a.scale.scale().name())
        .param("min_words", a.min_words)
        .param("pos_above", a.pos_above)
        .param("neg_below", a.neg_below)
        .param("per_class", a.per_class)
        .param("english_filter", !a.no_english_filter)
        .param("english_threshold", a.english_threshold)
        .input("corpus", &a.input, &data);
    let scale = a.scale.scale();
    let reviews = read_reviews(&data[..], format_of(a.format, &a.input), scale)?;
    let tokenizer = PipelineConfig::default().tokenizer();
    let long: Vec<&Review> = reviews
        .iter()
        .filter(|r| word_count_filter_with(r, a.min_words as usize, &tokenizer))
        .collect();
    let detector = EnglishDetector::with_threshold(a.english_threshold);
    let english: Vec<&Review> = long
        .iter()
        .copied()
        .filter(|r| a.no_english_filter || detector.detect(&r.text).0)
        .collect();
    let thresholds = LabelThresholds {
        positive_above: a.pos_above,
        negative_below: a.neg_below,
    };
    let mut labeled = Vec::new();
    for r in &english {
        if let Some(label) = label_by_score_with(r, scale, thresholds)? {
            labeled.push(LabeledDocument {
                review: (*r).clone(),
                label,
                label_source: LabelSource::ScoreThreshold,
            });
        }
    }
    let count = |l| labeled.iter().filter(|d| d.label == l).count();
    let mut summary = PrepareSummary {
        input: reviews.len(),
        after_length_filter: long.len(),
        after_language_filter: english.len(),
        labeled_positive: count(crate::corpus::PolarityLabel::Positive),
        labeled_negative: count(crate::corpus::PolarityLabel::Negative),
        discarded_neutral: english.len() - labeled.len(),
        output: 0,
    };
    let balanced = balance_sample(&labeled, a.per_class, a.seed);
    if let Ok(b) = &balanced {
        summary.output = b.len();
    }
    let summary_json = to_json_pretty(&summary)?;
    match &a.summary {
        Some(p) => write_path(p, &summary_json)?,
        None => eprint!("{}", String::from_utf8_lossy(&summary_json)),
    }
    let balanced = balanced?;
    let out = jsonl(&balanced)?;
    write_output(&a.output, &out)?;
    manifest.output("labeled", &a.output, &out);
    finish_manifest(&mut manifest, &a.output)
}

fn load_labeled(path: &str) -> Result<(Vec<u8>, Vec<LabeledDocument>)> {
    let data = read_input(path)?;
    let docs = read_labeled(&data[..], InputFormat::from_path(path), ScoreScale::TEN_POINT)?;
    if docs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok((data, docs))
}

fn load_stopwords(features: &FeatureConfig, manifest: &mut RunManifest) -> Result<Stopwords> {
    match &features.pipeline.stopword_file {
        Some(p) => {
            let data = std::fs::read(p)
                .map_err(|e| Error::Config(format!("cannot read stopword file {}: {e}", p.display())))?;
            manifest.input("stopwords", &p.display().to_string(), &data);
            Ok(Stopwords::parse(&String::from_utf8_lossy(&data)))
        }
        None => Ok(Stopwords::english()),
    }
}

#[derive(Serialize)]
struct WithManifest<'a, T: Serialize> {
    manifest_id: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

fn cmd_crossval(a: &CrossvalArgs, mode: Execution) -> Result<()> {
    let features = a.features.config();
    let trainers: Vec<TrainingConfig> = a
        .classifiers
        .iter()
        .map(|&k| a.model.config(k, a.seed))
        .collect::<Result<_>>()?;
    let (data, docs) = load_labeled(&a.input)?;
    let mut manifest = RunManifest::start("crossval", a.seed);
    manifest
        .param("features", &features)
        .param("trainers", &trainers)
        .param("folds", a.folds)
        .input("corpus", &a.input, &data);
    let stopwords = load_stopwords(&features, &mut manifest)?;
    let texts: Vec<&str> = docs.iter().map(|d| d.review.text.as_str()).collect();
    let labels: Vec<_> = docs.iter().map(|d| d.label).collect();
    let comparison = compare(&texts, &labels, &features, &stopwords, &trainers, a.folds as usize, a.seed, mode)?;
    let out = to_json_pretty(&WithManifest {
        manifest_id: manifest.id(),
        body: &comparison,
    })?;
    write_output(&a.output, &out)?;
    manifest.output("metrics", &a.output, &out);
    let table = comparison.render_table();
    emit_text(a.table.as_deref(), &table)?;
    if let Some(t) = &a.table {
        manifest.output("table", &t.display().to_string(), table.as_bytes());
    }
    finish_manifest(&mut manifest, &a.output)
}

/// `SOURCE_DATE_EPOCH` pins the model timestamp for reproducible builds;
/// without it the field is null and the wall clock lives in the manifest.
fn model_created_at() -> Result<Option<String>> {
    match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(v) => {
            let secs: i64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("SOURCE_DATE_EPOCH is not an integer: {v}")))?;
            let t = chrono::DateTime::from_timestamp(secs, 0)
                .ok_or_else(|| Error::Config(format!("SOURCE_DATE_EPOCH out of range: {v}")))?;
            Ok(Some(t.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)))
        }
        Err(_) => Ok(None),
    }
}

#[derive(Serialize)]
struct VectorDump<'a> {
    doc_id: &'a str,
    weights: BTreeMap<&'a str, f64>,
}

fn cmd_train(a: &TrainArgs, mode: Execution) -> Result<()> {
    let features = a.features.config();
    let training = a.model.config(a.classifier, a.seed)?;
    let (data, docs) = load_labeled(&a.input)?;
    let mut manifest = RunManifest::start("train", a.seed);
    manifest
        .param("features", &features)
        .param("training", &training)
        .input("corpus", &a.input, &data);
    let stopwords = load_stopwords(&features, &mut manifest)?;
    let texts: Vec<&str> = docs.iter().map(|d| d.review.text.as_str()).collect();
    let labels: Vec<_> = docs.iter().map(|d| d.label).collect();
    let model = PolarityModel::fit(&texts, &labels, &features, stopwords, &training, mode)?;
    if let crate::classify::Classifier::Svm(m) = &model.classifier {
        if !m.converged {
            log::warn!("SMO stopped at the iteration cap ({} iterations)", m.iterations);
        }
    }
    log::info!(
        "vocabulary {} terms, {} attributes kept",
        model.vocabulary().len(),
        model.selection().len()
    );
    let mut buf = Vec::new();
    save_model(&model, model_created_at()?, Some(manifest.id().to_string()), &mut buf)?;
    write_path(&a.output, &buf)?;
    let out_name = a.output.display().to_string();
    manifest.output("model", &out_name, &buf);

    if let Some(path) = &a.selection_report {
        let report = to_json_pretty(&model.selection().report(model.vocabulary()))?;
        write_path(path, &report)?;
        manifest.output("selection", &path.display().to_string(), &report);
    }
    if let Some(path) = &a.dump_vectors {
        let ids = model.selection().sorted_ids();
        let vocab = model.vocabulary();
        let dumps: Vec<VectorDump> = docs
            .iter()
            .map(|d| {
                let v = model.features.transform(&d.review.text);
                VectorDump {
                    doc_id: &d.review.id,
                    weights: v
                        .iter()
                        .map(|(c, w)| (vocab.term(ids[c as usize]).unwrap_or(""), w))
                        .collect(),
                }
            })
            .collect();
        let out = jsonl(&dumps)?;
        write_path(path, &out)?;
        manifest.output("vectors", &path.display().to_string(), &out);
    }
    finish_manifest(&mut manifest, &out_name)
}

#[derive(Debug, Serialize)]
struct DetectSummary {
    input_total: usize,
    dropped_excluded_score: usize,
    dropped_non_english: usize,
    scored: usize,
    mismatched: usize,
}

fn cmd_detect(a: &DetectArgs, mode: Execution) -> Result<()> {
    let model_bytes = std::fs::read(&a.model).map_err(|e| Error::io(&a.model, e))?;
    let model = load_model(&model_bytes)?;
    let data = read_input(&a.input)?;
    let mut manifest = RunManifest::start("detect", 0);
    manifest
        .param("exclude_score", (!a.no_exclude).then_some(a.exclude_score))
        .param("english_filter", !a.no_english_filter)
        .param("english_threshold", a.english_threshold)
        .input("model", &a.model.display().to_string(), &model_bytes)
        .input("corpus", &a.input, &data);
    let reviews = read_reviews(&data[..], format_of(a.format, &a.input), ScoreScale::FIVE_POINT)?;
    let total = reviews.len();
    let kept: Vec<Review> = if a.no_exclude {
        reviews
    } else {
        crate::corpus::exclude_score(&reviews, f64::from(a.exclude_score))
    };
    let dropped_score = total - kept.len();
    let detector = EnglishDetector::with_threshold(a.english_threshold);
    let english: Vec<Review> = if a.no_english_filter {
        kept
    } else {
        kept.into_iter().filter(|r| detector.detect(&r.text).0).collect()
    };
    let dropped_lang = total - dropped_score - english.len();
    let records = detect(&model, &english, mode)?;
    let out = jsonl(&records)?;
    write_output(&a.output, &out)?;
    manifest.output("records", &a.output, &out);
    let summary = DetectSummary {
        input_total: total,
        dropped_excluded_score: dropped_score,
        dropped_non_english: dropped_lang,
        scored: records.len(),
        mismatched: records.iter().filter(|r| r.pm == 1).count(),
    };
    let summary_json = to_json_pretty(&summary)?;
    match &a.summary {
        Some(p) => write_path(p, &summary_json)?,
        None => eprint!("{}", String::from_utf8_lossy(&summary_json)),
    }
    finish_manifest(&mut manifest, &a.output)
}

fn cmd_report(a: &ReportArgs) -> Result<()> {
    let mut manifest = RunManifest::start("report", a.seed);
    manifest.param("sample", a.sample);
    let (mut report, records) = match &a.counts {
        Some(path) => {
            let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            manifest.input("counts", &path.display().to_string(), &data);
            let b: ScoreBreakdown = serde_json::from_slice(&data).map_err(|e| Error::Parse {
                line: e.line(),
                message: e.to_string(),
            })?;
            (report_from_breakdown(&b)?, Vec::new())
        }
        None => {
            let data = read_input(&a.input)?;
            manifest.input("records", &a.input, &data);
            let records: Vec<MismatchRecord> = read_jsonl(&data)?;
            for (i, r) in records.iter().enumerate() {
                let check = MismatchRecord::new(r.review_id.clone(), r.score, r.predicted_polarity, r.decision_value)
                    .map_err(|e| Error::Validation {
                        line: i + 1,
                        message: e.to_string(),
                    })?;
                if check.pm != r.pm || check.actual_polarity != r.actual_polarity {
                    return Err(Error::Validation {
                        line: i + 1,
                        message: "pm or actual_polarity disagrees with the score".into(),
                    });
                }
            }
            (mismatch_report(&records)?, records)
        }
    };
    if a.sample > 0 {
        let texts: HashMap<String, String> = match &a.corpus {
            Some(path) => {
                let data = read_input(path)?;
                manifest.input("corpus", path, &data);
                read_reviews(&data[..], InputFormat::from_path(path), ScoreScale::FIVE_POINT)?
                    .into_iter()
                    .map(|r| (r.id, r.text))
                    .collect()
            }
            None => HashMap::new(),
        };
        for cat in Category::ALL {
            let picked = sample_records(&records, cat, a.sample, a.seed);
            let examples = picked
                .into_iter()
                .map(|r| SampledExample {
                    review_id: r.review_id.clone(),
                    score: r.score,
                    decision_value: r.decision_value,
                    text: texts.get(&r.review_id).cloned(),
                })
                .collect();
            report.sampled_examples.insert(cat, examples);
        }
    }
    let out = to_json_pretty(&WithManifest {
        manifest_id: manifest.id(),
        body: &report,
    })?;
    write_output(&a.output, &out)?;
    manifest.output("report", &a.output, &out);
    let tables = render_report(&report);
    emit_text(a.table.as_deref(), &tables)?;
    if let Some(t) = &a.table {
        manifest.output("tables", &t.display().to_string(), tables.as_bytes());
    }
    finish_manifest(&mut manifest, &a.output)
}

fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    if !(0.0..=1.0).contains(&a.noise_share) || !(0.0..=1.0).contains(&a.contamination) {
        return Err(Error::Config("--noise-share and --contamination must be in [0, 1]".into()));
    }
    let cfg = SynthConfig {
        noise_share: a.noise_share,
        contamination: a.contamination,
        ..SynthConfig::default()
    };
    let out = match a.kind {
        GenerateKind::Benchmark => jsonl(&synth::labeled_benchmark(a.n, a.seed, &cfg))?,
        GenerateKind::TenPoint => jsonl(&synth::ten_point_reviews(a.n, a.seed, &cfg))?,
        GenerateKind::FivePoint => jsonl(&synth::five_point_reviews(a.n, a.seed, &cfg))?,
    };
    write_output(&a.output, &out)
}

fn cmd_stats(a: &StatsArgs) -> Result<()> {
    let data = read_input(&a.input)?;
    let format = format_of(a.format, &a.input);
    let stats = if a.labeled {
        CorpusStats::of_labeled(&read_labeled(&data[..], format, a.scale.scale())?)
    } else {
        score_distribution(&read_reviews(&data[..], format, a.scale.scale())?)
    };
    write_output(&a.output, &to_json_pretty(&stats)?)
}
