use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use wellspeech::corpus_io::{load_corpus, CorpusFormat};
use wellspeech::gateway::{BackendConfig, BackendKind};
use wellspeech::pipeline::{
    load_run, render_report, run_assess, run_evaluate, write_bundle, MetricsConfig, ReportBundle, RunConfig,
};
use wellspeech::synth_io::{cache_dir_for, write_synthetic};
use wellspeech::wer_io::{read_transcripts, wer_table, write_wer_csv};
use wellspeech_core::assessment::ValidationMode;
use wellspeech_core::corpus::{corpus_stats, validate_records};
use wellspeech_core::metrics::Correction;
use wellspeech_core::mock::MockNoise;
use wellspeech_core::prompting::{default_template, parse_template};
use wellspeech_core::synth::{CorruptionClass, SynthConfig, TruthDistribution};

/// Score speech transcripts on the six Ryff well-being dimensions with
/// language models and compare against questionnaire scores.
#[derive(Debug, Parser)]
#[command(name = "wellspeech", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a corpus file and print its summary statistics.
    Ingest(IngestArgs),
    /// Prompt a model for every transcript and write grounded assessments.
    Assess(AssessArgs),
    /// Compare one or more assessment runs against ground truth.
    Evaluate(EvaluateArgs),
    /// Re-render report.md from a metrics.json file.
    Report(ReportArgs),
    /// Word error rate between reference and hypothesis transcripts.
    Wer(WerArgs),
    /// Generate a synthetic corpus with cached mock model outputs.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Jsonl,
    Csv,
}

impl From<FormatArg> for CorpusFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Jsonl => CorpusFormat::Jsonl,
            FormatArg::Csv => CorpusFormat::Csv,
        }
    }
}

#[derive(Debug, Args)]
struct IngestArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Defaults to the file extension.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Mock,
    Http,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Strict,
    Lenient,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NoiseArg {
    Clean,
    Fenced,
    ThinkBlock,
    ProseWrap,
}

#[derive(Debug, Args)]
struct AssessArgs {
    /// JSON run configuration; flags given here override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    backend: Option<KindArg>,
    #[arg(long)]
    base_url: Option<String>,
    #[arg(long)]
    model_id: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    max_tokens: Option<u32>,
    #[arg(long)]
    timeout_sec: Option<f64>,
    #[arg(long)]
    max_retries: Option<u32>,
    #[arg(long)]
    concurrency: Option<usize>,
    #[arg(long, value_enum)]
    mock_noise: Option<NoiseArg>,
    #[arg(long)]
    template: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CorrectionArg {
    None,
    Bonferroni,
    Holm,
}

#[derive(Debug, Args)]
struct MetricArgs {
    #[arg(long)]
    hist_width: Option<f64>,
    #[arg(long)]
    hist_lo: Option<f64>,
    #[arg(long)]
    hist_hi: Option<f64>,
    /// Also compute permutation p-values with this many shuffles.
    #[arg(long)]
    permutations: Option<usize>,
    #[arg(long)]
    no_retention: bool,
    #[arg(long, value_enum)]
    correction: Option<CorrectionArg>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// JSON run configuration supplying corpus, output directory, metrics,
    /// and seed.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Assessment run directory or assessments.jsonl; repeat for several
    /// models. Defaults to the output directory.
    #[arg(long = "run")]
    runs: Vec<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    metrics: MetricArgs,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    metrics: PathBuf,
    /// Defaults to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct WerArgs {
    /// JSONL of {"id", "text"} reference transcripts.
    #[arg(long = "ref")]
    reference: PathBuf,
    /// JSONL of {"id", "text"} hypothesis transcripts.
    #[arg(long)]
    hyp: PathBuf,
    /// CSV destination; defaults to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 111)]
    n: usize,
    #[arg(long, default_value_t = 8.0)]
    sigma: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth range as LO..HI.
    #[arg(long, default_value = "51..123", value_parser = parse_range)]
    range: (i64, i64),
    /// Pile ground truth toward the top of the range.
    #[arg(long)]
    skewed: bool,
    /// Probability that a mock keyword is absent from the transcript.
    #[arg(long, default_value_t = 0.0)]
    alien: f64,
    /// Corruption probabilities, e.g. `no_json=0.05,fenced=0.1`.
    #[arg(long, value_parser = parse_mix)]
    mix: Option<BTreeMap<CorruptionClass, f64>>,
    /// Model id the cached completions are filed under.
    #[arg(long, default_value = "mock")]
    model_id: String,
    #[arg(long, default_value_t = 0.0)]
    temperature: f64,
    #[arg(long)]
    template: Option<PathBuf>,
    /// Defaults to `raw_cache/` beside the corpus file.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once("..").ok_or("expected LO..HI")?;
    let lo = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi = hi.trim().parse().map_err(|e| format!("{e}"))?;
    Ok((lo, hi))
}

fn parse_mix(s: &str) -> Result<BTreeMap<CorruptionClass, f64>, String> {
    let mut out = BTreeMap::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let (class, p) = part.split_once('=').ok_or("expected class=probability")?;
        let class: CorruptionClass = class.trim().parse().map_err(|e| format!("{e}"))?;
        let p: f64 = p.trim().parse().map_err(|e| format!("{e}"))?;
        out.insert(class, p);
    }
    Ok(out)
}

fn ingest(args: IngestArgs) -> Result<()> {
    let format = args.format.map_or_else(|| CorpusFormat::from_path(&args.corpus), Into::into);
    let records = load_corpus(&args.corpus, format)?;
    if let Err((i, e)) = validate_records(&records) {
        bail!("record {}: {e}", i + 1);
    }
    let stats = corpus_stats(&records).context("corpus is empty")?;
    println!("records: {}", stats.n_records);
    println!("| Measure | n | Mean | Median | Std | Min | Max |");
    println!("|---|---|---|---|---|---|---|");
    for (label, s) in stats.rows() {
        match s {
            Some(s) => println!(
                "| {label} | {} | {:.2} | {:.2} | {:.2} | {:.2} | {:.2} |",
                s.n, s.mean, s.median, s.std, s.min, s.max
            ),
            None => println!("| {label} | 0 | | | | | |"),
        }
    }
    Ok(())
}

fn assess_config(args: AssessArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => {
            let corpus = args.corpus.clone().context("--corpus or --config is required")?;
            let out = args.out_dir.clone().context("--out-dir or --config is required")?;
            RunConfig::new(corpus, BackendConfig::mock("mock"), out)
        }
    };
    if let Some(v) = args.corpus {
        cfg.corpus_path = v;
    }
    if let Some(v) = args.out_dir {
        cfg.output_dir = v;
    }
    let b = &mut cfg.backend;
    match args.backend {
        Some(KindArg::Mock) => b.kind = BackendKind::Mock,
        Some(KindArg::Http) => b.kind = BackendKind::HttpOpenaiCompatible,
        None => {}
    }
    if args.base_url.is_some() {
        b.base_url = args.base_url;
    }
    if let Some(v) = args.model_id {
        b.model_id = v;
    }
    if let Some(v) = args.temperature {
        b.temperature = v;
    }
    if let Some(v) = args.max_tokens {
        b.max_output_tokens = v;
    }
    if let Some(v) = args.timeout_sec {
        b.timeout_sec = v;
    }
    if let Some(v) = args.max_retries {
        b.max_retries = v;
    }
    if let Some(v) = args.concurrency {
        b.concurrency_limit = v;
    }
    if let Some(v) = args.mock_noise {
        b.mock_noise = match v {
            NoiseArg::Clean => MockNoise::Clean,
            NoiseArg::Fenced => MockNoise::Fenced,
            NoiseArg::ThinkBlock => MockNoise::ThinkBlock,
            NoiseArg::ProseWrap => MockNoise::ProseWrap,
        };
    }
    if args.template.is_some() {
        cfg.template_path = args.template;
    }
    if let Some(v) = args.mode {
        cfg.mode = match v {
            ModeArg::Strict => ValidationMode::Strict,
            ModeArg::Lenient => ValidationMode::Lenient,
        };
    }
    if args.cache_dir.is_some() {
        cfg.cache_dir = args.cache_dir;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    Ok(cfg)
}

fn assess(args: AssessArgs) -> Result<()> {
    let cfg = assess_config(args)?;
    let outcome = run_assess(&cfg)?;
    let m = &outcome.manifest;
    println!(
        "{}: {} of {} records assessed, {} failed, {} backend calls",
        m.model_id,
        m.n_assessed,
        m.n_records,
        m.failures.len(),
        m.backend_calls
    );
    for (class, n) in &m.failure_counts {
        println!("  {class}: {n}");
    }
    Ok(())
}

fn apply_metric_args(m: &mut MetricsConfig, a: &MetricArgs) {
    if let Some(v) = a.hist_width {
        m.histogram_width = v;
    }
    if let Some(v) = a.hist_lo {
        m.histogram_lo = v;
    }
    if let Some(v) = a.hist_hi {
        m.histogram_hi = v;
    }
    if a.permutations.is_some() {
        m.permutation_iterations = a.permutations;
    }
    if a.no_retention {
        m.retention = false;
    }
    if let Some(c) = a.correction {
        m.correction = match c {
            CorrectionArg::None => Correction::None,
            CorrectionArg::Bonferroni => Correction::Bonferroni,
            CorrectionArg::Holm => Correction::Holm,
        };
    }
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let base = args.config.as_deref().map(RunConfig::load).transpose()?;
    let corpus_path = args
        .corpus
        .or_else(|| base.as_ref().map(|c| c.corpus_path.clone()))
        .context("--corpus or --config is required")?;
    let out_dir = args
        .out_dir
        .or_else(|| base.as_ref().map(|c| c.output_dir.clone()))
        .context("--out-dir or --config is required")?;
    let seed = args.seed.or(base.as_ref().map(|c| c.seed)).unwrap_or(42);
    let mut metrics = base.map(|c| c.metrics).unwrap_or_default();
    apply_metric_args(&mut metrics, &args.metrics);

    let runs = if args.runs.is_empty() { vec![out_dir.clone()] } else { args.runs };
    let inputs = runs
        .iter()
        .map(|p| load_run(p).with_context(|| format!("loading run {}", p.display())))
        .collect::<Result<Vec<_>>>()?;
    let corpus = load_corpus(&corpus_path, CorpusFormat::from_path(&corpus_path))?;
    let bundle = run_evaluate(&inputs, &corpus, &metrics, seed)?;
    write_bundle(&bundle, &out_dir)?;
    print!("{}", render_report(&bundle));
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&args.metrics).with_context(|| args.metrics.display().to_string())?;
    let bundle: ReportBundle = serde_json::from_str(&text).context("metrics.json does not hold a report bundle")?;
    let rendered = render_report(&bundle);
    match args.out {
        Some(path) => fs::write(&path, rendered).with_context(|| path.display().to_string())?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn wer(args: WerArgs) -> Result<()> {
    let refs = read_transcripts(&args.reference)?;
    let hyps = read_transcripts(&args.hyp)?;
    let table = wer_table(&refs, &hyps)?;
    match args.out {
        Some(path) => write_wer_csv(&table, fs::File::create(&path).with_context(|| path.display().to_string())?)?,
        None => write_wer_csv(&table, io::stdout().lock())?,
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let cfg = SynthConfig {
        n_records: args.n,
        truth_range: args.range,
        noise_sigma: args.sigma,
        seed: args.seed,
        malformation_mix: args.mix.unwrap_or_default(),
        truth_distribution: if args.skewed {
            TruthDistribution::Skewed
        } else {
            TruthDistribution::Uniform
        },
        alien_fraction: args.alien,
    };
    let template = match &args.template {
        Some(p) => parse_template(&fs::read_to_string(p).with_context(|| p.display().to_string())?)?,
        None => default_template(),
    };
    let cache_dir = args.cache_dir.unwrap_or_else(|| cache_dir_for(&args.out));
    let out = write_synthetic(&cfg, &args.out, &cache_dir, &args.model_id, args.temperature, &template)?;
    println!(
        "wrote {} records to {} and their completions to {}",
        out.records.len(),
        args.out.display(),
        display(&out.cache_dir)
    );
    Ok(())
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Ingest(a) => ingest(a),
        Command::Assess(a) => assess(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Report(a) => report(a),
        Command::Wer(a) => wer(a),
        Command::Synth(a) => synth(a),
    }
}
