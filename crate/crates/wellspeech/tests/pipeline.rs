use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;
use wellspeech::corpus_io::{load_corpus, CorpusFormat};
use wellspeech::gateway::{BackendConfig, CompletionCache, RawCompletion};
use wellspeech::pipeline::{
    load_run, read_assessments, render_report, run_assess, run_evaluate, write_bundle, EvaluationInput, Manifest,
    MetricsConfig, RunConfig,
};
use wellspeech::synth_io::write_synthetic;
use wellspeech_core::assessment::{ground_keywords, AssessmentResult, DimensionAssessment};
use wellspeech_core::metrics::{pearson, spearman};
use wellspeech_core::prompting::default_template;
use wellspeech_core::synth::{corrupt_output, CorruptionClass, SynthConfig};
use wellspeech_core::DimensionName;

fn synth_run(dir: &Path, n: usize, sigma: f64, seed: u64) -> RunConfig {
    let corpus = dir.join("corpus.jsonl");
    let cfg = SynthConfig {
        n_records: n,
        noise_sigma: sigma,
        seed,
        ..SynthConfig::default()
    };
    write_synthetic(&cfg, &corpus, &dir.join("raw_cache"), "mock", 0.0, &default_template()).unwrap();
    let mut run = RunConfig::new(corpus, BackendConfig::mock("mock"), dir);
    run.seed = seed;
    run
}

#[test]
fn ten_records_assess_cleanly_and_rerun_is_free() {
    let dir = tempfile::tempdir().unwrap();
    let run = synth_run(dir.path(), 10, 8.0, 1);
    let first = run_assess(&run).unwrap();
    assert_eq!(first.assessments.len(), 10);
    assert!(first.failures.is_empty());
    // Every prompt was pre-cached by synth.
    assert_eq!(first.manifest.backend_calls, 0);
    assert_eq!(read_assessments(&dir.path().join("assessments.jsonl")).unwrap(), first.assessments);

    // A fresh cache directory forces backend calls; the rerun then costs none.
    let mut fresh = run.clone();
    fresh.cache_dir = Some(dir.path().join("other_cache"));
    assert_eq!(run_assess(&fresh).unwrap().manifest.backend_calls, 10);
    assert_eq!(run_assess(&fresh).unwrap().manifest.backend_calls, 0);
}

#[test]
fn one_unparseable_output_is_isolated() {
    let dir = tempfile::tempdir().unwrap();
    let run = synth_run(dir.path(), 10, 8.0, 2);
    let records = load_corpus(&run.corpus_path, CorpusFormat::Jsonl).unwrap();
    let prompt = wellspeech_core::prompting::build_prompt(&default_template(), &records[2].text).unwrap();
    let cache = CompletionCache::new(run.cache_dir());
    let path = cache.entry_path("mock", 0.0, &wellspeech_core::hash::prompt_hash(&prompt));
    let mut entry: RawCompletion = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    entry.content = corrupt_output(&entry.content, CorruptionClass::NoJson, 0).unwrap();
    fs::write(&path, serde_json::to_string(&entry).unwrap()).unwrap();

    let out = run_assess(&run).unwrap();
    assert_eq!(out.assessments.len(), 9);
    assert_eq!(out.failures.len(), 1);
    assert_eq!(out.failures[0].record_id, records[2].id);
    assert_eq!(out.failures[0].class, "no_json");

    let manifest = Manifest::read(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(manifest.assess.unwrap().failure_counts, BTreeMap::from([("no_json".to_string(), 1)]));

    let input = load_run(dir.path()).unwrap();
    let bundle = run_evaluate(&[input], &records, &MetricsConfig::default(), 2).unwrap();
    let ex = &bundle.manifest.models[0];
    assert_eq!(ex.n_matched + ex.excluded.len(), records.len());
    assert!(ex.accounting_holds);
    let report = render_report(&bundle);
    assert!(report.contains("Exclusions (1): no_json: 1"), "{report}");
    assert!(report.contains(&format!("- {}: no_json", records[2].id)));
}

#[test]
fn noiseless_run_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let run = synth_run(dir.path(), 30, 0.0, 3);
    run_assess(&run).unwrap();
    let records = load_corpus(&run.corpus_path, CorpusFormat::Jsonl).unwrap();
    let bundle = run_evaluate(&[load_run(dir.path()).unwrap()], &records, &MetricsConfig::default(), 3).unwrap();
    let m = &bundle.models[0];
    assert_eq!(m.pearson.unwrap().coefficient, 1.0);
    assert_eq!(m.spearman.unwrap().coefficient, 1.0);
    assert!(m.spearman.unwrap().p_value < 0.01);
    assert!(m.retention.iter().all(|p| p.cumulative_scc == Some(1.0)));
    let report = render_report(&bundle);
    assert!(report.contains("SCC: 1.000"));
    assert!(report.contains("PCC: 1.000"));
    assert_eq!(report, render_report(&bundle));
}

fn flat(id: &str, per_dim: i64) -> wellspeech_core::assessment::GroundedAssessment {
    let dims = DimensionName::ALL
        .iter()
        .map(|&dimension| DimensionAssessment {
            dimension,
            score: per_dim,
            keywords: vec!["garden".into()],
            evidence: vec![],
        })
        .collect();
    let r = AssessmentResult::from_dimensions(id, dims, Default::default()).unwrap();
    ground_keywords(&r, "my garden")
}

#[test]
fn constant_predictions_surface_an_error_and_continue() {
    let dir = tempfile::tempdir().unwrap();
    let run = synth_run(dir.path(), 12, 8.0, 4);
    let records = load_corpus(&run.corpus_path, CorpusFormat::Jsonl).unwrap();
    let input = EvaluationInput {
        model_id: "flat".into(),
        assessments: records.iter().map(|r| flat(&r.id, 10)).collect(),
        failures: vec![],
    };
    let bundle = run_evaluate(&[input], &records, &MetricsConfig::default(), 4).unwrap();
    let m = &bundle.models[0];
    assert!(m.pearson.is_none() && m.spearman.is_none());
    assert!(m.metric_errors.iter().any(|e| e.contains("zero variance")));
    assert_eq!(m.predictions.unwrap().std, 0.0);
    assert_eq!(m.keywords, vec![("garden".to_string(), 12 * 6)]);
    write_bundle(&bundle, dir.path()).unwrap();
    assert!(fs::read_to_string(dir.path().join("report.md")).unwrap().contains("SCC: n/a"));
}

#[test]
fn evaluate_errors() {
    let dir = tempfile::tempdir().unwrap();
    let run = synth_run(dir.path(), 5, 8.0, 5);
    let records = load_corpus(&run.corpus_path, CorpusFormat::Jsonl).unwrap();
    let few = EvaluationInput {
        model_id: "m".into(),
        assessments: records.iter().take(2).map(|r| flat(&r.id, 10)).collect(),
        failures: vec![],
    };
    assert!(run_evaluate(&[few], &records, &MetricsConfig::default(), 0).is_err());
    let stranger = EvaluationInput {
        model_id: "m".into(),
        assessments: vec![flat("nobody", 10)],
        failures: vec![],
    };
    assert!(run_evaluate(&[stranger], &records, &MetricsConfig::default(), 0).is_err());
    let mut no_truth = records.clone();
    no_truth.iter_mut().for_each(|r| r.ground_truth_ryff = None);
    let ok = EvaluationInput {
        model_id: "m".into(),
        assessments: records.iter().map(|r| flat(&r.id, 10)).collect(),
        failures: vec![],
    };
    assert!(run_evaluate(&[ok], &no_truth, &MetricsConfig::default(), 0).is_err());
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

/// Textbook Pearson on plain f64, for comparison with the library.
fn textbook_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    sxy / (sxx * syy).sqrt()
}

#[test]
fn written_metrics_match_a_recomputation_from_the_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = synth_run(dir.path(), 111, 8.0, 42);
    run_assess(&run).unwrap();
    let records = load_corpus(&run.corpus_path, CorpusFormat::Jsonl).unwrap();
    let bundle = run_evaluate(&[load_run(dir.path()).unwrap()], &records, &MetricsConfig::default(), 42).unwrap();
    write_bundle(&bundle, dir.path()).unwrap();

    // Recompute from the raw JSONL text without the library's types.
    let truth: BTreeMap<String, f64> = fs::read_to_string(&run.corpus_path)
        .unwrap()
        .lines()
        .map(|l| {
            let v: Value = serde_json::from_str(l).unwrap();
            (v["id"].as_str().unwrap().to_string(), num(&v["ground_truth_ryff"]))
        })
        .collect();
    let mut pred = Vec::new();
    let mut gt = Vec::new();
    for line in fs::read_to_string(dir.path().join("assessments.jsonl")).unwrap().lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        let total: f64 = v["base"]["dimensions"].as_array().unwrap().iter().map(|d| num(&d["score"])).sum();
        assert_eq!(total, num(&v["base"]["total"]));
        pred.push(total);
        gt.push(truth[v["base"]["record_id"].as_str().unwrap()]);
    }
    let metrics: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("metrics.json")).unwrap()).unwrap();
    let m = &metrics["models"][0];
    assert_eq!(m["n_matched"], 111);
    let pcc = num(&m["pearson"]["coefficient"]);
    let scc = num(&m["spearman"]["coefficient"]);
    assert!((pcc - textbook_pearson(&pred, &gt)).abs() < 1e-12);
    // Library path on the same data: no drift.
    assert_eq!(pcc, pearson(&pred, &gt).unwrap().coefficient);
    assert_eq!(scc, spearman(&pred, &gt).unwrap().coefficient);
    assert_eq!(num(&m["spearman"]["p_value"]), spearman(&pred, &gt).unwrap().p_value);
    assert!(scc > 0.85, "{scc}");

    let csv = fs::read_to_string(dir.path().join("correlations.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with(&format!("mock,spearman,111,{scc:?},"))), "{csv}");
    let hist = fs::read_to_string(dir.path().join("histogram.csv")).unwrap();
    let gt_count: u64 = hist
        .lines()
        .filter(|l| l.starts_with("ground_truth,"))
        .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(gt_count, 111);
    let retention = fs::read_to_string(dir.path().join("retention.csv")).unwrap();
    let last = retention.lines().last().unwrap();
    assert!(last.starts_with("mock,111,100.0,"), "{last}");
    assert_eq!(last.rsplit(',').next().unwrap().parse::<f64>().unwrap(), scc);
    for f in ["report.md", "keywords.tsv", "manifest.json"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let manifest = Manifest::read(&dir.path().join("manifest.json")).unwrap();
    assert!(manifest.assess.is_some() && manifest.evaluate.is_some());
}

fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_wellspeech"))
}

fn run_cli(args: &[&str]) -> String {
    let out = std::process::Command::new(bin()).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn command_line_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let corpus = format!("{d}/corpus.jsonl");
    run_cli(&["synth", "--n", "40", "--sigma", "8", "--seed", "42", "--out", &corpus, "--mix", "no_json=0.1"]);
    assert!(run_cli(&["ingest", "--corpus", &corpus]).contains("records: 40"));
    let assess = run_cli(&["assess", "--corpus", &corpus, "--out-dir", d, "--concurrency", "3"]);
    assert!(assess.contains("0 backend calls"), "{assess}");
    let report = run_cli(&["evaluate", "--corpus", &corpus, "--out-dir", d, "--permutations", "1000", "--correction", "holm"]);
    assert!(report.contains("| mock | "));
    let again = run_cli(&["report", "--metrics", &format!("{d}/metrics.json")]);
    assert_eq!(again, fs::read_to_string(format!("{d}/report.md")).unwrap());

    let cfg = RunConfig::new(&corpus, BackendConfig::mock("mock"), format!("{d}/viaconfig"));
    let cfg_path = format!("{d}/run.json");
    fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();
    run_cli(&["assess", "--config", &cfg_path]);
    assert!(Path::new(&format!("{d}/viaconfig/assessments.jsonl")).is_file());

    fs::write(format!("{d}/ref.jsonl"), "{\"id\":\"a\",\"text\":\"the cat sat down\"}\n").unwrap();
    fs::write(format!("{d}/hyp.jsonl"), "{\"id\":\"a\",\"text\":\"the cat sit\"}\n").unwrap();
    let wer = run_cli(&["wer", "--ref", &format!("{d}/ref.jsonl"), "--hyp", &format!("{d}/hyp.jsonl")]);
    assert!(wer.contains("ALL,4,1,1,0,50.0,25.0,25.0,0.0"), "{wer}");

    let bad = std::process::Command::new(bin())
        .args(["ingest", "--corpus", &format!("{d}/missing.jsonl")])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}
