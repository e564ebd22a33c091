use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use wellspeech_core::assessment::GroundedAssessment;
use wellspeech_core::corpus::TranscriptRecord;
use wellspeech_core::metrics::{
    adjust_p_values, descriptive_stats, histogram, keyword_frequencies, p_value_permutation, pearson,
    retention_curve, spearman, CorrelationMethod, CorrelationResult, Correction, DescriptiveStats,
    HistogramBins, RetentionPoint,
};

use super::{
    read_assessments, tally, Failure, Manifest, MetricsConfig, PipelineError, ASSESSMENTS_FILE, MANIFEST_FILE,
};

/// One model's assess-stage output.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationInput {
    pub model_id: String,
    pub assessments: Vec<GroundedAssessment>,
    pub failures: Vec<Failure>,
}

/// Reads `assessments.jsonl` and the failures recorded in `manifest.json`
/// from a run directory (or from the directory holding an assessments
/// file). Without a manifest the model id is the directory name.
pub fn load_run(path: &Path) -> Result<EvaluationInput, PipelineError> {
    let (dir, file) = if path.is_dir() {
        (path.to_path_buf(), path.join(ASSESSMENTS_FILE))
    } else {
        (path.parent().unwrap_or(Path::new(".")).to_path_buf(), path.to_path_buf())
    };
    let assessments = read_assessments(&file)?;
    let manifest = Manifest::read_or_default(&dir.join(MANIFEST_FILE))?;
    let (model_id, failures) = match manifest.assess {
        Some(m) => (m.model_id, m.failures),
        None => (
            dir.file_name().map_or_else(|| "model".into(), |n| n.to_string_lossy().into_owned()),
            Vec::new(),
        ),
    };
    Ok(EvaluationInput {
        model_id,
        assessments,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelExclusions {
    pub model_id: String,
    pub n_matched: usize,
    pub excluded: Vec<Failure>,
    pub exclusion_counts: BTreeMap<String, u64>,
    /// `n_matched + excluded.len() == corpus_size`.
    pub accounting_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluateManifest {
    pub corpus_size: usize,
    pub seed: u64,
    pub model_ids: Vec<String>,
    pub models: Vec<ModelExclusions>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model_id: String,
    pub n_matched: usize,
    pub pearson: Option<CorrelationResult>,
    pub spearman: Option<CorrelationResult>,
    pub pearson_p_permutation: Option<f64>,
    pub spearman_p_permutation: Option<f64>,
    pub pearson_p_adjusted: Option<f64>,
    pub spearman_p_adjusted: Option<f64>,
    /// Problems that prevented a metric, e.g. constant predictions.
    pub metric_errors: Vec<String>,
    pub predictions: Option<DescriptiveStats>,
    pub matched_ground_truth: Option<DescriptiveStats>,
    pub retention: Vec<RetentionPoint>,
    pub keywords: Vec<(String, u64)>,
    pub keywords_grounded: u64,
    pub keywords_dropped: u64,
    pub flag_tallies: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceHistogram {
    pub source: String,
    pub bins: HistogramBins,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub corpus_size: usize,
    pub seed: u64,
    pub correction: Correction,
    pub permutation_iterations: Option<usize>,
    pub ground_truth: DescriptiveStats,
    pub models: Vec<ModelReport>,
    pub histograms: Vec<SourceHistogram>,
    pub manifest: EvaluateManifest,
}

struct Matched {
    ids: Vec<String>,
    pred: Vec<f64>,
    truth: Vec<f64>,
}

/// Pairs predictions with ground truth and accounts for every corpus record
/// that is not paired.
fn match_model(input: &EvaluationInput, corpus: &[TranscriptRecord]) -> Result<(Matched, ModelExclusions), PipelineError> {
    let mut assessed: BTreeMap<&str, &GroundedAssessment> = BTreeMap::new();
    let known: BTreeSet<&str> = corpus.iter().map(|r| r.id.as_str()).collect();
    for a in &input.assessments {
        let id = a.base.record_id.as_str();
        if !known.contains(id) {
            return Err(PipelineError::UnknownRecord {
                model_id: input.model_id.clone(),
                record_id: id.to_string(),
            });
        }
        assessed.insert(id, a);
    }
    let failed: BTreeMap<&str, &Failure> = input.failures.iter().map(|f| (f.record_id.as_str(), f)).collect();

    let mut m = Matched {
        ids: Vec::new(),
        pred: Vec::new(),
        truth: Vec::new(),
    };
    let mut excluded = Vec::new();
    for r in corpus {
        let id = r.id.as_str();
        let exclusion = match (assessed.get(id), r.ground_truth_ryff) {
            (Some(a), Some(t)) => {
                m.ids.push(r.id.clone());
                m.pred.push(a.base.total as f64);
                m.truth.push(t as f64);
                None
            }
            (Some(_), None) => Some(("missing_ground_truth".to_string(), String::new())),
            (None, _) => Some(match failed.get(id) {
                Some(f) => (f.class.clone(), f.message.clone()),
                None => ("not_assessed".to_string(), String::new()),
            }),
        };
        if let Some((class, message)) = exclusion {
            excluded.push(Failure {
                record_id: r.id.clone(),
                class,
                message,
            });
        }
    }
    let n_matched = m.ids.len();
    let exclusions = ModelExclusions {
        model_id: input.model_id.clone(),
        n_matched,
        exclusion_counts: tally(excluded.iter().map(|f| f.class.as_str())),
        accounting_holds: n_matched + excluded.len() == corpus.len(),
        excluded,
    };
    Ok((m, exclusions))
}

fn histogram_of(source: &str, values: &[f64], cfg: &MetricsConfig) -> Result<SourceHistogram, PipelineError> {
    let bins = histogram(values, cfg.histogram_width, cfg.histogram_lo, cfg.histogram_hi)
        .map_err(|e| PipelineError::Config(format!("histogram: {e}")))?;
    Ok(SourceHistogram {
        source: source.to_string(),
        bins,
    })
}

/// Correlations, descriptive statistics, retention curves, histograms, and
/// keyword counts for each model against the corpus ground truth.
pub fn run_evaluate(
    inputs: &[EvaluationInput],
    corpus: &[TranscriptRecord],
    cfg: &MetricsConfig,
    seed: u64,
) -> Result<ReportBundle, PipelineError> {
    let truth_all: Vec<f64> = corpus.iter().filter_map(|r| r.ground_truth_ryff).map(|t| t as f64).collect();
    if truth_all.is_empty() {
        return Err(PipelineError::MissingGroundTruth);
    }
    let ground_truth = descriptive_stats(&truth_all).expect("non-empty");
    let mut histograms = vec![histogram_of("ground_truth", &truth_all, cfg)?];
    let mut models = Vec::with_capacity(inputs.len());
    let mut manifest_models = Vec::with_capacity(inputs.len());

    for input in inputs {
        let (m, exclusions) = match_model(input, corpus)?;
        if m.ids.len() < 3 {
            return Err(PipelineError::TooFewPairs {
                model_id: input.model_id.clone(),
                n: m.ids.len(),
            });
        }
        let mut metric_errors = Vec::new();
        let pcc = pearson(&m.pred, &m.truth)
            .map_err(|e| metric_errors.push(format!("pearson: {e}")))
            .ok();
        let scc = spearman(&m.pred, &m.truth)
            .map_err(|e| metric_errors.push(format!("spearman: {e}")))
            .ok();
        let mut perm = |method, present: bool| -> Option<f64> {
            let iterations = cfg.permutation_iterations?;
            if !present {
                return None;
            }
            p_value_permutation(&m.pred, &m.truth, method, iterations, seed)
                .map_err(|e| metric_errors.push(format!("{method:?} permutation: {e}").to_lowercase()))
                .ok()
        };
        let pearson_p_permutation = perm(CorrelationMethod::Pearson, pcc.is_some());
        let spearman_p_permutation = perm(CorrelationMethod::Spearman, scc.is_some());
        let retention = if cfg.retention {
            retention_curve(&m.pred, &m.truth, &m.ids)
                .map_err(|e| metric_errors.push(format!("retention: {e}")))
                .unwrap_or_default()
        } else {
            Vec::new()
        };
        histograms.push(histogram_of(&input.model_id, &m.pred, cfg)?);
        models.push(ModelReport {
            model_id: input.model_id.clone(),
            n_matched: m.ids.len(),
            pearson: pcc,
            spearman: scc,
            pearson_p_permutation,
            spearman_p_permutation,
            pearson_p_adjusted: None,
            spearman_p_adjusted: None,
            metric_errors,
            predictions: descriptive_stats(&m.pred).ok(),
            matched_ground_truth: descriptive_stats(&m.truth).ok(),
            retention,
            keywords: keyword_frequencies(&input.assessments),
            keywords_grounded: input.assessments.iter().map(|a| a.grounded_count() as u64).sum(),
            keywords_dropped: input.assessments.iter().map(|a| a.dropped_count() as u64).sum(),
            flag_tallies: tally(
                input
                    .assessments
                    .iter()
                    .flat_map(|a| a.base.validation_flags.iter().map(|f| f.as_str())),
            ),
        });
        manifest_models.push(exclusions);
    }

    if cfg.correction != Correction::None {
        let mut slots: Vec<(usize, bool, f64)> = Vec::new();
        for (i, m) in models.iter().enumerate() {
            if let Some(r) = &m.pearson {
                slots.push((i, false, r.p_value));
            }
            if let Some(r) = &m.spearman {
                slots.push((i, true, r.p_value));
            }
        }
        let raw: Vec<f64> = slots.iter().map(|s| s.2).collect();
        for ((i, is_spearman, _), adj) in slots.into_iter().zip(adjust_p_values(&raw, cfg.correction)) {
            if is_spearman {
                models[i].spearman_p_adjusted = Some(adj);
            } else {
                models[i].pearson_p_adjusted = Some(adj);
            }
        }
    }

    Ok(ReportBundle {
        corpus_size: corpus.len(),
        seed,
        correction: cfg.correction,
        permutation_iterations: cfg.permutation_iterations,
        ground_truth,
        models,
        histograms,
        manifest: EvaluateManifest {
            corpus_size: corpus.len(),
            seed,
            model_ids: inputs.iter().map(|i| i.model_id.clone()).collect(),
            models: manifest_models,
        },
    })
}
