use std::collections::BTreeMap;
use std::fs;

use serde::{Deserialize, Serialize};
use wellspeech_core::assessment::{assess_raw, ground_keywords_with, GroundedAssessment, ValidationMode};
use wellspeech_core::corpus::TranscriptRecord;
use wellspeech_core::hash::prompt_hash;
use wellspeech_core::prompting::{
    build_prompt, default_template, parse_template, render_template_file, validate_template, PromptError,
    PromptTemplate,
};

use super::{tally, write_assessments, Failure, Manifest, PipelineError, RunConfig, ASSESSMENTS_FILE, MANIFEST_FILE};
use crate::corpus_io::{load_corpus, CorpusFormat};
use crate::gateway::{BackendConfig, CompletionCache, Gateway};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessManifest {
    pub model_id: String,
    pub backend: BackendConfig,
    pub seed: u64,
    pub mode: ValidationMode,
    pub template_hash: String,
    pub n_records: usize,
    pub n_assessed: usize,
    pub failures: Vec<Failure>,
    pub failure_counts: BTreeMap<String, u64>,
    pub flag_tallies: BTreeMap<String, u64>,
    pub keywords_grounded: u64,
    pub keywords_dropped: u64,
    /// Backend requests made by this run; zero when every prompt was cached.
    pub backend_calls: u64,
}

#[derive(Debug, Clone)]
pub struct AssessOutcome {
    /// Successful assessments, in corpus order.
    pub assessments: Vec<GroundedAssessment>,
    pub failures: Vec<Failure>,
    pub manifest: AssessManifest,
}

pub(crate) fn load_template(config: &RunConfig) -> Result<PromptTemplate, PipelineError> {
    let template = match &config.template_path {
        None => default_template(),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
            parse_template(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?
        }
    };
    let defects = validate_template(&template);
    if !defects.is_empty() {
        let list: Vec<String> = defects.iter().map(ToString::to_string).collect();
        return Err(PipelineError::Config(format!("invalid template: {}", list.join("; "))));
    }
    Ok(template)
}

/// Prompts, completes, validates, and grounds every record through
/// `gateway`. Nothing is written to disk except the gateway's cache.
pub async fn assess_records(
    config: &RunConfig,
    gateway: &Gateway,
    records: &[TranscriptRecord],
    template: &PromptTemplate,
) -> AssessOutcome {
    let calls_before = gateway.backend_calls();
    let mut failures = Vec::new();
    let mut prompts = Vec::with_capacity(records.len());
    for r in records {
        match build_prompt(template, &r.text) {
            Ok(p) => prompts.push((r.id.clone(), p)),
            Err(e) => failures.push(Failure {
                record_id: r.id.clone(),
                class: match e {
                    PromptError::EmptyTranscript => "empty_transcript".into(),
                    PromptError::InvalidTemplate(_) => "invalid_template".into(),
                },
                message: e.to_string(),
            }),
        }
    }

    let completions = gateway.assess_batch(&prompts).await;
    let by_id: BTreeMap<&str, &TranscriptRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    let mut assessments = Vec::with_capacity(completions.len());
    for c in &completions {
        if !c.is_ok() {
            failures.push(Failure {
                record_id: c.record_id.clone(),
                class: c.error_class.map_or("failed", |e| e.as_str()).to_string(),
                message: c.error_message.clone().unwrap_or_default(),
            });
            continue;
        }
        match assess_raw(&c.content, &c.record_id, config.mode) {
            Ok(result) => {
                let text = &by_id[c.record_id.as_str()].text;
                assessments.push(ground_keywords_with(&result, text, config.min_overlap));
            }
            Err(e) => failures.push(Failure {
                record_id: c.record_id.clone(),
                class: e.class().to_string(),
                message: e.to_string(),
            }),
        }
    }
    let order: BTreeMap<&str, usize> = records.iter().enumerate().map(|(i, r)| (r.id.as_str(), i)).collect();
    failures.sort_by_key(|f| order[f.record_id.as_str()]);

    let manifest = AssessManifest {
        model_id: config.backend.model_id.clone(),
        backend: config.backend.clone(),
        seed: config.seed,
        mode: config.mode,
        template_hash: prompt_hash(&render_template_file(template)),
        n_records: records.len(),
        n_assessed: assessments.len(),
        failure_counts: tally(failures.iter().map(|f| f.class.as_str())),
        failures: failures.clone(),
        flag_tallies: tally(
            assessments
                .iter()
                .flat_map(|a| a.base.validation_flags.iter().map(|f| f.as_str())),
        ),
        keywords_grounded: assessments.iter().map(|a| a.grounded_count() as u64).sum(),
        keywords_dropped: assessments.iter().map(|a| a.dropped_count() as u64).sum(),
        backend_calls: gateway.backend_calls() - calls_before,
    };
    AssessOutcome {
        assessments,
        failures,
        manifest,
    }
}

/// Runs the assess stage on a single-threaded runtime and writes
/// `assessments.jsonl`, the completion cache, and the `assess` section of
/// `manifest.json` under `config.output_dir`.
pub fn run_assess(config: &RunConfig) -> Result<AssessOutcome, PipelineError> {
    config.validate()?;
    let format = CorpusFormat::from_path(&config.corpus_path);
    let records = load_corpus(&config.corpus_path, format)?;
    let template = load_template(config)?;
    fs::create_dir_all(&config.output_dir).map_err(|e| PipelineError::io(&config.output_dir, e))?;

    let gateway = Gateway::new(config.backend.clone(), config.seed)
        .map_err(|e| PipelineError::Config(e.to_string()))?
        .with_cache(CompletionCache::new(config.cache_dir()));
    let runtime = tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .map_err(|e| PipelineError::Runtime(e.to_string()))?;
    let outcome = runtime.block_on(assess_records(config, &gateway, &records, &template));

    write_assessments(&config.output_dir.join(ASSESSMENTS_FILE), &outcome.assessments)?;
    let manifest_path = config.output_dir.join(MANIFEST_FILE);
    let mut manifest = Manifest::read_or_default(&manifest_path)?;
    manifest.assess = Some(outcome.manifest.clone());
    manifest.evaluate = None;
    manifest.write(&manifest_path)?;
    Ok(outcome)
}
