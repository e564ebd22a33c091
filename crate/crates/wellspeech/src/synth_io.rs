//! Writes a synthetic corpus together with a completion cache holding the
//! matching mock outputs, so `assess` can run on it without a live model.

use std::path::{Path, PathBuf};

use wellspeech_core::hash::prompt_hash;
use wellspeech_core::prompting::{build_prompt, PromptTemplate};
use wellspeech_core::synth::{generate_corpus, SynthConfig, SynthError, SyntheticRecord, DEFAULT_VOCAB};

use crate::corpus_io::write_corpus;
use crate::gateway::{CompletionCache, CompletionStatus, RawCompletion};

#[derive(Debug, thiserror::Error)]
pub enum SynthIoError {
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub records: Vec<SyntheticRecord>,
    pub cache_dir: PathBuf,
    /// Records skipped in the cache because their transcript yields no prompt.
    pub uncached: Vec<String>,
}

/// Default cache location next to a corpus file.
pub fn cache_dir_for(corpus_path: &Path) -> PathBuf {
    corpus_path.parent().unwrap_or(Path::new(".")).join("raw_cache")
}

/// Generates the corpus, writes it to `out`, and stores each mock output in
/// the cache under the prompt `template` builds for its transcript.
pub fn write_synthetic(
    cfg: &SynthConfig,
    out: &Path,
    cache_dir: &Path,
    model_id: &str,
    temperature: f64,
    template: &PromptTemplate,
) -> Result<SynthOutput, SynthIoError> {
    let records = generate_corpus(cfg, DEFAULT_VOCAB)?;
    let corpus: Vec<_> = records.iter().map(|r| r.record.clone()).collect();
    write_corpus(out, &corpus).map_err(|source| SynthIoError::Io {
        path: out.to_path_buf(),
        source,
    })?;

    let cache = CompletionCache::new(cache_dir);
    let mut uncached = Vec::new();
    for r in &records {
        let Ok(prompt) = build_prompt(template, &r.record.text) else {
            uncached.push(r.record.id.clone());
            continue;
        };
        let completion = RawCompletion {
            record_id: r.record.id.clone(),
            prompt_hash: prompt_hash(&prompt),
            content: r.mock_output.clone(),
            model_id: model_id.to_string(),
            latency_ms: 0,
            attempts: 1,
            status: CompletionStatus::Ok,
            error_class: None,
            error_message: None,
        };
        cache.put(temperature, &completion).map_err(|source| SynthIoError::Io {
            path: cache_dir.to_path_buf(),
            source,
        })?;
    }
    Ok(SynthOutput {
        records,
        cache_dir: cache_dir.to_path_buf(),
        uncached,
    })
}
