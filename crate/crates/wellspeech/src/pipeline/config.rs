use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wellspeech_core::assessment::{ValidationMode, DEFAULT_MIN_OVERLAP};
use wellspeech_core::metrics::Correction;

use super::PipelineError;
use crate::gateway::BackendConfig;

fn default_seed() -> u64 {
    42
}
fn default_min_overlap() -> f64 {
    DEFAULT_MIN_OVERLAP
}
fn default_true() -> bool {
    true
}
fn default_hist_width() -> f64 {
    10.0
}
fn default_hist_hi() -> f64 {
    130.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsConfig {
    #[serde(default = "default_hist_width")]
    pub histogram_width: f64,
    #[serde(default)]
    pub histogram_lo: f64,
    #[serde(default = "default_hist_hi")]
    pub histogram_hi: f64,
    /// Permutation p-values are computed alongside the t-approximation
    /// when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation_iterations: Option<usize>,
    #[serde(default = "default_true")]
    pub retention: bool,
    #[serde(default)]
    pub correction: Correction,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            histogram_width: default_hist_width(),
            histogram_lo: 0.0,
            histogram_hi: default_hist_hi(),
            permutation_iterations: None,
            retention: true,
            correction: Correction::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub corpus_path: PathBuf,
    pub backend: BackendConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_path: Option<PathBuf>,
    #[serde(default)]
    pub mode: ValidationMode,
    pub output_dir: PathBuf,
    /// Defaults to `<output_dir>/raw_cache`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    #[serde(default)]
    pub metrics: MetricsConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Share of an evidence excerpt that must match the transcript.
    #[serde(default = "default_min_overlap")]
    pub min_overlap: f64,
}

impl RunConfig {
    pub fn new(corpus_path: impl Into<PathBuf>, backend: BackendConfig, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            corpus_path: corpus_path.into(),
            backend,
            template_path: None,
            mode: ValidationMode::Strict,
            output_dir: output_dir.into(),
            cache_dir: None,
            metrics: MetricsConfig::default(),
            seed: default_seed(),
            min_overlap: default_min_overlap(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.cache_dir.clone().unwrap_or_else(|| self.output_dir.join("raw_cache"))
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        self.backend
            .validate()
            .map_err(|e| PipelineError::Config(e.to_string()))?;
        if !self.corpus_path.is_file() {
            return Err(PipelineError::Config(format!(
                "corpus not found: {}",
                self.corpus_path.display()
            )));
        }
        if let Some(t) = &self.template_path {
            if !t.is_file() {
                return Err(PipelineError::Config(format!("template not found: {}", t.display())));
            }
        }
        let m = &self.metrics;
        if !(m.histogram_width > 0.0 && m.histogram_lo < m.histogram_hi) {
            return Err(PipelineError::Config("bad histogram width or range".into()));
        }
        if !(0.0..=1.0).contains(&self.min_overlap) {
            return Err(PipelineError::Config("min_overlap must be in [0, 1]".into()));
        }
        Ok(())
    }
}
