//! The assess → evaluate → report workflow and its on-disk artifacts.

mod assess;
mod config;
mod evaluate;
mod report;

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wellspeech_core::assessment::GroundedAssessment;

use crate::corpus_io::CorpusError;

pub use assess::{assess_records, run_assess, AssessManifest, AssessOutcome};
pub use config::{MetricsConfig, RunConfig};
pub use evaluate::{
    load_run, run_evaluate, EvaluateManifest, EvaluationInput, ModelExclusions, ModelReport, ReportBundle,
    SourceHistogram,
};
pub use report::{render_report, write_bundle};

pub const ASSESSMENTS_FILE: &str = "assessments.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}:{line}: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
    #[error("assessment for unknown record {record_id:?} ({model_id})")]
    UnknownRecord { model_id: String, record_id: String },
    #[error("corpus has no ground-truth scores")]
    MissingGroundTruth,
    #[error("{model_id}: only {n} matched pairs with ground truth, need at least 3")]
    TooFewPairs { model_id: String, n: usize },
    #[error("runtime: {0}")]
    Runtime(String),
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        PipelineError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// A record that produced no usable assessment, with a short class such as
/// `no_json`, `bad_score`, or `timeout`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Failure {
    pub record_id: String,
    pub class: String,
    #[serde(default)]
    pub message: String,
}

/// `manifest.json`: written by `assess`, extended by `evaluate`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assess: Option<AssessManifest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evaluate: Option<EvaluateManifest>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Malformed {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }

    /// Reads `path` if present, otherwise an empty manifest.
    pub fn read_or_default(path: &Path) -> Result<Self, PipelineError> {
        if path.exists() {
            Self::read(path)
        } else {
            Ok(Self::default())
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), PipelineError> {
        write_json(path, self)
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}

pub(crate) fn tally<'a>(classes: impl IntoIterator<Item = &'a str>) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for c in classes {
        *out.entry(c.to_string()).or_insert(0) += 1;
    }
    out
}

pub fn write_assessments(path: &Path, items: &[GroundedAssessment]) -> Result<(), PipelineError> {
    let file = fs::File::create(path).map_err(|e| PipelineError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for a in items {
        serde_json::to_writer(&mut w, a).expect("serializable");
        w.write_all(b"\n").map_err(|e| PipelineError::io(path, e))?;
    }
    w.flush().map_err(|e| PipelineError::io(path, e))
}

pub fn read_assessments(path: &Path) -> Result<Vec<GroundedAssessment>, PipelineError> {
    let file = fs::File::open(path).map_err(|e| PipelineError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| PipelineError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| PipelineError::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}
