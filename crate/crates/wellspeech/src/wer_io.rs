//! WER between reference and hypothesis transcript files paired by id.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::Deserialize;
use wellspeech_core::wer::{corpus_wer, text_wer, WerError, WerReport};

#[derive(Debug, thiserror::Error)]
pub enum WerIoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
    #[error("{path}: duplicate id {id:?}")]
    DuplicateId { path: PathBuf, id: String },
    #[error("hypothesis id {0:?} has no reference")]
    UnmatchedHypothesis(String),
    #[error("reference {id:?}: {source}")]
    Wer {
        id: String,
        #[source]
        source: WerError,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Deserialize)]
struct Line {
    id: String,
    text: String,
}

/// `id → text` from a JSONL file of `{"id", "text"}` objects. Corpus files
/// qualify; other fields are ignored.
pub fn read_transcripts(path: &Path) -> Result<BTreeMap<String, String>, WerIoError> {
    let io_err = |source| WerIoError::Io {
        path: path.to_path_buf(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io_err)?);
    let mut out = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let item: Line = serde_json::from_str(&line).map_err(|e| WerIoError::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        if out.insert(item.id.clone(), item.text).is_some() {
            return Err(WerIoError::DuplicateId {
                path: path.to_path_buf(),
                id: item.id,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WerTable {
    /// Per-id reports in id order.
    pub rows: Vec<(String, WerReport)>,
    pub overall: WerReport,
}

/// Scores every reference against the hypothesis with the same id. A
/// reference without a hypothesis is scored against empty output.
pub fn wer_table(
    references: &BTreeMap<String, String>,
    hypotheses: &BTreeMap<String, String>,
) -> Result<WerTable, WerIoError> {
    if let Some(id) = hypotheses.keys().find(|id| !references.contains_key(*id)) {
        return Err(WerIoError::UnmatchedHypothesis(id.clone()));
    }
    let mut rows = Vec::with_capacity(references.len());
    let mut pairs = Vec::with_capacity(references.len());
    for (id, r) in references {
        let h = hypotheses.get(id).map_or("", String::as_str);
        let report = text_wer(r, h).map_err(|source| WerIoError::Wer { id: id.clone(), source })?;
        rows.push((id.clone(), report));
        pairs.push((r.as_str(), h));
    }
    let overall = corpus_wer(&pairs).map_err(|source| WerIoError::Wer {
        id: String::new(),
        source,
    })?;
    Ok(WerTable { rows, overall })
}

/// CSV with one row per id and a final `ALL` row holding the pooled rates.
pub fn write_wer_csv<W: Write>(table: &WerTable, out: W) -> Result<(), WerIoError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "id", "n_ref", "substitutions", "deletions", "insertions", "wer_pct", "sub_pct", "del_pct", "ins_pct",
    ])?;
    let all = ("ALL".to_string(), table.overall);
    for (id, r) in table.rows.iter().chain(std::iter::once(&all)) {
        let c = r.counts;
        w.write_record([
            id.clone(),
            c.n_ref.to_string(),
            c.substitutions.to_string(),
            c.deletions.to_string(),
            c.insertions.to_string(),
            format!("{:.1}", r.wer_pct),
            format!("{:.1}", r.sub_pct),
            format!("{:.1}", r.del_pct),
            format!("{:.1}", r.ins_pct),
        ])?;
    }
    w.flush().map_err(|e| WerIoError::Csv(e.into()))?;
    Ok(())
}
