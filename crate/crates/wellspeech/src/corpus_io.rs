//! Reading and writing transcript corpora (JSONL and CSV).

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use wellspeech_core::corpus::{validate_records, RecordError, Sex, TranscriptRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guesses from the file extension; anything but `.csv` is JSONL.
    pub fn from_path(path: &Path) -> CorpusFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" => Ok(CorpusFormat::Jsonl),
            "csv" => Ok(CorpusFormat::Csv),
            other => Err(format!("unknown corpus format {other:?}")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: RecordError },
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<TranscriptRecord>, CorpusError> {
    let file = File::open(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let reader = BufReader::new(file);
    match format {
        CorpusFormat::Jsonl => read_jsonl(reader),
        CorpusFormat::Csv => read_csv(reader),
    }
}

fn finish(records: Vec<TranscriptRecord>, lines: Vec<usize>) -> Result<Vec<TranscriptRecord>, CorpusError> {
    validate_records(&records).map_err(|(idx, source)| CorpusError::Invalid {
        line: lines[idx],
        source,
    })?;
    Ok(records)
}

/// One JSON object per line; blank lines are skipped.
pub fn read_jsonl<R: BufRead>(reader: R) -> Result<Vec<TranscriptRecord>, CorpusError> {
    let mut records = Vec::new();
    let mut lines = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| CorpusError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TranscriptRecord = serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        records.push(record);
        lines.push(line_no);
    }
    finish(records, lines)
}

fn optional<T: FromStr>(row: &csv::StringRecord, col: Option<usize>, name: &str, line: usize) -> Result<Option<T>, CorpusError> {
    let Some(col) = col else { return Ok(None) };
    let raw = row.get(col).unwrap_or("").trim();
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse().map(Some).map_err(|_| CorpusError::Malformed {
        line,
        message: format!("column {name}: cannot parse {raw:?}"),
    })
}

/// CSV with a header row naming the same fields as the JSONL schema.
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<TranscriptRecord>, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CorpusError::Malformed {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.trim().eq_ignore_ascii_case(name));
    let (Some(id_col), Some(text_col)) = (col("id"), col("text")) else {
        return Err(CorpusError::Malformed {
            line: 1,
            message: "header must name columns `id` and `text`".into(),
        });
    };
    let (gt_col, dur_col, age_col, sex_col) = (col("ground_truth_ryff"), col("duration_sec"), col("age"), col("sex"));

    let mut records = Vec::new();
    let mut lines = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| CorpusError::Malformed {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let mut record = TranscriptRecord::new(
            row.get(id_col).unwrap_or("").trim(),
            row.get(text_col).unwrap_or(""),
        );
        record.ground_truth_ryff = optional(&row, gt_col, "ground_truth_ryff", line)?;
        record.duration_sec = optional(&row, dur_col, "duration_sec", line)?;
        record.age = optional(&row, age_col, "age", line)?;
        record.sex = optional::<Sex>(&row, sex_col, "sex", line)?;
        records.push(record);
        lines.push(line);
    }
    finish(records, lines)
}

pub fn write_jsonl<W: Write>(records: &[TranscriptRecord], writer: W) -> io::Result<()> {
    let mut w = BufWriter::new(writer);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn write_corpus(path: &Path, records: &[TranscriptRecord]) -> io::Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    write_jsonl(records, File::create(path)?)
}
