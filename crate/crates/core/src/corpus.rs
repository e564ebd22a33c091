//! Transcript records and dataset-level descriptive statistics.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dimension::{TOTAL_MAX, TOTAL_MIN};
use crate::metrics::{descriptive_stats, DescriptiveStats};
use crate::text::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sex {
    Female,
    Male,
    #[serde(alias = "unspecified", alias = "other/unspecified")]
    Other,
}

impl FromStr for Sex {
    type Err = UnknownSex;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "female" | "f" => Ok(Sex::Female),
            "male" | "m" => Ok(Sex::Male),
            "other" | "unspecified" | "other/unspecified" | "o" | "x" => Ok(Sex::Other),
            _ => Err(UnknownSex),
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sex::Female => "female",
            Sex::Male => "male",
            Sex::Other => "other",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unrecognized sex value")]
pub struct UnknownSex;

/// One participant's transcript with optional reference score and metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth_ryff: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_sec: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub age: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sex: Option<Sex>,
}

impl TranscriptRecord {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            ground_truth_ryff: None,
            duration_sec: None,
            age: None,
            sex: None,
        }
    }

    pub fn validate(&self) -> Result<(), RecordError> {
        if let Some(score) = self.ground_truth_ryff {
            if !(TOTAL_MIN..=TOTAL_MAX).contains(&score) {
                return Err(RecordError::ScoreOutOfRange {
                    id: self.id.clone(),
                    value: score,
                });
            }
        }
        if let Some(d) = self.duration_sec {
            if !(d.is_finite() && d >= 0.0) {
                return Err(RecordError::BadDuration { id: self.id.clone() });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecordError {
    #[error("record {id:?}: ground_truth_ryff {value} outside [18, 126]")]
    ScoreOutOfRange { id: String, value: i64 },
    #[error("record {id:?}: duration_sec must be a non-negative number")]
    BadDuration { id: String },
    #[error("duplicate record id {id:?}")]
    DuplicateId { id: String },
    #[error("record id must not be empty")]
    EmptyId,
}

/// Checks every record and id uniqueness; reports the first problem with
/// its zero-based index.
pub fn validate_records(records: &[TranscriptRecord]) -> Result<(), (usize, RecordError)> {
    let mut seen = BTreeSet::new();
    for (i, r) in records.iter().enumerate() {
        if r.id.is_empty() {
            return Err((i, RecordError::EmptyId));
        }
        r.validate().map_err(|e| (i, e))?;
        if !seen.insert(r.id.as_str()) {
            return Err((i, RecordError::DuplicateId { id: r.id.clone() }));
        }
    }
    Ok(())
}

/// Total and distinct normalized token counts.
pub fn word_counts(text: &str) -> (usize, usize) {
    let tokens = tokenize(text);
    let unique: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
    (tokens.len(), unique.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_records: usize,
    pub duration_sec: Option<DescriptiveStats>,
    pub word_count: Option<DescriptiveStats>,
    pub unique_word_count: Option<DescriptiveStats>,
    pub words_per_sec: Option<DescriptiveStats>,
    pub ground_truth_ryff: Option<DescriptiveStats>,
    pub age: Option<DescriptiveStats>,
}

impl CorpusStats {
    /// `(label, stats)` rows in display order.
    pub fn rows(&self) -> [(&'static str, Option<&DescriptiveStats>); 6] {
        [
            ("duration_sec", self.duration_sec.as_ref()),
            ("age", self.age.as_ref()),
            ("word_count", self.word_count.as_ref()),
            ("unique_word_count", self.unique_word_count.as_ref()),
            ("words_per_sec", self.words_per_sec.as_ref()),
            ("ground_truth_ryff", self.ground_truth_ryff.as_ref()),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("corpus is empty")]
pub struct EmptyCorpus;

fn stats_of(values: &[f64]) -> Option<DescriptiveStats> {
    descriptive_stats(values).ok()
}

/// Per-variable statistics over the values present in each record.
pub fn corpus_stats(records: &[TranscriptRecord]) -> Result<CorpusStats, EmptyCorpus> {
    if records.is_empty() {
        return Err(EmptyCorpus);
    }
    let mut durations = Vec::new();
    let mut words = Vec::new();
    let mut unique = Vec::new();
    let mut rates = Vec::new();
    let mut scores = Vec::new();
    let mut ages = Vec::new();
    for r in records {
        let (total, distinct) = word_counts(&r.text);
        words.push(total as f64);
        unique.push(distinct as f64);
        if let Some(d) = r.duration_sec.filter(|d| d.is_finite()) {
            durations.push(d);
            if d > 0.0 {
                rates.push(total as f64 / d);
            }
        }
        if let Some(s) = r.ground_truth_ryff {
            scores.push(s as f64);
        }
        if let Some(a) = r.age {
            ages.push(a as f64);
        }
    }
    Ok(CorpusStats {
        n_records: records.len(),
        duration_sec: stats_of(&durations),
        word_count: stats_of(&words),
        unique_word_count: stats_of(&unique),
        words_per_sec: stats_of(&rates),
        ground_truth_ryff: stats_of(&scores),
        age: stats_of(&ages),
    })
}

/// Fraction of records whose unique word count is strictly below
/// `threshold`.
pub fn fraction_unique_below(records: &[TranscriptRecord], threshold: usize) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    let below = records
        .iter()
        .filter(|r| word_counts(&r.text).1 < threshold)
        .count();
    below as f64 / records.len() as f64
}

/// Cumulative counts for a word-count curve: for each threshold, how many
/// records have fewer total words and fewer unique words.
pub fn cumulative_word_counts(records: &[TranscriptRecord], thresholds: &[usize]) -> Vec<(usize, usize, usize)> {
    let counts: Vec<(usize, usize)> = records.iter().map(|r| word_counts(&r.text)).collect();
    thresholds
        .iter()
        .map(|&t| {
            let words = counts.iter().filter(|c| c.0 < t).count();
            let uniq = counts.iter().filter(|c| c.1 < t).count();
            (t, words, uniq)
        })
        .collect()
}
