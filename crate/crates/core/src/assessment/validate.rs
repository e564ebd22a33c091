use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::extract::{extract_json, ExtractError};
use super::{AssessmentResult, DimensionAssessment, ValidationFlag};
use crate::dimension::{DimensionName, DIMENSION_MAX, DIMENSION_MIN};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationMode {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValidationError {
    #[error("missing_dimension({0})")]
    MissingDimension(DimensionName),
    #[error("bad_score({dimension}, {value})")]
    BadScore { dimension: DimensionName, value: Value },
    #[error("wrong_shape: {0}")]
    WrongShape(String),
}

impl ValidationError {
    /// Short failure class for reports.
    pub fn class(&self) -> &'static str {
        match self {
            ValidationError::MissingDimension(_) => "missing_dimension",
            ValidationError::BadScore { .. } => "bad_score",
            ValidationError::WrongShape(_) => "wrong_shape",
        }
    }
}

/// Either stage of turning raw output into an assessment can fail.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssessError {
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Validate(#[from] ValidationError),
}

impl AssessError {
    pub fn class(&self) -> &'static str {
        match self {
            AssessError::Extract(_) => "no_json",
            AssessError::Validate(v) => v.class(),
        }
    }
}

/// Extracts and validates in one step; a repaired parse adds
/// [`ValidationFlag::RepairedJson`].
pub fn assess_raw(raw: &str, record_id: &str, mode: ValidationMode) -> Result<AssessmentResult, AssessError> {
    let extracted = extract_json(raw)?;
    let mut result = validate_assessment(&extracted.object, record_id, mode)?;
    if extracted.repaired {
        result.validation_flags.insert(ValidationFlag::RepairedJson);
    }
    Ok(result)
}

fn count_dimension_keys(map: &Map<String, Value>) -> usize {
    map.keys().filter(|k| DimensionName::from_loose(k).is_some()).count()
}

/// Finds the map holding the dimension entries: the object itself, or the
/// first nested object (e.g. under `"dimensions"`) that has any.
fn dimension_map(obj: &Map<String, Value>) -> Option<&Map<String, Value>> {
    if count_dimension_keys(obj) > 0 {
        return Some(obj);
    }
    obj.values()
        .filter_map(Value::as_object)
        .find(|m| count_dimension_keys(m) > 0)
}

fn field<'a>(entry: &'a Map<String, Value>, names: &[&str]) -> Option<&'a Value> {
    entry
        .iter()
        .find(|(k, _)| names.iter().any(|n| k.eq_ignore_ascii_case(n)))
        .map(|(_, v)| v)
}

fn string_list(value: Option<&Value>) -> Vec<String> {
    match value {
        Some(Value::String(s)) if !s.trim().is_empty() => alloc::vec![s.clone()],
        Some(Value::Array(items)) => items
            .iter()
            .filter_map(Value::as_str)
            .filter(|s| !s.trim().is_empty())
            .map(ToString::to_string)
            .collect(),
        _ => Vec::new(),
    }
}

enum Score {
    Int(i64),
    Unusable,
}

fn read_score(value: &Value, mode: ValidationMode) -> Score {
    let as_int = |f: f64| {
        if f.is_finite() && libm::trunc(f) == f && f.abs() < 1e15 {
            Score::Int(f as i64)
        } else {
            Score::Unusable
        }
    };
    match value {
        Value::Number(n) => match n.as_i64() {
            Some(i) => Score::Int(i),
            None => n.as_f64().map_or(Score::Unusable, as_int),
        },
        Value::String(s) if mode == ValidationMode::Lenient => {
            s.trim().parse::<f64>().map_or(Score::Unusable, as_int)
        }
        _ => Score::Unusable,
    }
}

/// Maps a parsed object onto the six dimensions. Totals are always
/// recomputed from the dimension scores.
pub fn validate_assessment(
    obj: &Map<String, Value>,
    record_id: &str,
    mode: ValidationMode,
) -> Result<AssessmentResult, ValidationError> {
    let strict = mode == ValidationMode::Strict;
    let map = dimension_map(obj)
        .ok_or_else(|| ValidationError::WrongShape("no dimension keys found".to_string()))?;

    let mut entries: [Option<&Value>; 6] = [None; 6];
    for (key, value) in map {
        if let Some(dim) = DimensionName::from_loose(key) {
            let slot = &mut entries[dim.index()];
            if slot.is_some() {
                if strict {
                    return Err(ValidationError::WrongShape(alloc::format!(
                        "dimension {dim} given more than once"
                    )));
                }
                continue;
            }
            *slot = Some(value);
        }
    }

    let mut flags = BTreeSet::new();
    let mut dimensions = Vec::with_capacity(6);
    for dim in DimensionName::ALL {
        let Some(value) = entries[dim.index()] else {
            if strict {
                return Err(ValidationError::MissingDimension(dim));
            }
            flags.insert(ValidationFlag::MissingDimensionDefaulted);
            dimensions.push(DimensionAssessment {
                dimension: dim,
                score: DIMENSION_MIN,
                keywords: Vec::new(),
                evidence: Vec::new(),
            });
            continue;
        };

        let (score_value, keywords, evidence) = match value {
            Value::Object(entry) => (
                field(entry, &["score", "rating", "value"]),
                string_list(field(entry, &["keywords", "keyword"])),
                string_list(field(entry, &["evidence", "excerpts", "quotes"])),
            ),
            Value::Number(_) | Value::String(_) => (Some(value), Vec::new(), Vec::new()),
            _ => {
                if strict {
                    return Err(ValidationError::WrongShape(alloc::format!(
                        "dimension {dim} is neither an object nor a score"
                    )));
                }
                (None, Vec::new(), Vec::new())
            }
        };

        let score = match score_value.map(|v| (v, read_score(v, mode))) {
            Some((_, Score::Int(s))) if (DIMENSION_MIN..=DIMENSION_MAX).contains(&s) => s,
            Some((v, Score::Int(s))) => {
                if strict {
                    return Err(ValidationError::BadScore {
                        dimension: dim,
                        value: v.clone(),
                    });
                }
                flags.insert(ValidationFlag::OutOfRangeClamped);
                s.clamp(DIMENSION_MIN, DIMENSION_MAX)
            }
            Some((v, Score::Unusable)) => {
                if strict {
                    return Err(ValidationError::BadScore {
                        dimension: dim,
                        value: v.clone(),
                    });
                }
                flags.insert(ValidationFlag::MissingDimensionDefaulted);
                DIMENSION_MIN
            }
            None => {
                if strict {
                    return Err(ValidationError::MissingDimension(dim));
                }
                flags.insert(ValidationFlag::MissingDimensionDefaulted);
                DIMENSION_MIN
            }
        };
        dimensions.push(DimensionAssessment {
            dimension: dim,
            score,
            keywords,
            evidence,
        });
    }

    let total = dimensions.iter().map(|d| d.score).sum();
    Ok(AssessmentResult {
        record_id: record_id.to_string(),
        dimensions,
        total,
        validation_flags: flags,
    })
}

impl fmt::Display for ValidationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValidationMode::Strict => "strict",
            ValidationMode::Lenient => "lenient",
        })
    }
}
