//! Turning raw model output into a validated, grounded six-dimension
//! assessment.

mod extract;
mod ground;
mod render;
mod validate;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dimension::DimensionName;

pub use extract::{extract_json, ExtractError, ExtractedJson};
pub use ground::{ground_keywords, ground_keywords_with, verify_evidence, DEFAULT_MIN_OVERLAP};
pub use render::render_assessment_json;
pub use validate::{assess_raw, validate_assessment, AssessError, ValidationError, ValidationMode};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionAssessment {
    pub dimension: DimensionName,
    pub score: i64,
    #[serde(default)]
    pub keywords: Vec<String>,
    #[serde(default)]
    pub evidence: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationFlag {
    OutOfRangeClamped,
    RepairedJson,
    MissingDimensionDefaulted,
}

impl ValidationFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            ValidationFlag::OutOfRangeClamped => "out_of_range_clamped",
            ValidationFlag::RepairedJson => "repaired_json",
            ValidationFlag::MissingDimensionDefaulted => "missing_dimension_defaulted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessmentResult {
    pub record_id: String,
    /// One entry per dimension, in [`DimensionName::ALL`] order.
    pub dimensions: Vec<DimensionAssessment>,
    pub total: i64,
    #[serde(default)]
    pub validation_flags: BTreeSet<ValidationFlag>,
}

impl AssessmentResult {
    /// Builds a result from six per-dimension entries (any order), sorting
    /// them and recomputing the total. Returns `None` unless every
    /// dimension appears exactly once.
    pub fn from_dimensions(
        record_id: impl Into<String>,
        mut dimensions: Vec<DimensionAssessment>,
        validation_flags: BTreeSet<ValidationFlag>,
    ) -> Option<Self> {
        dimensions.sort_by_key(|d| d.dimension);
        let complete = dimensions.len() == 6
            && dimensions
                .iter()
                .zip(DimensionName::ALL)
                .all(|(d, want)| d.dimension == want);
        if !complete {
            return None;
        }
        let total = dimensions.iter().map(|d| d.score).sum();
        Some(Self {
            record_id: record_id.into(),
            dimensions,
            total,
            validation_flags,
        })
    }

    pub fn dimension(&self, name: DimensionName) -> &DimensionAssessment {
        &self.dimensions[name.index()]
    }

    pub fn scores(&self) -> [i64; 6] {
        let mut out = [0; 6];
        for (slot, d) in out.iter_mut().zip(&self.dimensions) {
            *slot = d.score;
        }
        out
    }
}

/// An assessment whose keywords have been checked against the transcript.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundedAssessment {
    pub base: AssessmentResult,
    pub grounded_keywords: BTreeMap<DimensionName, Vec<String>>,
    pub dropped_keywords: BTreeMap<DimensionName, Vec<String>>,
    pub evidence_verified: BTreeMap<DimensionName, Vec<bool>>,
}

impl GroundedAssessment {
    pub fn grounded_count(&self) -> usize {
        self.grounded_keywords.values().map(Vec::len).sum()
    }

    pub fn dropped_count(&self) -> usize {
        self.dropped_keywords.values().map(Vec::len).sum()
    }
}
