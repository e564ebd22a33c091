//! The six Ryff well-being dimensions and the score bounds they share.

use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

/// Lowest score a single dimension can take.
pub const DIMENSION_MIN: i64 = 3;
/// Highest score a single dimension can take.
pub const DIMENSION_MAX: i64 = 21;
/// Lowest possible total (six dimensions at the floor).
pub const TOTAL_MIN: i64 = 6 * DIMENSION_MIN;
/// Highest possible total (six dimensions at the ceiling).
pub const TOTAL_MAX: i64 = 6 * DIMENSION_MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionName {
    Autonomy,
    EnvironmentalMastery,
    PersonalGrowth,
    PositiveRelations,
    PurposeInLife,
    SelfAcceptance,
}

impl DimensionName {
    pub const ALL: [DimensionName; 6] = [
        DimensionName::Autonomy,
        DimensionName::EnvironmentalMastery,
        DimensionName::PersonalGrowth,
        DimensionName::PositiveRelations,
        DimensionName::PurposeInLife,
        DimensionName::SelfAcceptance,
    ];

    /// Snake-case key used in model JSON and on disk.
    pub fn key(self) -> &'static str {
        match self {
            DimensionName::Autonomy => "autonomy",
            DimensionName::EnvironmentalMastery => "environmental_mastery",
            DimensionName::PersonalGrowth => "personal_growth",
            DimensionName::PositiveRelations => "positive_relations",
            DimensionName::PurposeInLife => "purpose_in_life",
            DimensionName::SelfAcceptance => "self_acceptance",
        }
    }

    /// Human-readable name, as it appears in prompts.
    pub fn label(self) -> &'static str {
        match self {
            DimensionName::Autonomy => "Autonomy",
            DimensionName::EnvironmentalMastery => "Environmental Mastery",
            DimensionName::PersonalGrowth => "Personal Growth",
            DimensionName::PositiveRelations => "Positive Relations with Others",
            DimensionName::PurposeInLife => "Purpose in Life",
            DimensionName::SelfAcceptance => "Self-Acceptance",
        }
    }

    /// CamelCase identifier, used in diagnostics.
    pub fn ident(self) -> &'static str {
        match self {
            DimensionName::Autonomy => "Autonomy",
            DimensionName::EnvironmentalMastery => "EnvironmentalMastery",
            DimensionName::PersonalGrowth => "PersonalGrowth",
            DimensionName::PositiveRelations => "PositiveRelations",
            DimensionName::PurposeInLife => "PurposeInLife",
            DimensionName::SelfAcceptance => "SelfAcceptance",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Maps a loosely written dimension name onto the closed set. Case,
    /// spacing, underscores, and hyphens are ignored, and a few common
    /// long/short forms are accepted.
    pub fn from_loose(name: &str) -> Option<DimensionName> {
        let mut squashed = [0u8; 48];
        let mut len = 0;
        for c in name.chars().filter(|c| c.is_ascii_alphanumeric()) {
            if len == squashed.len() {
                return None;
            }
            squashed[len] = c.to_ascii_lowercase() as u8;
            len += 1;
        }
        let key = core::str::from_utf8(&squashed[..len]).ok()?;
        let dim = match key {
            "autonomy" => DimensionName::Autonomy,
            "environmentalmastery" | "mastery" => DimensionName::EnvironmentalMastery,
            "personalgrowth" | "growth" => DimensionName::PersonalGrowth,
            "positiverelations"
            | "positiverelationswithothers"
            | "positiverelationships"
            | "relationswithothers" => DimensionName::PositiveRelations,
            "purposeinlife" | "purpose" => DimensionName::PurposeInLife,
            "selfacceptance" => DimensionName::SelfAcceptance,
            _ => return None,
        };
        Some(dim)
    }
}

impl fmt::Display for DimensionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.ident())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown dimension name")]
pub struct UnknownDimension;

impl FromStr for DimensionName {
    type Err = UnknownDimension;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DimensionName::from_loose(s).ok_or(UnknownDimension)
    }
}
