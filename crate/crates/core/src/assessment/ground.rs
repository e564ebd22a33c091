//! Post-filtering of model-cited keywords and evidence against the source
//! transcript.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::{AssessmentResult, GroundedAssessment};
use crate::dimension::DimensionName;
use crate::text::{contains_run, longest_common_run, tokenize};

/// Fraction of an excerpt that must appear as one contiguous run.
pub const DEFAULT_MIN_OVERLAP: f64 = 0.8;

/// Keeps a keyword iff its token sequence occurs contiguously in the
/// transcript. Dropped keywords are kept in a separate list.
pub fn ground_keywords(result: &AssessmentResult, transcript: &str) -> GroundedAssessment {
    ground_keywords_with(result, transcript, DEFAULT_MIN_OVERLAP)
}

pub fn ground_keywords_with(
    result: &AssessmentResult,
    transcript: &str,
    min_overlap: f64,
) -> GroundedAssessment {
    let tokens = tokenize(transcript);
    let mut grounded = BTreeMap::new();
    let mut dropped = BTreeMap::new();
    for dim in &result.dimensions {
        let (keep, drop): (Vec<String>, Vec<String>) = dim
            .keywords
            .iter()
            .cloned()
            .partition(|kw| contains_run(&tokens, &tokenize(kw)));
        grounded.insert(dim.dimension, keep);
        dropped.insert(dim.dimension, drop);
    }
    GroundedAssessment {
        base: result.clone(),
        grounded_keywords: grounded,
        dropped_keywords: dropped,
        evidence_verified: verify_with_tokens(result, &tokens, min_overlap),
    }
}

/// Marks each evidence excerpt verified when its tokens appear contiguously
/// in the transcript, or when the longest shared contiguous run covers at
/// least `min_overlap` of the excerpt. `min_overlap` is clamped to `[0, 1]`.
pub fn verify_evidence(
    result: &AssessmentResult,
    transcript: &str,
    min_overlap: f64,
) -> BTreeMap<DimensionName, Vec<bool>> {
    verify_with_tokens(result, &tokenize(transcript), min_overlap)
}

fn verify_with_tokens(
    result: &AssessmentResult,
    transcript: &[String],
    min_overlap: f64,
) -> BTreeMap<DimensionName, Vec<bool>> {
    let min_overlap = if min_overlap.is_nan() { DEFAULT_MIN_OVERLAP } else { min_overlap.clamp(0.0, 1.0) };
    result
        .dimensions
        .iter()
        .map(|dim| {
            let checks = dim
                .evidence
                .iter()
                .map(|excerpt| {
                    let ex = tokenize(excerpt);
                    if ex.is_empty() {
                        return false;
                    }
                    if contains_run(transcript, &ex) {
                        return true;
                    }
                    let run = longest_common_run(&ex, transcript);
                    run > 0 && run as f64 >= min_overlap * ex.len() as f64
                })
                .collect();
            (dim.dimension, checks)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assessment::DimensionAssessment;
    use alloc::collections::BTreeSet;
    use alloc::string::ToString;
    use alloc::vec;

    fn with(keywords: &[&str], evidence: &[&str]) -> AssessmentResult {
        let dims = DimensionName::ALL
            .iter()
            .map(|&d| DimensionAssessment {
                dimension: d,
                score: 10,
                keywords: if d == DimensionName::PositiveRelations {
                    keywords.iter().map(|s| s.to_string()).collect()
                } else {
                    Vec::new()
                },
                evidence: if d == DimensionName::Autonomy {
                    evidence.iter().map(|s| s.to_string()).collect()
                } else {
                    Vec::new()
                },
            })
            .collect();
        AssessmentResult::from_dimensions("p1", dims, BTreeSet::new()).unwrap()
    }

    #[test]
    fn drops_hallucinated_keywords() {
        let g = ground_keywords(&with(&["family", "flourish"], &[]), "I miss my family.");
        let d = DimensionName::PositiveRelations;
        assert_eq!(g.grounded_keywords[&d], vec!["family"]);
        assert_eq!(g.dropped_keywords[&d], vec!["flourish"]);
    }

    #[test]
    fn multiword_contiguous() {
        let g = ground_keywords(
            &with(&["daily routine", "routine daily", "Daily, Routine!"], &[]),
            "... and my daily routine helps a lot",
        );
        let d = DimensionName::PositiveRelations;
        assert_eq!(g.grounded_keywords[&d], vec!["daily routine", "Daily, Routine!"]);
        assert_eq!(g.dropped_keywords[&d], vec!["routine daily"]);
    }

    #[test]
    fn empty_lists() {
        let g = ground_keywords(&with(&[], &[]), "anything");
        assert!(g.grounded_keywords.values().all(Vec::is_empty));
        assert!(g.dropped_keywords.values().all(Vec::is_empty));
        assert_eq!(g.evidence_verified[&DimensionName::Autonomy], Vec::<bool>::new());
    }

    #[test]
    fn evidence_rules() {
        let transcript = "w1 w2 w3 w4 w5 w6 w7 w8 x9 x10 tail words here";
        let r = with(
            &[],
            &[
                "w3 w4 w5",
                "nothing shared at all",
                // 10 tokens, first 8 contiguous in transcript
                "w1 w2 w3 w4 w5 w6 w7 w8 zz yy",
                // 10 tokens, best run 7
                "w1 w2 w3 w4 w5 w6 w7 qq zz yy",
                "",
            ],
        );
        let v = verify_evidence(&r, transcript, 0.8);
        assert_eq!(v[&DimensionName::Autonomy], vec![true, false, true, false, false]);
        let v = verify_evidence(&r, transcript, 0.7);
        assert_eq!(v[&DimensionName::Autonomy], vec![true, false, true, true, false]);
    }
}
