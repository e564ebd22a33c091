//! Deterministic stand-in for a model reply, used by the mock backend and
//! by parser tests.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assessment::{render_assessment_json, AssessmentResult, DimensionAssessment};
use crate::dimension::{DimensionName, DIMENSION_MAX, DIMENSION_MIN};
use crate::hash::seed_from;
use crate::synth::{corrupt_output, CorruptionClass};
use crate::text::tokenize;

/// Optional wrapping applied to an otherwise clean mock reply.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MockNoise {
    #[default]
    Clean,
    Fenced,
    ThinkBlock,
    ProseWrap,
}

/// Well-formed assessment JSON whose scores depend only on the prompt and
/// `seed`. Keywords and evidence are lifted from the prompt text.
pub fn mock_reply(prompt: &str, seed: u64, noise: MockNoise) -> String {
    let key = seed_from(&[prompt.as_bytes(), &seed.to_le_bytes()]);
    let mut rng = ChaCha8Rng::from_seed(key);
    let tokens: Vec<String> = tokenize(prompt).into_iter().filter(|t| t.chars().count() >= 4).collect();
    let words: Vec<&str> = prompt.split_whitespace().collect();

    let dims = DimensionName::ALL
        .iter()
        .map(|&dimension| {
            let score = rng.random_range(DIMENSION_MIN..=DIMENSION_MAX);
            let keywords = if tokens.is_empty() {
                Vec::new()
            } else {
                (0..2).map(|_| tokens[rng.random_range(0..tokens.len())].clone()).collect()
            };
            let evidence = if words.len() < 6 {
                Vec::new()
            } else {
                let start = rng.random_range(0..=words.len() - 6);
                alloc::vec![words[start..start + 6].join(" ")]
            };
            DimensionAssessment {
                dimension,
                score,
                keywords,
                evidence,
            }
        })
        .collect();
    let result = AssessmentResult::from_dimensions("mock", dims, BTreeSet::new())
        .expect("all six dimensions");
    let clean = render_assessment_json(&result);
    let class = match noise {
        MockNoise::Clean => return clean,
        MockNoise::Fenced => CorruptionClass::Fenced,
        MockNoise::ThinkBlock => CorruptionClass::ThinkBlock,
        MockNoise::ProseWrap => CorruptionClass::ProseWrap,
    };
    corrupt_output(&clean, class, seed).unwrap_or_else(|_| clean.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assessment::{assess_raw, ValidationMode};

    #[test]
    fn deterministic_and_in_range() {
        let a = mock_reply("prompt one about the family garden", 3, MockNoise::Clean);
        assert_eq!(a, mock_reply("prompt one about the family garden", 3, MockNoise::Clean));
        assert_ne!(a, mock_reply("prompt one about the family garden", 4, MockNoise::Clean));
        for i in 0..200 {
            let p = alloc::format!("prompt {i} with some words to quote from here");
            let r = assess_raw(&mock_reply(&p, i, MockNoise::Clean), "x", ValidationMode::Strict).unwrap();
            assert!(r.scores().iter().all(|s| (3..=21).contains(s)));
            assert!(r.validation_flags.is_empty());
        }
    }

    #[test]
    fn fenced_noise() {
        let out = mock_reply("p q r s t u v w", 1, MockNoise::Fenced);
        assert!(out.starts_with("```"));
        let clean = mock_reply("p q r s t u v w", 1, MockNoise::Clean);
        let a = assess_raw(&out, "x", ValidationMode::Strict).unwrap();
        let b = assess_raw(&clean, "x", ValidationMode::Strict).unwrap();
        assert_eq!(a, b);
    }
}
