//! Seeded synthetic corpora, prediction/truth pairs, and corrupted model
//! outputs for exercising the pipeline without real data or live models.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::assessment::{render_assessment_json, AssessmentResult, DimensionAssessment};
use crate::corpus::{Sex, TranscriptRecord};
use crate::dimension::{DimensionName, DIMENSION_MAX, DIMENSION_MIN, TOTAL_MAX, TOTAL_MIN};
use crate::text::{normalize_token, tokenize};

/// Transcript length bounds, in words.
pub const MIN_WORDS: usize = 9;
pub const MAX_WORDS: usize = 310;

// Independent generator streams, so one consumer never shifts another.
const STREAM_TRUTH: u64 = 1;
const STREAM_NOISE: u64 = 2;
const STREAM_TEXT: u64 = 3;
const STREAM_CORRUPT: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionClass {
    Fenced,
    ThinkBlock,
    TrailingComma,
    ProseWrap,
    NoJson,
}

impl CorruptionClass {
    pub const ALL: [CorruptionClass; 5] = [
        CorruptionClass::Fenced,
        CorruptionClass::ThinkBlock,
        CorruptionClass::TrailingComma,
        CorruptionClass::ProseWrap,
        CorruptionClass::NoJson,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CorruptionClass::Fenced => "fenced",
            CorruptionClass::ThinkBlock => "think_block",
            CorruptionClass::TrailingComma => "trailing_comma",
            CorruptionClass::ProseWrap => "prose_wrap",
            CorruptionClass::NoJson => "no_json",
        }
    }
}

impl fmt::Display for CorruptionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorruptionClass {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CorruptionClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s.trim())
            .ok_or_else(|| SynthError::UnknownClass(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthDistribution {
    #[default]
    Uniform,
    /// Larger of two uniform draws: piles mass near the top of the range,
    /// giving a left-skewed histogram.
    Skewed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_records: usize,
    pub truth_range: (i64, i64),
    pub noise_sigma: f64,
    pub seed: u64,
    /// Probability of each corruption class; the remainder stays clean.
    #[serde(default)]
    pub malformation_mix: BTreeMap<CorruptionClass, f64>,
    #[serde(default)]
    pub truth_distribution: TruthDistribution,
    /// Probability that a mock keyword is absent from its transcript.
    #[serde(default)]
    pub alien_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_records: 111,
            truth_range: (51, 123),
            noise_sigma: 8.0,
            seed: 42,
            malformation_mix: BTreeMap::new(),
            truth_distribution: TruthDistribution::Uniform,
            alien_fraction: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synth config: {0}")]
    InvalidConfig(String),
    #[error("vocabulary is empty")]
    EmptyVocab,
    #[error("vocabulary entry {0:?} is not a single word")]
    BadVocabWord(String),
    #[error("unknown corruption class {0:?}")]
    UnknownClass(String),
    #[error("input to corrupt is not valid JSON")]
    NotJson,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let (lo, hi) = self.truth_range;
        if lo > hi || lo < TOTAL_MIN || hi > TOTAL_MAX {
            return Err(SynthError::InvalidConfig(format!(
                "truth_range [{lo}, {hi}] must be ordered and inside [18, 126]"
            )));
        }
        if self.n_records == 0 {
            return Err(SynthError::InvalidConfig("n_records must be positive".into()));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(SynthError::InvalidConfig("noise_sigma must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.alien_fraction) {
            return Err(SynthError::InvalidConfig("alien_fraction must lie in [0, 1]".into()));
        }
        let mut total = 0.0;
        for p in self.malformation_mix.values() {
            if !(0.0..=1.0).contains(p) {
                return Err(SynthError::InvalidConfig("malformation probabilities must lie in [0, 1]".into()));
            }
            total += p;
        }
        if total > 1.0 + 1e-12 {
            return Err(SynthError::InvalidConfig("malformation probabilities sum above 1".into()));
        }
        Ok(())
    }
}

fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `(truth, pred)` totals. Truth is drawn from `truth_range`; predictions
/// add rounded Gaussian noise and are clamped to `[18, 126]`.
pub fn generate_pairs(cfg: &SynthConfig) -> Result<(Vec<i64>, Vec<i64>), SynthError> {
    cfg.validate()?;
    let (lo, hi) = cfg.truth_range;
    let mut truth_rng = stream(cfg.seed, STREAM_TRUTH);
    let mut noise_rng = stream(cfg.seed, STREAM_NOISE);
    let normal = Normal::new(0.0, cfg.noise_sigma)
        .map_err(|_| SynthError::InvalidConfig("noise_sigma".into()))?;

    let mut truth = Vec::with_capacity(cfg.n_records);
    let mut pred = Vec::with_capacity(cfg.n_records);
    for _ in 0..cfg.n_records {
        let t = match cfg.truth_distribution {
            TruthDistribution::Uniform => truth_rng.random_range(lo..=hi),
            TruthDistribution::Skewed => {
                let a = truth_rng.random_range(lo..=hi);
                let b = truth_rng.random_range(lo..=hi);
                a.max(b)
            }
        };
        let noise: f64 = if cfg.noise_sigma == 0.0 {
            0.0
        } else {
            normal.sample(&mut noise_rng)
        };
        let p = libm::round(t as f64 + noise) as i64;
        truth.push(t);
        pred.push(p.clamp(TOTAL_MIN, TOTAL_MAX));
    }
    Ok((truth, pred))
}

/// A synthetic participant together with the mock model output that
/// "assesses" them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRecord {
    pub record: TranscriptRecord,
    /// The assessment the mock output encodes.
    pub assessment: AssessmentResult,
    /// Raw output text, possibly corrupted.
    pub mock_output: String,
    pub corruption: Option<CorruptionClass>,
    /// Keywords planted from outside the transcript.
    pub alien_keywords: Vec<String>,
}

/// Generic everyday words, including the kind of cues models cite.
pub const DEFAULT_VOCAB: &[&str] = &[
    "family", "routine", "manage", "learning", "social", "control", "positive", "walk", "garden",
    "cook", "cooking", "read", "reading", "work", "home", "online", "friends", "phone", "call",
    "zoom", "lockdown", "morning", "evening", "afternoon", "breakfast", "lunch", "dinner", "coffee",
    "tea", "dog", "cat", "children", "grandchildren", "husband", "wife", "partner", "daughter",
    "son", "mother", "father", "neighbours", "shopping", "exercise", "yoga", "run", "bike",
    "television", "news", "radio", "music", "piano", "guitar", "painting", "knitting", "baking",
    "bread", "cake", "cleaning", "tidy", "house", "flat", "window", "sunshine", "rain", "weather",
    "park", "beach", "hills", "village", "town", "city", "bus", "car", "job", "office", "laptop",
    "emails", "meetings", "course", "study", "university", "school", "lessons", "teaching",
    "volunteer", "church", "community", "support", "help", "busy", "quiet", "lonely", "tired",
    "happy", "grateful", "anxious", "worried", "calm", "relaxed", "bored", "hopeful", "busy",
    "plan", "plans", "goals", "future", "day", "days", "week", "weekend", "time", "hours", "sleep",
    "bed", "early", "late", "usually", "sometimes", "often", "always", "never", "really", "quite",
    "just", "try", "trying", "keep", "keeping", "going", "doing", "making", "enjoy", "miss",
    "missing", "love", "like", "feel", "feeling", "think", "know", "life", "world", "people",
    "together", "alone", "outside", "inside", "little", "lot", "well", "good", "bad", "better",
    "hard", "easy", "new", "old", "things", "and", "the", "a", "i", "my", "we", "our", "to", "of",
    "in", "on", "with", "for", "it", "is", "was", "so", "but", "then", "after", "before",
];

/// Words that never occur in [`DEFAULT_VOCAB`].
const ALIEN_WORDS: &[&str] = &[
    "flourish", "resilience", "eudaimonia", "selfhood", "actualisation", "autonomous", "mastery",
    "purposeful", "wellbeing", "introspection", "fulfilment", "agency", "empowerment",
    "mindfulness", "belonging", "serenity",
];

fn validate_vocab(vocab: &[&str]) -> Result<Vec<String>, SynthError> {
    if vocab.is_empty() {
        return Err(SynthError::EmptyVocab);
    }
    vocab
        .iter()
        .map(|w| {
            if w.split_whitespace().count() == 1 && normalize_token(w).is_some() {
                Ok(w.trim().to_string())
            } else {
                Err(SynthError::BadVocabWord(w.to_string()))
            }
        })
        .collect()
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn make_transcript(rng: &mut ChaCha8Rng, vocab: &[String], n_words: usize) -> String {
    let mut out = String::new();
    let mut in_sentence = 0usize;
    let mut sentence_len = rng.random_range(5..=15);
    for i in 0..n_words {
        let w = vocab.choose(rng).expect("non-empty vocab");
        if !out.is_empty() {
            out.push(' ');
        }
        if in_sentence == 0 {
            out.push_str(&capitalize(w));
        } else {
            out.push_str(w);
        }
        in_sentence += 1;
        let last = i + 1 == n_words;
        if in_sentence == sentence_len || last {
            out.push('.');
            in_sentence = 0;
            sentence_len = rng.random_range(5..=15);
        } else if rng.random_bool(0.08) {
            out.push(',');
        }
    }
    out
}

/// Splits `total` into six dimension scores within `[3, 21]`.
fn split_total(rng: &mut ChaCha8Rng, total: i64) -> [i64; 6] {
    let mut scores = [DIMENSION_MIN; 6];
    let mut remaining = total.clamp(TOTAL_MIN, TOTAL_MAX) - TOTAL_MIN;
    while remaining > 0 {
        let open: Vec<usize> = (0..6).filter(|&i| scores[i] < DIMENSION_MAX).collect();
        let i = *open.choose(rng).expect("room left while remaining > 0");
        scores[i] += 1;
        remaining -= 1;
    }
    scores
}

fn pick_corruption(rng: &mut ChaCha8Rng, mix: &BTreeMap<CorruptionClass, f64>) -> Option<CorruptionClass> {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (&class, &p) in mix {
        acc += p;
        if u < acc {
            return Some(class);
        }
    }
    None
}

/// Builds `cfg.n_records` transcripts of 9 to 310 words with reference
/// scores from [`generate_pairs`], and mock outputs whose totals are the
/// paired predictions. Mock keywords are copied from the transcript unless
/// planted as alien words (probability `cfg.alien_fraction`).
pub fn generate_corpus(cfg: &SynthConfig, vocab: &[&str]) -> Result<Vec<SyntheticRecord>, SynthError> {
    let vocab = validate_vocab(vocab)?;
    let (truth, pred) = generate_pairs(cfg)?;
    let mut rng = stream(cfg.seed, STREAM_TEXT);
    let mut corrupt_rng = stream(cfg.seed, STREAM_CORRUPT);
    let width = cfg.n_records.to_string().len().max(3);

    let mut out = Vec::with_capacity(cfg.n_records);
    for (i, (&t, &p)) in truth.iter().zip(&pred).enumerate() {
        let id = format!("s{:0width$}", i + 1, width = width);
        let n_words = rng.random_range(MIN_WORDS..=MAX_WORDS);
        let text = make_transcript(&mut rng, &vocab, n_words);
        let words_per_sec: f64 = rng.random_range(0.8..3.2);
        let duration = libm::round(n_words as f64 / words_per_sec * 10.0) / 10.0;
        let record = TranscriptRecord {
            id: id.clone(),
            text: text.clone(),
            ground_truth_ryff: Some(t),
            duration_sec: Some(duration),
            age: Some(rng.random_range(21..=86)),
            sex: Some(*[Sex::Female, Sex::Male, Sex::Other].choose(&mut rng).expect("non-empty")),
        };

        let tokens = tokenize(&text);
        let token_set: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
        let aliens: Vec<&str> = ALIEN_WORDS.iter().copied().filter(|w| !token_set.contains(w)).collect();
        let raw_words: Vec<&str> = text.split_whitespace().collect();

        let scores = split_total(&mut rng, p);
        let mut alien_keywords = Vec::new();
        let mut dims = Vec::with_capacity(6);
        for (dim, score) in DimensionName::ALL.iter().zip(scores) {
            let n_kw = rng.random_range(1..=3);
            let mut keywords = Vec::with_capacity(n_kw);
            for _ in 0..n_kw {
                if rng.random_bool(cfg.alien_fraction) {
                    let word = match aliens.choose(&mut rng) {
                        Some(w) => w.to_string(),
                        None => format!("xq{}zv", rng.random_range(0..1_000_000u32)),
                    };
                    alien_keywords.push(word.clone());
                    keywords.push(word);
                } else if tokens.len() >= 2 && rng.random_bool(0.2) {
                    let start = rng.random_range(0..tokens.len() - 1);
                    keywords.push(tokens[start..start + 2].join(" "));
                } else {
                    keywords.push(tokens.choose(&mut rng).expect("at least 9 words").clone());
                }
            }
            let span = rng.random_range(4..=10).min(raw_words.len());
            let start = rng.random_range(0..=raw_words.len() - span);
            dims.push(DimensionAssessment {
                dimension: *dim,
                score,
                keywords,
                evidence: alloc::vec![raw_words[start..start + span].join(" ")],
            });
        }
        let assessment = AssessmentResult::from_dimensions(id, dims, BTreeSet::new())
            .expect("six dimensions");
        let clean = render_assessment_json(&assessment);
        let corruption = pick_corruption(&mut corrupt_rng, &cfg.malformation_mix);
        let corrupt_seed: u64 = corrupt_rng.random();
        let mock_output = match corruption {
            Some(class) => corrupt_output(&clean, class, corrupt_seed)?,
            None => clean,
        };
        out.push(SyntheticRecord {
            record,
            assessment,
            mock_output,
            corruption,
            alien_keywords,
        });
    }
    Ok(out)
}

const PROSE_BEFORE: &[&str] = &[
    "Here is my assessment of the transcript.",
    "Based on the transcript, the scores are as follows:",
    "Sure. After reading the participant's description, my evaluation is:",
    "Assessment:",
];
const PROSE_AFTER: &[&str] = &[
    "Let me know if you need anything else.",
    "These scores reflect the limited information in a short monologue.",
    "Note: the evidence quotes are taken directly from the transcript.",
    "",
];
const THOUGHTS: &[&str] = &[
    "The speaker describes a structured day with several activities.",
    "They mention family members, so positive relations might be moderate to high.",
    "A first draft would be {\"autonomy\": {\"score\": 10}} but let me reconsider.",
    "There is little direct evidence about purpose, so I will stay near the middle.",
    "Wait, the total must be the sum of the six scores.",
];

/// Serializes `value` compactly, adding a trailing comma before the closing
/// bracket of the root and of randomly chosen nested containers.
fn write_with_trailing_commas(value: &Value, rng: &mut ChaCha8Rng, root: bool, out: &mut String) {
    match value {
        Value::Object(map) if !map.is_empty() => {
            out.push('{');
            for (i, (k, v)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_with_trailing_commas(v, rng, false, out);
            }
            if root || rng.random_bool(0.3) {
                out.push(',');
            }
            out.push('}');
        }
        Value::Array(items) if !items.is_empty() => {
            out.push('[');
            for (i, v) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_with_trailing_commas(v, rng, false, out);
            }
            if rng.random_bool(0.3) {
                out.push(',');
            }
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// Applies one malformation class to a clean JSON reply.
pub fn corrupt_output(clean_json: &str, class: CorruptionClass, seed: u64) -> Result<String, SynthError> {
    let value: Value = serde_json::from_str(clean_json).map_err(|_| SynthError::NotJson)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng, options: &[&'static str]| *options.choose(rng).expect("non-empty");
    Ok(match class {
        CorruptionClass::Fenced => {
            let tag = pick(&mut rng, &["json", "JSON", ""]);
            format!("```{tag}\n{clean_json}\n```")
        }
        CorruptionClass::ThinkBlock => {
            let n = rng.random_range(1..=THOUGHTS.len());
            let thoughts: Vec<&str> = (0..n).map(|_| pick(&mut rng, THOUGHTS)).collect();
            format!("<think>\n{}\n</think>\n\n{clean_json}", thoughts.join("\n"))
        }
        CorruptionClass::TrailingComma => {
            let mut out = String::with_capacity(clean_json.len() + 16);
            write_with_trailing_commas(&value, &mut rng, true, &mut out);
            out
        }
        CorruptionClass::ProseWrap => {
            let before = pick(&mut rng, PROSE_BEFORE);
            let after = pick(&mut rng, PROSE_AFTER);
            format!("{before}\n\n{clean_json}\n\n{after}")
        }
        CorruptionClass::NoJson => clean_json.chars().filter(|c| *c != '{' && *c != '}').collect(),
    })
}
