//! Word error rate with a substitution / deletion / insertion breakdown.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::text::tokenize;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentCounts {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub hits: usize,
    pub n_ref: usize,
}

impl AlignmentCounts {
    pub fn edits(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }

    fn add(&mut self, other: &AlignmentCounts) {
        self.substitutions += other.substitutions;
        self.deletions += other.deletions;
        self.insertions += other.insertions;
        self.hits += other.hits;
        self.n_ref += other.n_ref;
    }
}

/// Rates in percent of reference words.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WerReport {
    pub wer_pct: f64,
    pub sub_pct: f64,
    pub del_pct: f64,
    pub ins_pct: f64,
    pub counts: AlignmentCounts,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WerError {
    #[error("reference is empty")]
    EmptyReference,
    #[error("no transcript pairs given")]
    NoPairs,
}

/// Lowercases, strips edge punctuation, splits on whitespace.
pub fn normalize_for_wer(text: &str) -> Vec<String> {
    tokenize(text)
}

#[derive(Clone, Copy)]
enum Step {
    Hit,
    Sub,
    Del,
    Ins,
}

/// Minimum edit alignment with unit costs. Among equal-cost paths the
/// backtrace prefers hit, then substitution, deletion, insertion, so the
/// breakdown is deterministic.
pub fn align<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> Result<AlignmentCounts, WerError> {
    if reference.is_empty() {
        return Err(WerError::EmptyReference);
    }
    let n = reference.len();
    let m = hypothesis.len();
    let cols = m + 1;
    let mut cost = alloc::vec![0usize; (n + 1) * cols];
    for i in 0..=n {
        cost[i * cols] = i;
    }
    for (j, c) in cost.iter_mut().take(cols).enumerate() {
        *c = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let diag = cost[(i - 1) * cols + j - 1] + usize::from(reference[i - 1] != hypothesis[j - 1]);
            let up = cost[(i - 1) * cols + j] + 1;
            let left = cost[i * cols + j - 1] + 1;
            cost[i * cols + j] = diag.min(up).min(left);
        }
    }

    let mut counts = AlignmentCounts {
        n_ref: n,
        ..AlignmentCounts::default()
    };
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = cost[i * cols + j];
        let step = if i > 0 && j > 0 && reference[i - 1] == hypothesis[j - 1] && cost[(i - 1) * cols + j - 1] == here {
            Step::Hit
        } else if i > 0 && j > 0 && cost[(i - 1) * cols + j - 1] + 1 == here {
            Step::Sub
        } else if i > 0 && cost[(i - 1) * cols + j] + 1 == here {
            Step::Del
        } else {
            Step::Ins
        };
        match step {
            Step::Hit => {
                counts.hits += 1;
                i -= 1;
                j -= 1;
            }
            Step::Sub => {
                counts.substitutions += 1;
                i -= 1;
                j -= 1;
            }
            Step::Del => {
                counts.deletions += 1;
                i -= 1;
            }
            Step::Ins => {
                counts.insertions += 1;
                j -= 1;
            }
        }
    }
    Ok(counts)
}

pub fn wer(counts: &AlignmentCounts) -> WerReport {
    let denom = counts.n_ref.max(1) as f64;
    let sub_pct = 100.0 * counts.substitutions as f64 / denom;
    let del_pct = 100.0 * counts.deletions as f64 / denom;
    let ins_pct = 100.0 * counts.insertions as f64 / denom;
    WerReport {
        wer_pct: 100.0 * counts.edits() as f64 / denom,
        sub_pct,
        del_pct,
        ins_pct,
        counts: *counts,
    }
}

/// Normalizes and aligns one reference/hypothesis pair.
pub fn text_wer(reference: &str, hypothesis: &str) -> Result<WerReport, WerError> {
    Ok(wer(&align(&normalize_for_wer(reference), &normalize_for_wer(hypothesis))?))
}

/// Micro-averaged WER: counts are summed over pairs before dividing.
pub fn corpus_wer<R: AsRef<str>, H: AsRef<str>>(pairs: &[(R, H)]) -> Result<WerReport, WerError> {
    if pairs.is_empty() {
        return Err(WerError::NoPairs);
    }
    let mut total = AlignmentCounts::default();
    for (r, h) in pairs {
        let counts = align(&normalize_for_wer(r.as_ref()), &normalize_for_wer(h.as_ref()))?;
        total.add(&counts);
    }
    Ok(wer(&total))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical() {
        let c = align(&["a", "b", "c"], &["a", "b", "c"]).unwrap();
        assert_eq!((c.substitutions, c.deletions, c.insertions, c.hits), (0, 0, 0, 3));
        assert_eq!(wer(&c).wer_pct, 0.0);
    }

    #[test]
    fn sub_and_del() {
        let c = align(&["the", "cat", "sat", "down"], &["the", "cat", "sit"]).unwrap();
        assert_eq!((c.substitutions, c.deletions, c.insertions), (1, 1, 0));
        let r = wer(&c);
        assert_eq!((r.wer_pct, r.sub_pct, r.del_pct, r.ins_pct), (50.0, 25.0, 25.0, 0.0));
    }

    #[test]
    fn insertions_only() {
        let c = align(&["a"], &["a", "b", "c"]).unwrap();
        assert_eq!((c.substitutions, c.deletions, c.insertions, c.hits), (0, 0, 2, 1));
        assert_eq!(align::<&str>(&[], &["a"]), Err(WerError::EmptyReference));
    }

    #[test]
    fn empty_hypothesis_is_all_deletions() {
        let r = text_wer("one two three", "").unwrap();
        assert_eq!(r.wer_pct, 100.0);
        assert_eq!(r.counts.deletions, 3);
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_for_wer("The cat, sat."), ["the", "cat", "sat"]);
        assert_eq!(normalize_for_wer("don't stop"), ["don't", "stop"]);
        assert!(normalize_for_wer("").is_empty());
        assert_eq!(text_wer("The cat sat.", "the CAT, sat").unwrap().wer_pct, 0.0);
    }

    #[test]
    fn corpus_micro_average() {
        let pairs = [("a b c d", "a b c d"), ("a b c d", "")];
        assert_eq!(corpus_wer(&pairs).unwrap().wer_pct, 50.0);
        let swapped = [pairs[1], pairs[0]];
        assert_eq!(corpus_wer(&pairs).unwrap(), corpus_wer(&swapped).unwrap());
        let one = [("the cat sat down", "the cat sit")];
        assert_eq!(corpus_wer(&one).unwrap(), text_wer(one[0].0, one[0].1).unwrap());
        assert_eq!(corpus_wer::<&str, &str>(&[]), Err(WerError::NoPairs));
    }
}
