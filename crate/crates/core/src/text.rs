//! Token normalization shared by word counting, keyword grounding, and WER
//! scoring.
//!
//! A token is a whitespace-separated run, lowercased, with non-alphanumeric
//! characters stripped from both edges. Interior punctuation survives, so
//! `"don't"` stays one token. Tokens that strip down to nothing are dropped.

use alloc::string::String;
use alloc::vec::Vec;

/// Normalizes a single whitespace-delimited chunk, returning `None` when
/// nothing alphanumeric is left.
pub fn normalize_token(raw: &str) -> Option<String> {
    let trimmed = raw.trim_matches(|c: char| !c.is_alphanumeric());
    if trimmed.is_empty() {
        return None;
    }
    let mut out = String::with_capacity(trimmed.len());
    for c in trimmed.chars() {
        out.extend(c.to_lowercase());
    }
    Some(out)
}

/// Splits `text` into normalized tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().filter_map(normalize_token).collect()
}

/// Joins the normalized tokens of `text` with single spaces. Used as the
/// canonical form of keywords.
pub fn normalize_phrase(text: &str) -> String {
    let tokens = tokenize(text);
    tokens.join(" ")
}

/// Returns true when `needle` occurs as a contiguous run inside `haystack`.
/// An empty needle never matches.
pub fn contains_run<T: PartialEq>(haystack: &[T], needle: &[T]) -> bool {
    if needle.is_empty() || needle.len() > haystack.len() {
        return false;
    }
    haystack.windows(needle.len()).any(|w| w == needle)
}

/// Length of the longest contiguous run shared by `a` and `b`.
pub fn longest_common_run<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    // Rolling row of the classic longest-common-substring table.
    let mut prev = alloc::vec![0usize; b.len() + 1];
    let mut cur = alloc::vec![0usize; b.len() + 1];
    let mut best = 0;
    for ai in a {
        for (j, bj) in b.iter().enumerate() {
            cur[j + 1] = if ai == bj { prev[j] + 1 } else { 0 };
            best = best.max(cur[j + 1]);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn strips_edges_keeps_interior() {
        assert_eq!(tokenize("The cat, sat."), vec!["the", "cat", "sat"]);
        assert_eq!(tokenize("don't stop"), vec!["don't", "stop"]);
        assert_eq!(tokenize("  -- ... "), Vec::<String>::new());
        assert_eq!(tokenize("\"Hello!\"  (World)"), vec!["hello", "world"]);
    }

    #[test]
    fn unicode_lowercase() {
        assert_eq!(tokenize("ÉCOLE Straße"), vec!["école", "straße"]);
    }

    #[test]
    fn runs() {
        let hay = [1, 2, 3, 4, 5];
        assert!(contains_run(&hay, &[2, 3, 4]));
        assert!(!contains_run(&hay, &[2, 4]));
        assert!(!contains_run(&hay, &[] as &[i32]));
        assert_eq!(longest_common_run(&hay, &[9, 3, 4, 5, 9]), 3);
        assert_eq!(longest_common_run(&hay, &[7, 8]), 0);
    }
}
