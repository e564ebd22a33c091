use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::assessment::GroundedAssessment;
use crate::text::normalize_phrase;

/// Grounded keyword counts across records and dimensions, by normalized
/// form, sorted by count descending then term ascending.
pub fn keyword_frequencies(grounded: &[GroundedAssessment]) -> Vec<(String, u64)> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for g in grounded {
        for keywords in g.grounded_keywords.values() {
            for kw in keywords {
                let term = normalize_phrase(kw);
                if !term.is_empty() {
                    *counts.entry(term).or_default() += 1;
                }
            }
        }
    }
    let mut out: Vec<(String, u64)> = counts.into_iter().collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}
