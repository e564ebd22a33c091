use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::StatsError;

/// Fixed-width bins over `[range_lo, range_hi]`. Bins are half-open except
/// the last, which is closed at `range_hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBins {
    pub bin_width: f64,
    pub range_lo: f64,
    pub range_hi: f64,
    pub counts: Vec<u64>,
    pub below: u64,
    pub above: u64,
    pub non_finite: u64,
}

impl HistogramBins {
    /// `(lower, upper)` edges of bin `k`; the last upper edge is `range_hi`.
    pub fn edges(&self, k: usize) -> (f64, f64) {
        let lo = self.range_lo + k as f64 * self.bin_width;
        let hi = if k + 1 == self.counts.len() {
            self.range_hi
        } else {
            self.range_lo + (k + 1) as f64 * self.bin_width
        };
        (lo, hi)
    }

    pub fn in_range(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn out_of_range(&self) -> u64 {
        self.below + self.above + self.non_finite
    }
}

fn bin_count(span: f64, width: f64) -> usize {
    let ratio = span / width;
    let nearest = libm::round(ratio);
    // Snap ratios like 10.000000000000002 so a float-noisy span does not grow
    // a sliver bin.
    let k = if libm::fabs(ratio - nearest) <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        libm::ceil(ratio)
    };
    (k as usize).max(1)
}

pub fn histogram(values: &[f64], bin_width: f64, lo: f64, hi: f64) -> Result<HistogramBins, StatsError> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(StatsError::InvalidRange);
    }
    let bins = bin_count(hi - lo, bin_width);
    let mut out = HistogramBins {
        bin_width,
        range_lo: lo,
        range_hi: hi,
        counts: alloc::vec![0; bins],
        below: 0,
        above: 0,
        non_finite: 0,
    };
    for &v in values {
        if !v.is_finite() {
            out.non_finite += 1;
        } else if v < lo {
            out.below += 1;
        } else if v > hi {
            out.above += 1;
        } else {
            let k = libm::floor((v - lo) / bin_width) as usize;
            out.counts[k.min(bins - 1)] += 1;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_ryff_bins() {
        let h = histogram(&[51., 95., 123.], 10., 0., 130.).unwrap();
        assert_eq!(h.counts.len(), 13);
        assert_eq!(h.counts[5], 1);
        assert_eq!(h.counts[9], 1);
        assert_eq!(h.counts[12], 1);
        assert_eq!(h.in_range(), 3);
        assert_eq!(h.edges(12), (120., 130.));
    }

    #[test]
    fn edge_rules() {
        let h = histogram(&[60., 130., 0., -1., 131., f64::NAN], 10., 0., 130.).unwrap();
        assert_eq!(h.counts[6], 1);
        assert_eq!(h.counts[12], 1);
        assert_eq!(h.counts[0], 1);
        assert_eq!((h.below, h.above, h.non_finite), (1, 1, 1));
    }

    #[test]
    fn partial_last_bin_and_noise() {
        let h = histogram(&[24.9, 25.0], 10., 0., 25.).unwrap();
        assert_eq!(h.counts, alloc::vec![0, 0, 2]);
        assert_eq!(h.edges(2), (20., 25.));
        assert_eq!(histogram(&[], 0.1, 0., 1.).unwrap().counts.len(), 10);
    }

    #[test]
    fn invalid() {
        assert_eq!(histogram(&[], 10., 5., 5.), Err(StatsError::InvalidRange));
        assert_eq!(histogram(&[], 0., 0., 5.), Err(StatsError::InvalidRange));
    }
}
