use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::StatsError;

/// Mean, median, sample standard deviation, and range of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (divisor `n - 1`); 0 when `n = 1`.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

pub fn descriptive_stats(values: &[f64]) -> Result<DescriptiveStats, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = if n == 1 {
        0.0
    } else {
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        libm::sqrt(ss / (n - 1) as f64)
    };

    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    Ok(DescriptiveStats {
        n,
        mean,
        median,
        std,
        min: sorted[0],
        max: sorted[n - 1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_scores() {
        let s = descriptive_stats(&[51., 95., 123.]).unwrap();
        assert!((s.mean - 89.666_666_666_666_67).abs() < 1e-9);
        assert_eq!(s.median, 95.0);
        // sqrt(((51-m)^2 + (95-m)^2 + (123-m)^2) / 2) with m = 269/3
        assert!((s.std - 36.295_086_903_509_86).abs() < 1e-9);
        assert_eq!((s.min, s.max), (51.0, 123.0));
    }

    #[test]
    fn singleton_and_even() {
        let s = descriptive_stats(&[7.]).unwrap();
        assert_eq!((s.mean, s.median, s.std, s.min, s.max), (7., 7., 0., 7., 7.));
        assert_eq!(descriptive_stats(&[4., 1., 3., 2.]).unwrap().median, 2.5);
        assert_eq!(descriptive_stats(&[]), Err(StatsError::Empty));
    }
}
