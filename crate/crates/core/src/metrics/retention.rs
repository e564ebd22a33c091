//! Cumulative correlation under progressive data retention.
//!
//! Records are ordered by absolute prediction error (ties by record id) and
//! the Spearman coefficient is recomputed on each growing prefix.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::correlation::spearman_coefficient;
use super::StatsError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetentionPoint {
    pub n_included: usize,
    pub retention_pct: f64,
    /// `None` when the prefix has no variance in one of the two series.
    pub cumulative_scc: Option<f64>,
}

/// Retention percentage for `n` of `total` records.
pub fn retention_pct(n: usize, total: usize) -> f64 {
    100.0 * n as f64 / total as f64
}

pub fn retention_curve<S: AsRef<str>>(
    pred: &[f64],
    truth: &[f64],
    ids: &[S],
) -> Result<Vec<RetentionPoint>, StatsError> {
    if pred.len() != truth.len() {
        return Err(StatsError::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if ids.len() != pred.len() {
        return Err(StatsError::LengthMismatch {
            left: pred.len(),
            right: ids.len(),
        });
    }
    let total = pred.len();
    if total < 2 {
        return Err(StatsError::TooFewSamples { n: total, min: 2 });
    }
    if pred.iter().chain(truth).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }

    let mut order: Vec<usize> = (0..total).collect();
    order.sort_by(|&i, &j| {
        let ei = libm::fabs(pred[i] - truth[i]);
        let ej = libm::fabs(pred[j] - truth[j]);
        ei.total_cmp(&ej)
            .then_with(|| ids[i].as_ref().cmp(ids[j].as_ref()))
    });
    let sorted_pred: Vec<f64> = order.iter().map(|&i| pred[i]).collect();
    let sorted_truth: Vec<f64> = order.iter().map(|&i| truth[i]).collect();

    let mut points = Vec::with_capacity(total - 1);
    for n in 2..=total {
        let scc = match spearman_coefficient(&sorted_pred[..n], &sorted_truth[..n]) {
            Ok(rho) => Some(rho),
            Err(StatsError::ZeroVariance) => None,
            Err(e) => return Err(e),
        };
        points.push(RetentionPoint {
            n_included: n,
            retention_pct: retention_pct(n, total),
            cumulative_scc: scc,
        });
    }
    Ok(points)
}

/// Ids in retention order, for reporting alongside the curve.
pub fn retention_order(pred: &[f64], truth: &[f64], ids: &[String]) -> Vec<String> {
    let mut order: Vec<usize> = (0..pred.len().min(truth.len()).min(ids.len())).collect();
    order.sort_by(|&i, &j| {
        libm::fabs(pred[i] - truth[i])
            .total_cmp(&libm::fabs(pred[j] - truth[j]))
            .then_with(|| ids[i].cmp(&ids[j]))
    });
    order.into_iter().map(|i| ids[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::spearman;

    #[test]
    fn three_point_example() {
        let pts = retention_curve(&[1., 2., 3.], &[1., 2., 10.], &["a", "b", "c"]).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].n_included, 2);
        assert!((pts[0].retention_pct - 66.666_666_666_666_67).abs() < 1e-12);
        assert_eq!(pts[0].cumulative_scc, Some(1.0));
        assert_eq!(pts[1].retention_pct, 100.0);
        assert_eq!(pts[1].cumulative_scc, Some(1.0));
    }

    #[test]
    fn final_point_is_global_scc() {
        let pred = [60., 72., 55., 90., 81., 64., 70., 99.];
        let truth = [70., 60., 58., 95., 100., 51., 88., 93.];
        let ids = ["h", "g", "f", "e", "d", "c", "b", "a"];
        let pts = retention_curve(&pred, &truth, &ids).unwrap();
        let global = spearman(&pred, &truth).unwrap().coefficient;
        assert_eq!(pts.last().unwrap().cumulative_scc.unwrap().to_bits(), global.to_bits());
    }

    #[test]
    fn constant_prefix_is_a_gap() {
        // first two records (zero error) share the same prediction
        let pts = retention_curve(&[5., 5., 9., 1.], &[5., 5., 7., 4.], &["a", "b", "c", "d"])
            .unwrap();
        assert_eq!(pts[0].cumulative_scc, None);
        assert!(pts[1].cumulative_scc.is_some());
    }

    #[test]
    fn errors() {
        assert!(matches!(
            retention_curve(&[1.], &[1.], &["a"]),
            Err(StatsError::TooFewSamples { .. })
        ));
        assert!(matches!(
            retention_curve(&[1., 2.], &[1.], &["a", "b"]),
            Err(StatsError::LengthMismatch { .. })
        ));
    }
}
