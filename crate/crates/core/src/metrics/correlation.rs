//! Pearson and Spearman correlation with t-transform p-values.
//!
//! Inputs whose values are all multiples of one half (integers, and every
//! fractional rank) are summed in exact 128-bit integer arithmetic. The
//! result is then independent of input order, which makes a Spearman
//! coefficient computed on a reordered copy of the data bit-identical to the
//! original. Other inputs fall back to a two-pass mean-centred computation.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::special::regularized_incomplete_beta;
use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PValueMethod {
    TApprox,
    Permutation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub method: CorrelationMethod,
    pub coefficient: f64,
    pub p_value: f64,
    pub n: usize,
    pub p_method: PValueMethod,
}

/// Largest doubled magnitude that takes the exact integer route.
const EXACT_LIMIT: f64 = (1u64 << 40) as f64;
/// Largest sample that takes the exact integer route.
const EXACT_MAX_N: usize = 1 << 20;

fn check_pair(x: &[f64], y: &[f64], min_n: usize) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < min_n {
        return Err(StatsError::TooFewSamples {
            n: x.len(),
            min: min_n,
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(())
}

/// Doubles every value and returns the integers, or `None` when some value
/// is not a multiple of one half or is too large.
fn as_half_integers(values: &[f64]) -> Option<Vec<i128>> {
    if values.len() > EXACT_MAX_N {
        return None;
    }
    values
        .iter()
        .map(|&v| {
            let doubled = v * 2.0;
            if doubled.abs() <= EXACT_LIMIT && libm::trunc(doubled) == doubled {
                Some(doubled as i128)
            } else {
                None
            }
        })
        .collect()
}

fn exact_coefficient(a: &[i128], b: &[i128]) -> Result<f64, StatsError> {
    let n = a.len() as i128;
    let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0i128, 0i128, 0i128, 0i128, 0i128);
    for (&ai, &bi) in a.iter().zip(b) {
        sa += ai;
        sb += bi;
        saa += ai * ai;
        sbb += bi * bi;
        sab += ai * bi;
    }
    // n^2 times the centred sums of squares and cross-products.
    let var_a = n * saa - sa * sa;
    let var_b = n * sbb - sb * sb;
    let cov = n * sab - sa * sb;
    if var_a == 0 || var_b == 0 {
        return Err(StatsError::ZeroVariance);
    }
    if let (Some(lhs), Some(rhs)) = (cov.checked_mul(cov), var_a.checked_mul(var_b)) {
        if lhs == rhs {
            return Ok(if cov > 0 { 1.0 } else { -1.0 });
        }
    }
    let denom = libm::sqrt(var_a as f64 * var_b as f64);
    Ok((cov as f64 / denom).clamp(-1.0, 1.0))
}

fn float_coefficient(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mx;
        let dy = yi - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Pearson coefficient alone. Accepts `n >= 2` so that it can be used on
/// small prefixes of a retention curve.
pub fn pearson_coefficient(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_pair(x, y, 2)?;
    match (as_half_integers(x), as_half_integers(y)) {
        (Some(a), Some(b)) => exact_coefficient(&a, &b),
        _ => float_coefficient(x, y),
    }
}

/// Spearman coefficient alone: Pearson on average ranks. Accepts `n >= 2`.
pub fn spearman_coefficient(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_pair(x, y, 2)?;
    pearson_coefficient(&ranks(x), &ranks(y))
}

/// 1-based fractional ranks; tied values share the mean of the ranks they
/// span.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut out = alloc::vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end, averaged
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            out[idx] = avg;
        }
        start = end;
    }
    out
}

/// Two-tailed p-value for `H0: coefficient = 0` from the t-transform with
/// `n - 2` degrees of freedom. `|coefficient| = 1` gives exactly 0.
pub fn p_value_t(coefficient: f64, n: usize) -> f64 {
    if n < 3 || coefficient.is_nan() {
        return f64::NAN;
    }
    let r = coefficient.clamp(-1.0, 1.0);
    if r.abs() == 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    // With t = r sqrt(df / (1 - r^2)), df / (df + t^2) reduces to 1 - r^2.
    regularized_incomplete_beta(df / 2.0, 0.5, 1.0 - r * r).clamp(0.0, 1.0)
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    check_pair(x, y, 3)?;
    let coefficient = pearson_coefficient(x, y)?;
    Ok(CorrelationResult {
        method: CorrelationMethod::Pearson,
        coefficient,
        p_value: p_value_t(coefficient, x.len()),
        n: x.len(),
        p_method: PValueMethod::TApprox,
    })
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    check_pair(x, y, 3)?;
    let coefficient = spearman_coefficient(x, y)?;
    Ok(CorrelationResult {
        method: CorrelationMethod::Spearman,
        coefficient,
        p_value: p_value_t(coefficient, x.len()),
        n: x.len(),
        p_method: PValueMethod::TApprox,
    })
}

pub fn correlate(
    method: CorrelationMethod,
    x: &[f64],
    y: &[f64],
) -> Result<CorrelationResult, StatsError> {
    match method {
        CorrelationMethod::Pearson => pearson(x, y),
        CorrelationMethod::Spearman => spearman(x, y),
    }
}
