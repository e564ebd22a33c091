//! Seeded permutation test for correlation coefficients.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::correlation::{pearson_coefficient, ranks, CorrelationMethod};
use super::StatsError;

pub const MIN_PERMUTATIONS: usize = 1000;

/// Two-tailed permutation p-value `(1 + hits) / (iterations + 1)`, where a
/// hit is a permutation of `y` whose |statistic| reaches the observed one.
///
/// Iteration `i` draws from stream `i` of a ChaCha generator keyed on
/// `seed`, so the result does not depend on how iterations are scheduled.
pub fn p_value_permutation(
    x: &[f64],
    y: &[f64],
    method: CorrelationMethod,
    iterations: usize,
    seed: u64,
) -> Result<f64, StatsError> {
    if iterations < MIN_PERMUTATIONS {
        return Err(StatsError::TooFewIterations {
            iterations,
            min: MIN_PERMUTATIONS,
        });
    }
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(StatsError::TooFewSamples { n: x.len(), min: 3 });
    }
    // Validates finiteness and variance the same way the coefficient does.
    pearson_coefficient(x, y)?;

    let (a, b) = match method {
        CorrelationMethod::Pearson => (x.to_vec(), y.to_vec()),
        CorrelationMethod::Spearman => (ranks(x), ranks(y)),
    };
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let centred_a: Vec<f64> = a.iter().map(|v| v - mean_a).collect();
    let centred_b: Vec<f64> = b.iter().map(|v| v - mean_b).collect();

    // The denominator of r is permutation invariant, so the centred
    // cross-product alone orders permutations.
    let cross = |bs: &[f64]| -> f64 { centred_a.iter().zip(bs).map(|(p, q)| p * q).sum() };
    let observed = libm::fabs(cross(&centred_b));
    let scale: f64 = centred_a
        .iter()
        .zip(&centred_b)
        .map(|(p, q)| libm::fabs(*p) * libm::fabs(*q))
        .sum();
    let threshold = observed - 1e-12 * scale;

    let mut buf = centred_b.clone();
    let mut hits = 0usize;
    for i in 0..iterations {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        buf.copy_from_slice(&centred_b);
        buf.shuffle(&mut rng);
        if libm::fabs(cross(&buf)) >= threshold {
            hits += 1;
        }
    }
    Ok((1 + hits) as f64 / (iterations + 1) as f64)
}
