//! Statistics for comparing predicted and reference scores.

mod adjust;
mod correlation;
mod descriptive;
mod histogram;
mod keywords;
mod permutation;
mod retention;
pub mod special;

pub use adjust::{adjust_p_values, Correction};
pub use correlation::{
    correlate, p_value_t, pearson, pearson_coefficient, ranks, spearman, spearman_coefficient,
    CorrelationMethod, CorrelationResult, PValueMethod,
};
pub use descriptive::{descriptive_stats, DescriptiveStats};
pub use histogram::{histogram, HistogramBins};
pub use keywords::keyword_frequencies;
pub use permutation::{p_value_permutation, MIN_PERMUTATIONS};
pub use retention::{retention_curve, retention_order, retention_pct, RetentionPoint};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StatsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {min} samples, got {n}")]
    TooFewSamples { n: usize, min: usize },
    #[error("zero variance in input")]
    ZeroVariance,
    #[error("input contains a non-finite value")]
    NonFinite,
    #[error("empty input")]
    Empty,
    #[error("invalid histogram range")]
    InvalidRange,
    #[error("need at least {min} permutations, got {iterations}")]
    TooFewIterations { iterations: usize, min: usize },
}
