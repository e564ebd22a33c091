//! Family-wise error corrections for a set of p-values.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Correction {
    #[default]
    None,
    Bonferroni,
    Holm,
}

/// Adjusted p-values in input order, each capped at 1.
pub fn adjust_p_values(p_values: &[f64], correction: Correction) -> Vec<f64> {
    let m = p_values.len() as f64;
    match correction {
        Correction::None => p_values.to_vec(),
        Correction::Bonferroni => p_values.iter().map(|p| (p * m).min(1.0)).collect(),
        Correction::Holm => {
            let mut order: Vec<usize> = (0..p_values.len()).collect();
            order.sort_by(|&i, &j| p_values[i].total_cmp(&p_values[j]));
            let mut out = alloc::vec![0.0; p_values.len()];
            let mut running: f64 = 0.0;
            for (rank, &idx) in order.iter().enumerate() {
                let scaled = (p_values[idx] * (m - rank as f64)).min(1.0);
                running = running.max(scaled);
                out[idx] = running;
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holm_step_down() {
        let p = [0.01, 0.04, 0.03, 0.005];
        let holm = adjust_p_values(&p, Correction::Holm);
        // sorted: 0.005*4, 0.01*3, 0.03*2, 0.04*1 -> 0.02, 0.03, 0.06, 0.06
        let want = [0.03, 0.06, 0.06, 0.02];
        for (a, b) in holm.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        let bonf = adjust_p_values(&p, Correction::Bonferroni);
        assert!((bonf[1] - 0.16).abs() < 1e-12);
        assert_eq!(adjust_p_values(&[0.5, 0.9], Correction::Bonferroni), alloc::vec![1.0, 1.0]);
    }
}
