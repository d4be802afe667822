use serde::{Deserialize, Serialize};

use super::detection::{validate_model, DetectionModel, ModelFamily};
use crate::error::{Error, Result};

/// Probability mass function of the change time, `pmf[k] = P(τ0 = k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhDistribution {
    pub pmf: Vec<f64>,
}

impl PhDistribution {
    pub fn total_mass(&self) -> f64 {
        self.pmf.iter().sum()
    }

    pub fn cdf(&self) -> Vec<f64> {
        self.pmf
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }

    pub fn mean(&self) -> f64 {
        self.pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    /// Total variation distance to an empirical histogram of counts.
    ///
    /// `counts[k]` counts samples equal to `k`; `overflow` counts samples
    /// beyond the tabulated range. Mass not tabulated here is matched
    /// against the overflow bucket.
    pub fn tv_distance(&self, counts: &[u64], overflow: u64) -> f64 {
        let n = counts.iter().sum::<u64>() + overflow;
        if n == 0 {
            return f64::NAN;
        }
        let n = n as f64;
        let len = self.pmf.len().max(counts.len());
        let mut d = 0.0;
        for k in 0..len {
            let p = self.pmf.get(k).copied().unwrap_or(0.0);
            let q = counts.get(k).copied().unwrap_or(0) as f64 / n;
            d += (p - q).abs();
        }
        let tail = (1.0 - self.total_mass()).max(0.0);
        d += (tail - overflow as f64 / n).abs();
        0.5 * d
    }
}

/// Change-time pmf `ν_0 = π0(1)`, `ν_k = π̄0' P̄^{k-1} P_1` for `k = 1..=k_max`.
///
/// `P̄` is the pre-change block and `P_1` the column of jump probabilities
/// into state 1. Computed by repeated vector-matrix products.
pub fn ph_pmf(model: &DetectionModel, k_max: usize) -> Result<PhDistribution> {
    let problems: Vec<String> = validate_model(model, ModelFamily::AbsorbingRelaxed)
        .into_iter()
        .map(|v| v.to_string())
        .collect();
    if !problems.is_empty() {
        return Err(Error::InvalidModel(problems));
    }
    let p = &model.transition;
    let x = p.rows();
    let exit: Vec<f64> = (1..x).map(|i| p.get(i, 0)).collect();
    let mut v: Vec<f64> = model.initial.probs()[1..].to_vec();
    let mut pmf = Vec::with_capacity(k_max + 1);
    pmf.push(model.initial[0]);
    let mut next = vec![0.0; x - 1];
    for _ in 1..=k_max {
        pmf.push(v.iter().zip(&exit).map(|(a, b)| a * b).sum());
        next.iter_mut().for_each(|n| *n = 0.0);
        for (i, &vi) in v.iter().enumerate() {
            for (j, n) in next.iter_mut().enumerate() {
                *n += vi * p.get(i + 1, j + 1);
            }
        }
        std::mem::swap(&mut v, &mut next);
    }
    Ok(PhDistribution { pmf })
}
