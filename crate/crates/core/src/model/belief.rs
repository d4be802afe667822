use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a belief.
pub const MASS_TOL: f64 = 1e-12;

/// Probability vector over the hidden states.
///
/// State 1 (index 0) is the post-change absorbing state in the detection
/// families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BeliefState(Vec<f64>);

impl BeliefState {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidBelief(format!(
                "need at least 2 states, got {}",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidBelief(format!("entry {p} outside [0, 1]")));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidBelief(format!("entries sum to {s}")));
        }
        Ok(Self(probs))
    }

    /// Normalizes a non-negative vector. Fails on zero or non-finite mass.
    pub fn normalized(mut v: Vec<f64>) -> Result<Self> {
        let s: f64 = v.iter().sum();
        if !(s > 0.0 && s.is_finite()) || v.iter().any(|x| *x < 0.0) {
            return Err(Error::InvalidBelief(format!("cannot normalize, mass {s}")));
        }
        v.iter_mut().for_each(|x| *x /= s);
        Ok(Self(v))
    }

    /// Wraps a vector already known to be a probability vector.
    pub(crate) fn from_raw(v: Vec<f64>) -> Self {
        debug_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        Self(v)
    }

    /// Unit vector `e_{i+1}` (zero-based `i`).
    pub fn vertex(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Self(v)
    }

    pub fn uniform(dim: usize) -> Self {
        Self(vec![1.0 / dim as f64; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        self.0.iter().zip(w).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs_diff(&self, other: &BeliefState) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for BeliefState {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for BeliefState {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BeliefState> for Vec<f64> {
    fn from(b: BeliefState) -> Self {
        b.0
    }
}
