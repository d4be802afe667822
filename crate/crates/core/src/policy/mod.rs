//! Linear threshold policies and their stochastic-approximation tuning.

mod spsa;

pub use spsa::{
    optimize_threshold, sample_cost, spsa_optimize, CostSampler, SampleCostOptions, SpsaIterate, SpsaParams,
    SpsaRun, ThresholdSearch,
};

use serde::{Deserialize, Serialize};

use crate::dp::Action;
use crate::error::{invalid, Error, Result};
use crate::model::BeliefState;

/// Stop iff `π2 + θ1 π3 + … + θ_{X-2} π_X - θ_{X-1} < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearThresholdPolicy {
    pub theta: Vec<f64>,
}

impl LinearThresholdPolicy {
    pub fn new(theta: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(invalid("theta", "needs at least one coefficient"));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(invalid("theta", "coefficients must be finite"));
        }
        Ok(Self { theta })
    }

    pub fn from_phi(phi: &[f64]) -> Result<Self> {
        Self::new(phi_to_theta(phi))
    }

    /// Number of states the policy applies to.
    pub fn states(&self) -> usize {
        self.theta.len() + 1
    }

    /// Left-hand side of the threshold test.
    pub fn score(&self, pi: &[f64]) -> f64 {
        let n = self.theta.len();
        let mut s = pi[1];
        for k in 0..n - 1 {
            s += self.theta[k] * pi[k + 2];
        }
        s - self.theta[n - 1]
    }

    pub fn decide(&self, pi: &BeliefState) -> Result<Action> {
        if pi.dim() != self.states() {
            return Err(Error::Dimension {
                context: "belief vs threshold policy",
                expected: self.states(),
                found: pi.dim(),
            });
        }
        Ok(self.decide_unchecked(pi.probs()))
    }

    pub(crate) fn decide_unchecked(&self, pi: &[f64]) -> Action {
        if self.score(pi) < 0.0 {
            Action::Stop
        } else {
            Action::Continue
        }
    }
}

/// Whether `θ` lies in the set that makes the policy MLR increasing.
pub fn theta_is_mlr_increasing(theta: &[f64]) -> bool {
    let n = theta.len();
    if n == 0 || theta[n - 1] <= 0.0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let pivot = theta[n - 2];
    pivot >= 1.0 && theta[..n - 2].iter().all(|&t| (0.0..=pivot).contains(&t))
}

/// Map unconstrained `φ` onto the constraint set:
/// `θ_{X-1} = φ²_{X-1}`, `θ_{X-2} = 1 + φ²_{X-2}`, `θ_i = θ_{X-2} sin²(φ_i)`.
pub fn phi_to_theta(phi: &[f64]) -> Vec<f64> {
    let n = phi.len();
    if n == 0 {
        return Vec::new();
    }
    let mut theta = vec![0.0; n];
    theta[n - 1] = phi[n - 1] * phi[n - 1];
    if n >= 2 {
        let pivot = 1.0 + phi[n - 2] * phi[n - 2];
        theta[n - 2] = pivot;
        for i in 0..n - 2 {
            theta[i] = pivot * phi[i].sin().powi(2);
        }
    }
    theta
}
