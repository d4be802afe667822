use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{invalid, Error, Result};

/// Cost family and its parameters.
///
/// Actions are numbered 1 and 2 throughout. In the stopping families 1 means
/// "stop and announce" and 2 means "continue". In `Scheduling` they select
/// the coarse (1) or the fine (2) sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum CostSpec {
    /// Variance penalty on stopping, false alarm `β(1-π1)`, delay `d e1'P'π + c`.
    QuickestPredictiveDelay {
        alpha: f64,
        beta: f64,
        d: f64,
        rho: f64,
        #[serde(default)]
        c: f64,
    },
    /// Variance penalty plus `β f'π` on stopping, delay `d π1`.
    QuickestClassicalDelay {
        alpha: f64,
        beta: f64,
        d: f64,
        rho: f64,
        f: Vec<f64>,
    },
    /// Detecting entry into and exit from a transient state.
    ///
    /// Stop cost `α(G'π - (g'π)²) + β f'π`, continue cost `d'π`.
    /// `f` and `g` default to the last unit vector.
    Transient {
        alpha: f64,
        beta: f64,
        d: Vec<f64>,
        rho: f64,
        #[serde(default)]
        f: Option<Vec<f64>>,
        #[serde(default)]
        g: Option<Vec<f64>>,
        /// Number of transient states between the absorbing state and the
        /// entry states; enables the general phase-type checks.
        #[serde(default)]
        transient_states: Option<usize>,
    },
    /// Exponential delay penalty.
    RiskSensitive { epsilon: f64, beta: f64, d: f64 },
    /// Stopping with agents that learn socially (two states, two actions).
    SocialStopping {
        d: f64,
        beta: f64,
        rho: f64,
        local_costs: Matrix,
        /// Adds the expected myopic agent cost to the continue cost.
        #[serde(default)]
        welfare: bool,
    },
    /// Agents reveal their observation while the process continues.
    ConstrainedSocial {
        local_costs: Matrix,
        d: f64,
        beta: f64,
        rho: f64,
    },
    /// Choice between a coarse and a fine sensor each step.
    Scheduling {
        alpha: [f64; 2],
        costs: [Vec<f64>; 2],
        #[serde(default)]
        g: Option<Vec<f64>>,
        rho: f64,
        /// Garbling matrix: coarse observations are `B Q`.
        confusion: Matrix,
        #[serde(default)]
        coarse_observation: Option<Matrix>,
    },
}

fn nonneg(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be non-negative and finite, got {v}")))
    }
}

fn discount(v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid("rho", format!("must lie in [0, 1], got {v}")))
    }
}

fn length(context: &'static str, v: &[f64], x: usize) -> Result<()> {
    if v.len() == x {
        Ok(())
    } else {
        Err(Error::Dimension {
            context,
            expected: x,
            found: v.len(),
        })
    }
}

/// `1 - e1`.
pub fn complement_of_first(x: usize) -> Vec<f64> {
    let mut v = vec![1.0; x];
    v[0] = 0.0;
    v
}

fn last_unit(x: usize) -> Vec<f64> {
    let mut v = vec![0.0; x];
    v[x - 1] = 1.0;
    v
}

impl CostSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CostSpec::QuickestPredictiveDelay { .. } => "quickest_predictive_delay",
            CostSpec::QuickestClassicalDelay { .. } => "quickest_classical_delay",
            CostSpec::Transient { .. } => "transient",
            CostSpec::RiskSensitive { .. } => "risk_sensitive",
            CostSpec::SocialStopping { .. } => "social_stopping",
            CostSpec::ConstrainedSocial { .. } => "constrained_social",
            CostSpec::Scheduling { .. } => "scheduling",
        }
    }

    pub(crate) fn mismatch(&self, operation: &'static str) -> Error {
        Error::FamilyMismatch {
            family: self.name(),
            operation,
        }
    }

    /// Discount factor; the risk-sensitive family is undiscounted.
    pub fn rho(&self) -> f64 {
        match self {
            CostSpec::QuickestPredictiveDelay { rho, .. }
            | CostSpec::QuickestClassicalDelay { rho, .. }
            | CostSpec::Transient { rho, .. }
            | CostSpec::SocialStopping { rho, .. }
            | CostSpec::ConstrainedSocial { rho, .. }
            | CostSpec::Scheduling { rho, .. } => *rho,
            CostSpec::RiskSensitive { .. } => 1.0,
        }
    }

    /// Whether action 1 terminates the problem.
    pub fn is_stopping(&self) -> bool {
        !matches!(self, CostSpec::Scheduling { .. })
    }

    /// False-alarm weight vector used by the coordinate shift
    /// `V = V̄ - (α+β) f'π`, for the families that use it.
    pub fn false_alarm_vector(&self, x: usize) -> Option<Vec<f64>> {
        match self {
            CostSpec::QuickestPredictiveDelay { .. } => Some(complement_of_first(x)),
            CostSpec::QuickestClassicalDelay { f, .. } => Some(f.clone()),
            CostSpec::Transient { f, .. } => Some(f.clone().unwrap_or_else(|| last_unit(x))),
            _ => None,
        }
    }

    /// Vector whose conditional variance is penalized on stopping.
    pub fn variance_vector(&self, x: usize) -> Option<Vec<f64>> {
        match self {
            CostSpec::QuickestPredictiveDelay { .. } | CostSpec::QuickestClassicalDelay { .. } => {
                Some(complement_of_first(x))
            }
            CostSpec::Transient { g, .. } => Some(g.clone().unwrap_or_else(|| last_unit(x))),
            CostSpec::Scheduling { g, .. } => {
                Some(g.clone().unwrap_or_else(|| complement_of_first(x)))
            }
            _ => None,
        }
    }

    /// Checks parameter ranges and that vector lengths match `x` states.
    pub fn validate(&self, x: usize) -> Result<()> {
        match self {
            CostSpec::QuickestPredictiveDelay {
                alpha,
                beta,
                d,
                rho,
                c,
            } => {
                nonneg("alpha", *alpha)?;
                nonneg("beta", *beta)?;
                nonneg("d", *d)?;
                nonneg("c", *c)?;
                discount(*rho)
            }
            CostSpec::QuickestClassicalDelay {
                alpha,
                beta,
                d,
                rho,
                f,
            } => {
                nonneg("alpha", *alpha)?;
                nonneg("beta", *beta)?;
                nonneg("d", *d)?;
                discount(*rho)?;
                length("false-alarm vector", f, x)?;
                if f[0] != 0.0 {
                    return Err(invalid("f", "first entry must be 0"));
                }
                Ok(())
            }
            CostSpec::Transient {
                alpha,
                beta,
                d,
                rho,
                f,
                g,
                transient_states,
            } => {
                nonneg("alpha", *alpha)?;
                nonneg("beta", *beta)?;
                discount(*rho)?;
                length("delay vector", d, x)?;
                for v in d {
                    nonneg("d", *v)?;
                }
                if let Some(f) = f {
                    length("false-alarm vector", f, x)?;
                    if f[0] != 0.0 {
                        return Err(invalid("f", "first entry must be 0"));
                    }
                }
                if let Some(g) = g {
                    length("variance vector", g, x)?;
                }
                if let Some(k) = transient_states {
                    if k + 2 > x {
                        return Err(invalid("transient_states", format!("{k} too large for {x} states")));
                    }
                }
                Ok(())
            }
            CostSpec::RiskSensitive { epsilon, beta, d } => {
                nonneg("epsilon", *epsilon)?;
                nonneg("beta", *beta)?;
                nonneg("d", *d)
            }
            CostSpec::SocialStopping {
                d,
                beta,
                rho,
                local_costs,
                ..
            } => {
                nonneg("d", *d)?;
                nonneg("beta", *beta)?;
                discount(*rho)?;
                if x != 2 || local_costs.rows() != 2 || local_costs.cols() != 2 {
                    return Err(invalid(
                        "local_costs",
                        "the social stopping problem needs 2 states and 2 actions",
                    ));
                }
                Ok(())
            }
            CostSpec::ConstrainedSocial {
                local_costs,
                d,
                beta,
                rho,
            } => {
                nonneg("d", *d)?;
                nonneg("beta", *beta)?;
                discount(*rho)?;
                if *rho >= 1.0 {
                    return Err(invalid("rho", "must be below 1 for this family"));
                }
                if local_costs.rows() != x {
                    return Err(Error::Dimension {
                        context: "local cost rows",
                        expected: x,
                        found: local_costs.rows(),
                    });
                }
                Ok(())
            }
            CostSpec::Scheduling {
                alpha,
                costs,
                g,
                rho,
                confusion,
                coarse_observation,
            } => {
                nonneg("alpha", alpha[0])?;
                nonneg("alpha", alpha[1])?;
                discount(*rho)?;
                length("sensor cost vector", &costs[0], x)?;
                length("sensor cost vector", &costs[1], x)?;
                if let Some(g) = g {
                    length("variance vector", g, x)?;
                }
                confusion.check_stochastic("confusion matrix", 1e-12)?;
                if let Some(b) = coarse_observation {
                    b.check_stochastic("coarse observation matrix", 1e-12)?;
                }
                Ok(())
            }
        }
    }
}

/// Weight vectors of the risk-sensitive family.
///
/// `R1 = (1, e^{εβ}, ..., e^{εβ})` scales the stopping penalty and
/// `R2_i = e^{ε d P_{i1}}` the one-step delay penalty.
pub fn risk_vectors(epsilon: f64, beta: f64, d: f64, p: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let x = p.rows();
    let mut r1 = vec![(epsilon * beta).exp(); x];
    r1[0] = 1.0;
    let r2 = (0..x).map(|i| (epsilon * d * p.get(i, 0)).exp()).collect();
    (r1, r2)
}
