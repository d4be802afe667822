use crate::error::{Error, Result};
use crate::filters::SocialContext;
use crate::model::{risk_vectors, BeliefState, CostSpec, DetectionModel, Matrix, DEFAULT_GAUSSIAN_BINS};

/// Stage costs of a family with its derived vectors precomputed.
///
/// `costs` returns the shifted costs `(C(π,1), C(π,2))` the dynamic program
/// works with; `offset` is the shift, so that `V̄ = V + offset`.
#[derive(Debug, Clone)]
pub struct CostEvaluator {
    spec: CostSpec,
    p: Matrix,
    b: Matrix,
    f: Option<Vec<f64>>,
    g: Option<Vec<f64>>,
    risk: Option<(Vec<f64>, Vec<f64>)>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conditional variance of `g(x)` under `pi`.
fn variance(g: &[f64], pi: &[f64]) -> f64 {
    let m = dot(g, pi);
    g.iter().zip(pi).map(|(gi, p)| gi * gi * p).sum::<f64>() - m * m
}

impl CostEvaluator {
    pub fn new(spec: &CostSpec, model: &DetectionModel) -> Result<Self> {
        let model = model.discretized(DEFAULT_GAUSSIAN_BINS)?;
        let x = model.states();
        spec.validate(x)?;
        let b = model.obs_matrix()?.clone();
        let risk = match spec {
            CostSpec::RiskSensitive { epsilon, beta, d } => {
                Some(risk_vectors(*epsilon, *beta, *d, &model.transition))
            }
            _ => None,
        };
        if let CostSpec::SocialStopping { local_costs, .. } = spec {
            SocialContext::new(local_costs.clone(), b.clone())?;
        }
        if let CostSpec::ConstrainedSocial { local_costs, .. } = spec {
            if local_costs.cols() < b.cols() {
                return Err(Error::Dimension {
                    context: "constrained social: one local action per observation",
                    expected: b.cols(),
                    found: local_costs.cols(),
                });
            }
        }
        Ok(Self {
            spec: spec.clone(),
            p: model.transition.clone(),
            b,
            f: spec.false_alarm_vector(x),
            g: spec.variance_vector(x),
            risk,
        })
    }

    pub fn spec(&self) -> &CostSpec {
        &self.spec
    }

    /// Unshifted costs `(C̄(π,1), C̄(π,2))`.
    ///
    /// The risk-sensitive family has no additive continue cost; its second
    /// entry is zero.
    pub fn original(&self, pi: &[f64]) -> (f64, f64) {
        match &self.spec {
            CostSpec::QuickestPredictiveDelay {
                alpha, beta, d, c, ..
            } => {
                let (f, g) = (self.f.as_ref().unwrap(), self.g.as_ref().unwrap());
                let pp = self.p.tmul_vec(pi);
                (alpha * variance(g, pi) + beta * dot(f, pi), d * pp[0] + c)
            }
            CostSpec::QuickestClassicalDelay { alpha, beta, d, .. } => {
                let (f, g) = (self.f.as_ref().unwrap(), self.g.as_ref().unwrap());
                (alpha * variance(g, pi) + beta * dot(f, pi), d * pi[0])
            }
            CostSpec::Transient { alpha, beta, d, .. } => {
                let (f, g) = (self.f.as_ref().unwrap(), self.g.as_ref().unwrap());
                (alpha * variance(g, pi) + beta * dot(f, pi), dot(d, pi))
            }
            CostSpec::RiskSensitive { .. } => (dot(&self.risk.as_ref().unwrap().0, pi), 0.0),
            CostSpec::SocialStopping {
                d,
                beta,
                local_costs,
                welfare,
                ..
            } => {
                let mut cont = d * pi[0];
                if *welfare {
                    cont += self.expected_myopic_cost(local_costs, pi);
                }
                (beta * pi[1], cont)
            }
            CostSpec::ConstrainedSocial { beta, d, .. } => {
                let (c1, _) = self.costs(pi);
                (c1 + beta * (1.0 - pi[0]), self.revealed_cost(pi) + d * pi[0])
            }
            CostSpec::Scheduling { .. } => self.costs(pi),
        }
    }

    /// `Σ_y min_a c_a' B_y π`: cost of agents acting myopically on their
    /// private observation.
    fn expected_myopic_cost(&self, c: &Matrix, pi: &[f64]) -> f64 {
        (0..self.b.cols())
            .map(|y| {
                (0..c.cols())
                    .map(|a| (0..pi.len()).map(|i| c.get(i, a) * self.b.get(i, y) * pi[i]).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            })
            .sum()
    }

    /// `Σ_y c_y' B_y π`: cost when each agent's action equals its observation.
    fn revealed_cost(&self, pi: &[f64]) -> f64 {
        let CostSpec::ConstrainedSocial { local_costs: c, .. } = &self.spec else {
            return 0.0;
        };
        (0..self.b.cols())
            .map(|y| (0..pi.len()).map(|i| c.get(i, y) * self.b.get(i, y) * pi[i]).sum::<f64>())
            .sum()
    }

    /// Shifted costs `(C(π,1), C(π,2))`.
    pub fn costs(&self, pi: &[f64]) -> (f64, f64) {
        match &self.spec {
            CostSpec::QuickestPredictiveDelay {
                alpha, beta, rho, ..
            }
            | CostSpec::QuickestClassicalDelay {
                alpha, beta, rho, ..
            }
            | CostSpec::Transient {
                alpha, beta, rho, ..
            } => {
                let (s, c) = self.original(pi);
                let f = self.f.as_ref().unwrap();
                let k = alpha + beta;
                let fp = dot(f, pi);
                let fpp = dot(f, &self.p.tmul_vec(pi));
                (s - k * fp, c - k * fp + rho * k * fpp)
            }
            CostSpec::RiskSensitive { .. } => {
                let (r1, r2) = self.risk.as_ref().unwrap();
                let weighted: Vec<f64> = pi.iter().zip(r2).map(|(p, r)| p * r).collect();
                let grown = dot(r1, &self.p.tmul_vec(&weighted));
                (0.0, grown - dot(r1, pi))
            }
            CostSpec::SocialStopping { rho, .. } => {
                let (s, c) = self.original(pi);
                (0.0, c - (1.0 - rho) * s)
            }
            CostSpec::ConstrainedSocial {
                local_costs: c,
                d,
                beta,
                rho,
            } => {
                let best = (0..c.cols())
                    .map(|a| (0..pi.len()).map(|i| c.get(i, a) * pi[i]).sum::<f64>())
                    .fold(f64::INFINITY, f64::min);
                let stop = best / (1.0 - rho);
                let cont = self.revealed_cost(pi) + (d + (1.0 - rho) * beta) * pi[0]
                    - (1.0 - rho) * beta;
                (stop, cont)
            }
            CostSpec::Scheduling {
                alpha, costs, ..
            } => {
                let g = self.g.as_ref().unwrap();
                let pp = self.p.tmul_vec(pi);
                let v = variance(g, &pp);
                (
                    alpha[0] * v + dot(&costs[0], &pp),
                    alpha[1] * v + dot(&costs[1], &pp),
                )
            }
        }
    }

    /// `V̄(π) - V(π)`.
    pub fn offset(&self, pi: &[f64]) -> f64 {
        match &self.spec {
            CostSpec::QuickestPredictiveDelay { alpha, beta, .. }
            | CostSpec::QuickestClassicalDelay { alpha, beta, .. }
            | CostSpec::Transient { alpha, beta, .. } => {
                (alpha + beta) * dot(self.f.as_ref().unwrap(), pi)
            }
            CostSpec::RiskSensitive { .. } => dot(&self.risk.as_ref().unwrap().0, pi),
            CostSpec::SocialStopping { beta, .. } => beta * pi[1],
            CostSpec::ConstrainedSocial { beta, .. } => beta * (1.0 - pi[0]),
            CostSpec::Scheduling { .. } => 0.0,
        }
    }

    /// Value-iteration starting point in shifted coordinates.
    ///
    /// Shifted families start from zero accumulated original cost; the risk
    /// family from `exp(0) = 1`.
    pub fn initial_value(&self, pi: &[f64]) -> f64 {
        match &self.spec {
            CostSpec::QuickestPredictiveDelay { .. }
            | CostSpec::QuickestClassicalDelay { .. }
            | CostSpec::Transient { .. } => -self.offset(pi),
            CostSpec::RiskSensitive { .. } => 1.0 - self.offset(pi),
            _ => 0.0,
        }
    }

    /// Largest absolute stage cost over the simplex vertices plus the
    /// largest possible variance term.
    pub fn cost_bound(&self) -> f64 {
        let x = self.p.rows();
        let mut m: f64 = 0.0;
        for i in 0..x {
            let e = BeliefState::vertex(x, i);
            let (a, b) = self.costs(e.probs());
            m = m.max(a.abs()).max(b.abs());
        }
        let alpha = match &self.spec {
            CostSpec::QuickestPredictiveDelay { alpha, .. }
            | CostSpec::QuickestClassicalDelay { alpha, .. }
            | CostSpec::Transient { alpha, .. } => *alpha,
            CostSpec::Scheduling { alpha, .. } => alpha[0].max(alpha[1]),
            _ => 0.0,
        };
        let gmax = self
            .g
            .as_ref()
            .map_or(0.0, |g| g.iter().map(|v| v * v).fold(0.0, f64::max));
        m + alpha * gmax
    }
}

/// `(C(π,1), C(π,2))` in the shifted coordinates of the family.
pub fn stage_costs(spec: &CostSpec, model: &DetectionModel, pi: &BeliefState) -> Result<(f64, f64)> {
    if pi.dim() != model.states() {
        return Err(Error::Dimension {
            context: "belief vs model",
            expected: model.states(),
            found: pi.dim(),
        });
    }
    Ok(CostEvaluator::new(spec, model)?.costs(pi.probs()))
}

/// `(C̄(π,1), C̄(π,2))` before the coordinate shift.
pub fn original_costs(
    spec: &CostSpec,
    model: &DetectionModel,
    pi: &BeliefState,
) -> Result<(f64, f64)> {
    Ok(CostEvaluator::new(spec, model)?.original(pi.probs()))
}
