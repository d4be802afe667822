//! Belief recursions.
//!
//! Observation and action indices are zero-based: observation `y` is column
//! `y` of the observation matrix and local action `a` is column `a` of the
//! local cost matrix.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{risk_vectors, BeliefState, CostSpec, DetectionModel, Matrix};

/// Updated belief and its normalizing constant `σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutput {
    pub next: BeliefState,
    pub norm: f64,
}

/// In-place filter step `out ∝ B_y P' π`; returns the unnormalized mass.
///
/// When the mass is zero `out` holds zeros.
pub fn hmm_step(pi: &[f64], p: &Matrix, b: &Matrix, y: usize, out: &mut [f64]) -> f64 {
    p.tmul_vec_into(pi, out);
    let mut norm = 0.0;
    for (i, o) in out.iter_mut().enumerate() {
        *o *= b.get(i, y);
        norm += *o;
    }
    if norm > 0.0 {
        out.iter_mut().for_each(|o| *o /= norm);
    }
    norm
}

fn check_dims<'a>(pi: &BeliefState, model: &'a DetectionModel) -> Result<&'a Matrix> {
    let b = model.obs_matrix()?;
    if pi.dim() != model.states() {
        return Err(Error::Dimension {
            context: "belief vs transition",
            expected: model.states(),
            found: pi.dim(),
        });
    }
    Ok(b)
}

fn check_index(what: &'static str, v: usize, n: usize) -> Result<()> {
    if v < n {
        Ok(())
    } else {
        Err(invalid(what, format!("index {v} out of range 0..{n}")))
    }
}

/// HMM filter `T(π, y) = B_y P'π / σ` with `σ = 1'B_y P'π`.
pub fn hmm_update(pi: &BeliefState, y: usize, model: &DetectionModel) -> Result<FilterOutput> {
    let b = check_dims(pi, model)?;
    check_index("observation", y, b.cols())?;
    let mut out = vec![0.0; pi.dim()];
    let norm = hmm_step(pi.probs(), &model.transition, b, y, &mut out);
    if norm <= 0.0 {
        return Err(Error::ZeroProbability(format!("observation {y}")));
    }
    Ok(FilterOutput {
        next: BeliefState::from_raw(out),
        norm,
    })
}

/// Risk-sensitive filter `B_y P' diag(R2) π / σ`.
///
/// `σ` is not a probability: it carries the exponential delay weight.
pub fn risk_update(
    pi: &BeliefState,
    y: usize,
    model: &DetectionModel,
    spec: &CostSpec,
) -> Result<FilterOutput> {
    let CostSpec::RiskSensitive { epsilon, beta, d } = spec else {
        return Err(spec.mismatch("the risk-sensitive filter"));
    };
    let b = check_dims(pi, model)?;
    check_index("observation", y, b.cols())?;
    let (_, r2) = risk_vectors(*epsilon, *beta, *d, &model.transition);
    let weighted: Vec<f64> = pi.probs().iter().zip(&r2).map(|(p, r)| p * r).collect();
    let mut out = vec![0.0; pi.dim()];
    let norm = hmm_step(&weighted, &model.transition, b, y, &mut out);
    if norm <= 0.0 {
        return Err(Error::ZeroProbability(format!("observation {y}")));
    }
    Ok(FilterOutput {
        next: BeliefState::from_raw(out),
        norm,
    })
}

// ---------------------------------------------------------------------------
// Social learning
// ---------------------------------------------------------------------------

/// Local costs and private observation law shared by all agents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialContext {
    /// `c(e_i, a)`: row per state, column per local action.
    pub local_costs: Matrix,
    /// Private observation matrix, row per state.
    pub obs: Matrix,
}

impl SocialContext {
    pub fn new(local_costs: Matrix, obs: Matrix) -> Result<Self> {
        if local_costs.rows() != obs.rows() {
            return Err(Error::Dimension {
                context: "local cost rows vs observation rows",
                expected: obs.rows(),
                found: local_costs.rows(),
            });
        }
        obs.check_stochastic("observation matrix", 1e-12)?;
        Ok(Self { local_costs, obs })
    }

    pub fn states(&self) -> usize {
        self.obs.rows()
    }

    pub fn actions(&self) -> usize {
        self.local_costs.cols()
    }

    pub fn observations(&self) -> usize {
        self.obs.cols()
    }

    fn tie_tol(&self) -> f64 {
        let m = (0..self.local_costs.rows())
            .flat_map(|i| self.local_costs.row(i).iter().map(|c| c.abs()))
            .fold(0.0, f64::max);
        1e-12 * (1.0 + m)
    }

    fn myopic_action(&self, belief: &[f64]) -> usize {
        let tol = self.tie_tol();
        let mut best = 0;
        let mut best_cost = f64::INFINITY;
        for a in 0..self.actions() {
            let c: f64 = belief
                .iter()
                .enumerate()
                .map(|(i, p)| p * self.local_costs.get(i, a))
                .sum();
            if c < best_cost - tol {
                best = a;
                best_cost = c;
            }
        }
        best
    }

    /// Local action of an agent whose private observation is `y`.
    ///
    /// If `y` is impossible under `pi` the agent acts on `pi` itself; such
    /// branches carry zero weight in every filter.
    fn local_action_unchecked(&self, pi: &[f64], y: usize) -> usize {
        let eta: Vec<f64> = pi
            .iter()
            .enumerate()
            .map(|(i, p)| p * self.obs.get(i, y))
            .collect();
        let s: f64 = eta.iter().sum();
        if s > 0.0 {
            let eta: Vec<f64> = eta.iter().map(|e| e / s).collect();
            self.myopic_action(&eta)
        } else {
            self.myopic_action(pi)
        }
    }

    fn check(&self, pi: &BeliefState) -> Result<()> {
        if pi.dim() != self.states() {
            return Err(Error::Dimension {
                context: "belief vs social context",
                expected: self.states(),
                found: pi.dim(),
            });
        }
        Ok(())
    }
}

/// Myopic action `argmin_a c_a'η` of an agent with private belief
/// `η ∝ B_y π`. Ties go to the smaller action index.
pub fn social_local_action(pi: &BeliefState, y: usize, ctx: &SocialContext) -> Result<usize> {
    ctx.check(pi)?;
    check_index("observation", y, ctx.observations())?;
    let s: f64 = (0..pi.dim()).map(|i| pi[i] * ctx.obs.get(i, y)).sum();
    if s <= 0.0 {
        return Err(Error::ZeroProbability(format!("observation {y}")));
    }
    Ok(ctx.local_action_unchecked(pi.probs(), y))
}

/// `P(a | x = e_i, π)` for every state `i`.
pub fn social_action_likelihood(
    pi: &BeliefState,
    a: usize,
    ctx: &SocialContext,
) -> Result<Vec<f64>> {
    ctx.check(pi)?;
    check_index("action", a, ctx.actions())?;
    let mut out = vec![0.0; ctx.states()];
    for y in 0..ctx.observations() {
        if ctx.local_action_unchecked(pi.probs(), y) == a {
            for (i, o) in out.iter_mut().enumerate() {
                *o += ctx.obs.get(i, y);
            }
        }
    }
    Ok(out)
}

/// Public belief update after observing local action `a` (no state motion).
pub fn social_update(pi: &BeliefState, a: usize, ctx: &SocialContext) -> Result<FilterOutput> {
    let lik = social_action_likelihood(pi, a, ctx)?;
    let un: Vec<f64> = pi.probs().iter().zip(&lik).map(|(p, l)| p * l).collect();
    let norm: f64 = un.iter().sum();
    if norm <= 0.0 {
        return Err(Error::ZeroProbability(format!("local action {a}")));
    }
    Ok(FilterOutput {
        next: BeliefState::from_raw(un.into_iter().map(|u| u / norm).collect()),
        norm,
    })
}

/// Interval bounds `(η1, η2, η3)` on `π(2)` for two states, two actions and
/// two observations.
///
/// `η2` is where an agent is indifferent; `η1` and `η3` are the public
/// beliefs at which observation 1, respectively 2, moves the private belief
/// exactly to `η2`.
pub fn social_fixed_points(ctx: &SocialContext) -> Result<(f64, f64, f64)> {
    if ctx.states() != 2 || ctx.actions() != 2 || ctx.observations() != 2 {
        return Err(invalid(
            "social context",
            "interval bounds need 2 states, 2 actions and 2 observations",
        ));
    }
    let c = &ctx.local_costs;
    let b = &ctx.obs;
    let gap1 = c.get(0, 1) - c.get(0, 0);
    let gap2 = c.get(1, 0) - c.get(1, 1);
    if !(gap1 > 0.0 && gap2 > 0.0) {
        return Err(invalid(
            "local_costs",
            format!("cost dominance fails: gaps {gap1} and {gap2} must be positive"),
        ));
    }
    let eta1 = gap1 * b.get(0, 0) / (gap1 * b.get(0, 0) + gap2 * b.get(1, 0));
    let eta2 = gap1 / (gap1 + gap2);
    let eta3 = gap1 * b.get(0, 1) / (gap1 * b.get(0, 1) + gap2 * b.get(1, 1));
    if !(eta1.is_finite() && eta3.is_finite()) {
        return Err(invalid("social context", "degenerate interval bounds"));
    }
    Ok((eta1, eta2, eta3))
}

/// Interval label 1..=4 of `π(2)`: 1 is `(η1, 1]`, 2 is `(η2, η1]`,
/// 3 is `(η3, η2]`, 4 is `[0, η3]`.
pub fn social_interval(pi2: f64, bounds: (f64, f64, f64)) -> usize {
    let (e1, e2, e3) = bounds;
    if pi2 > e1 {
        1
    } else if pi2 > e2 {
        2
    } else if pi2 > e3 {
        3
    } else {
        4
    }
}
