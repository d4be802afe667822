//! Monte Carlo simulation of the hidden chain, its observations and the
//! belief filter under a stopping policy.
//!
//! Steps are numbered from 1. The state at step 1 is drawn from the prior
//! and the decision at step 1 is made on the prior itself; every later step
//! first moves the chain, then draws an observation and updates the belief.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dp::Action;
use crate::error::{invalid, Error, Result};
use crate::filters::{hmm_step, social_local_action, social_update, SocialContext};
use crate::model::{BeliefState, DetectionModel, Matrix, DEFAULT_GAUSSIAN_BINS};

pub const DEFAULT_MAX_STEPS: usize = 10_000;
pub const DEFAULT_SOCIAL_MAX_STEPS: usize = 1_000;

/// Independent generator number `index` of the family seeded by `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One simulated run. Entry `k - 1` of every per-step vector is step `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<usize>,
    /// `None` at step 1, which carries no observation.
    pub observations: Vec<Option<usize>>,
    pub beliefs: Vec<BeliefState>,
    pub actions: Vec<Action>,
    /// Local agent actions in social runs; empty otherwise.
    pub local_actions: Vec<usize>,
    /// Step at which the policy stopped.
    pub tau: Option<usize>,
    /// First step spent in state 1, if reached within the run.
    pub tau0: Option<usize>,
    /// The run hit `max_steps` without stopping.
    pub censored: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

fn weighted(row: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(row.iter().copied())
        .map_err(|e| Error::InvalidMatrix(format!("cannot sample from row {row:?}: {e}")))
}

/// Samplers for the chain and the observations of one model.
#[derive(Debug, Clone)]
pub struct Simulator {
    p: Matrix,
    b: Matrix,
    initial: BeliefState,
    prior_draw: WeightedIndex<f64>,
    moves: Vec<WeightedIndex<f64>>,
    emissions: Vec<WeightedIndex<f64>>,
}

impl Simulator {
    /// Gaussian observation laws are discretized first.
    pub fn new(model: &DetectionModel) -> Result<Self> {
        let model = model.discretized(DEFAULT_GAUSSIAN_BINS)?;
        let p = model.transition.clone();
        let b = model.obs_matrix()?.clone();
        if b.rows() != p.rows() {
            return Err(Error::Dimension {
                context: "observation rows vs states",
                expected: p.rows(),
                found: b.rows(),
            });
        }
        let moves = (0..p.rows()).map(|i| weighted(p.row(i))).collect::<Result<_>>()?;
        let emissions = (0..b.rows()).map(|i| weighted(b.row(i))).collect::<Result<_>>()?;
        Ok(Self {
            prior_draw: weighted(model.initial.probs())?,
            initial: model.initial,
            p,
            b,
            moves,
            emissions,
        })
    }

    pub fn transition(&self) -> &Matrix {
        &self.p
    }

    pub fn observation(&self) -> &Matrix {
        &self.b
    }

    pub fn draw_initial<R: Rng + ?Sized>(&self, prior: Option<&BeliefState>, rng: &mut R) -> Result<usize> {
        match prior {
            None => Ok(self.prior_draw.sample(rng)),
            Some(pi) => Ok(weighted(pi.probs())?.sample(rng)),
        }
    }

    pub fn draw_next<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        self.moves[x].sample(rng)
    }

    pub fn draw_observation<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> usize {
        self.emissions[x].sample(rng)
    }

    /// Filter update `T(π, y)`.
    pub fn update(&self, pi: &BeliefState, y: usize) -> Result<BeliefState> {
        let mut next = vec![0.0; pi.dim()];
        let sigma = hmm_step(pi.probs(), &self.p, &self.b, y, &mut next);
        if sigma <= 0.0 {
            return Err(Error::ZeroProbability(format!("observation {y}")));
        }
        Ok(BeliefState::from_raw(next))
    }

    /// Run from `prior` (the model's prior if `None`) until the policy stops
    /// or `max_steps` steps have been taken.
    pub fn run<R, F>(
        &self,
        prior: Option<&BeliefState>,
        mut policy: F,
        max_steps: usize,
        rng: &mut R,
    ) -> Result<Trajectory>
    where
        R: Rng + ?Sized,
        F: FnMut(&BeliefState) -> Action,
    {
        if max_steps == 0 {
            return Err(invalid("max_steps", "must be at least 1"));
        }
        let start = prior.unwrap_or(&self.initial).clone();
        if start.dim() != self.p.rows() {
            return Err(Error::Dimension {
                context: "prior vs model",
                expected: self.p.rows(),
                found: start.dim(),
            });
        }
        let mut x = self.draw_initial(Some(&start), rng)?;
        let mut t = Trajectory {
            states: vec![x],
            observations: vec![None],
            beliefs: vec![start],
            actions: Vec::new(),
            local_actions: Vec::new(),
            tau: None,
            tau0: (x == 0).then_some(1),
            censored: false,
        };
        loop {
            let k = t.states.len();
            let u = policy(&t.beliefs[k - 1]);
            t.actions.push(u);
            if u == Action::Stop {
                t.tau = Some(k);
                break;
            }
            if k == max_steps {
                t.censored = true;
                break;
            }
            x = self.draw_next(x, rng);
            let y = self.draw_observation(x, rng);
            let next = self.update(&t.beliefs[k - 1], y)?;
            t.states.push(x);
            t.observations.push(Some(y));
            t.beliefs.push(next);
            if x == 0 && t.tau0.is_none() {
                t.tau0 = Some(k + 1);
            }
        }
        Ok(t)
    }

    /// Absorption time counted from 0: the first `k >= 0` with `x_k = 1`
    /// when `x_0` is drawn from the prior. `None` if not absorbed by `max`.
    pub fn absorption_time<R: Rng + ?Sized>(&self, max: usize, rng: &mut R) -> Option<usize> {
        let mut x = self.prior_draw.sample(rng);
        for k in 0..=max {
            if x == 0 {
                return Some(k);
            }
            x = self.draw_next(x, rng);
        }
        None
    }
}

/// Single run of `model` from its prior under `policy`.
pub fn sample_trajectory<R, F>(
    model: &DetectionModel,
    policy: F,
    max_steps: usize,
    rng: &mut R,
) -> Result<Trajectory>
where
    R: Rng + ?Sized,
    F: FnMut(&BeliefState) -> Action,
{
    Simulator::new(model)?.run(None, policy, max_steps, rng)
}

/// Absorption time from time 0, as in [`Simulator::absorption_time`].
pub fn sample_absorption_time<R: Rng + ?Sized>(
    model: &DetectionModel,
    max: usize,
    rng: &mut R,
) -> Result<Option<usize>> {
    Ok(Simulator::new(model)?.absorption_time(max, rng))
}

/// Empirical Kolmogorov-Shiryayev criterion `d E(τ-τ0)^+ + β P(τ<τ0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiryayevSummary {
    pub trajectories: usize,
    pub censored: usize,
    pub delay: f64,
    pub false_alarm: f64,
    pub criterion: f64,
    pub delay_se: f64,
    pub false_alarm_se: f64,
    pub criterion_se: f64,
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (m, 0.0);
    }
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Censored runs count as stopping at their last step.
pub fn shiryayev_decompose(trajectories: &[Trajectory], d: f64, beta: f64) -> Result<ShiryayevSummary> {
    if trajectories.is_empty() {
        return Err(invalid("trajectories", "empty input"));
    }
    let mut delays = Vec::with_capacity(trajectories.len());
    let mut alarms = Vec::with_capacity(trajectories.len());
    let mut crit = Vec::with_capacity(trajectories.len());
    for t in trajectories {
        let tau = t.tau.unwrap_or(t.len());
        let (delay, alarm) = match t.tau0 {
            Some(t0) if t0 <= tau => ((tau - t0) as f64, 0.0),
            _ if t.censored => (0.0, 0.0),
            _ => (0.0, 1.0),
        };
        delays.push(delay);
        alarms.push(alarm);
        crit.push(d * delay + beta * alarm);
    }
    let (delay, delay_se) = mean_se(&delays);
    let (false_alarm, false_alarm_se) = mean_se(&alarms);
    let (criterion, criterion_se) = mean_se(&crit);
    Ok(ShiryayevSummary {
        trajectories: trajectories.len(),
        censored: trajectories.iter().filter(|t| t.censored).count(),
        delay,
        false_alarm,
        criterion,
        delay_se,
        false_alarm_se,
        criterion_se,
    })
}

/// Agents act in sequence on a fixed state `true_state`; the global
/// `policy` sees the public belief before each agent.
pub fn social_trajectory<R, F>(
    ctx: &SocialContext,
    initial: &BeliefState,
    mut policy: F,
    true_state: usize,
    max_steps: usize,
    rng: &mut R,
) -> Result<Trajectory>
where
    R: Rng + ?Sized,
    F: FnMut(&BeliefState) -> Action,
{
    if true_state >= ctx.states() {
        return Err(invalid("true_state", format!("{true_state} out of range")));
    }
    if max_steps == 0 {
        return Err(invalid("max_steps", "must be at least 1"));
    }
    let emit = weighted(ctx.obs.row(true_state))?;
    let mut t = Trajectory {
        states: vec![true_state],
        observations: vec![None],
        beliefs: vec![initial.clone()],
        actions: Vec::new(),
        local_actions: Vec::new(),
        tau: None,
        tau0: (true_state == 0).then_some(1),
        censored: false,
    };
    loop {
        let k = t.states.len();
        let u = policy(&t.beliefs[k - 1]);
        t.actions.push(u);
        if u == Action::Stop {
            t.tau = Some(k);
            break;
        }
        if k == max_steps {
            t.censored = true;
            break;
        }
        let y = emit.sample(rng);
        let a = social_local_action(&t.beliefs[k - 1], y, ctx)?;
        let next = social_update(&t.beliefs[k - 1], a, ctx)?.next;
        t.states.push(true_state);
        t.observations.push(Some(y));
        t.local_actions.push(a);
        t.beliefs.push(next);
    }
    Ok(t)
}
