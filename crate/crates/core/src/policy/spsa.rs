use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{phi_to_theta, LinearThresholdPolicy};
use crate::dp::{dynamics, Action, CostEvaluator, Dynamics};
use crate::error::{invalid, Error, Result};
use crate::model::{dirichlet_uniform_sample, BeliefState, CostSpec, DetectionModel};
use crate::sim::{stream_rng, Simulator};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SampleCostOptions {
    pub trajectories_per_prior: usize,
    /// Step cap for undiscounted runs.
    pub horizon: usize,
    /// Discounted runs stop once `ρ^k` times the cost bound drops below this.
    pub truncation: f64,
}

impl Default for SampleCostOptions {
    fn default() -> Self {
        Self {
            trajectories_per_prior: 1,
            horizon: 500,
            truncation: 1e-8,
        }
    }
}

/// Simulator and shifted stage costs of one stopping problem.
#[derive(Debug, Clone)]
pub struct CostSampler {
    sim: Simulator,
    costs: CostEvaluator,
    rho: f64,
    steps: usize,
    per_prior: usize,
}

impl CostSampler {
    pub fn new(model: &DetectionModel, spec: &CostSpec, opts: &SampleCostOptions) -> Result<Self> {
        if !spec.is_stopping() {
            return Err(spec.mismatch("sampled stopping costs"));
        }
        let (_, cont) = dynamics(spec, model)?;
        if !matches!(cont, Dynamics::Hmm { .. }) || matches!(spec, CostSpec::RiskSensitive { .. }) {
            return Err(spec.mismatch("sampled stopping costs"));
        }
        if opts.trajectories_per_prior == 0 {
            return Err(invalid("trajectories_per_prior", "must be at least 1"));
        }
        let costs = CostEvaluator::new(spec, model)?;
        let rho = spec.rho();
        let steps = if rho < 1.0 {
            let bound = costs.cost_bound().max(f64::MIN_POSITIVE);
            let mut k = 1usize;
            let mut w = rho;
            while w * bound >= opts.truncation && k < 100_000 {
                w *= rho;
                k += 1;
            }
            k
        } else {
            opts.horizon.max(1)
        };
        Ok(Self {
            sim: Simulator::new(model)?,
            costs,
            rho,
            steps,
            per_prior: opts.trajectories_per_prior,
        })
    }

    /// Step cap applied to every path.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Discounted shifted cost of one path from `prior`.
    ///
    /// A path still running after the step cap pays the value-iteration
    /// starting value at its next belief, so a capped undiscounted run
    /// estimates the same finite-horizon objective as value iteration with
    /// that many sweeps.
    pub fn path_cost<R, F>(&self, prior: &BeliefState, policy: &F, rng: &mut R) -> Result<f64>
    where
        R: Rng + ?Sized,
        F: Fn(&[f64]) -> Action + ?Sized,
    {
        let mut x = self.sim.draw_initial(Some(prior), rng)?;
        let mut pi = prior.clone();
        let mut w = 1.0;
        let mut total = 0.0;
        for k in 1..=self.steps {
            let (c1, c2) = self.costs.costs(pi.probs());
            if policy(pi.probs()) == Action::Stop {
                total += w * c1;
                break;
            }
            total += w * c2;
            w *= self.rho;
            x = self.sim.draw_next(x, rng);
            let y = self.sim.draw_observation(x, rng);
            pi = self.sim.update(&pi, y)?;
            if k == self.steps {
                total += w * self.costs.initial_value(pi.probs());
            }
        }
        Ok(total)
    }

    /// Mean path cost over `priors`; path `j` of prior `l` uses stream
    /// `l * per_prior + j` of `seed`.
    pub fn mean_cost<F>(&self, policy: &F, priors: &[BeliefState], seed: u64) -> Result<f64>
    where
        F: Fn(&[f64]) -> Action + Sync + ?Sized,
    {
        if priors.is_empty() {
            return Err(invalid("priors", "need at least one prior"));
        }
        let n = self.per_prior;
        let costs: Vec<f64> = (0..priors.len() * n)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream_rng(seed, i as u64);
                self.path_cost(&priors[i / n], policy, &mut rng)
            })
            .collect::<Result<_>>()?;
        Ok(costs.iter().sum::<f64>() / costs.len() as f64)
    }
}

/// Sample-path cost of a threshold policy averaged over `priors`.
///
/// Costs are the shifted stage costs the dynamic program uses, so the result
/// estimates the grid value averaged over the priors.
pub fn sample_cost(
    policy: &LinearThresholdPolicy,
    model: &DetectionModel,
    spec: &CostSpec,
    priors: &[BeliefState],
    opts: &SampleCostOptions,
    seed: u64,
) -> Result<f64> {
    if policy.states() != model.states() {
        return Err(Error::Dimension {
            context: "threshold policy vs model",
            expected: model.states(),
            found: policy.states(),
        });
    }
    let sampler = CostSampler::new(model, spec, opts)?;
    sampler.mean_cost(&|pi: &[f64]| policy.decide_unchecked(pi), priors, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpsaParams {
    pub iterations: usize,
    /// Perturbation decay exponent.
    pub gamma: f64,
    /// Step decay exponent.
    pub zeta: f64,
    /// Perturbation size.
    pub delta: f64,
    /// Step size.
    pub epsilon: f64,
    /// Step offset.
    pub s: f64,
    /// Priors per cost evaluation.
    pub priors: usize,
    pub restarts: usize,
    pub cost: SampleCostOptions,
}

impl Default for SpsaParams {
    fn default() -> Self {
        Self {
            iterations: 1000,
            gamma: 0.602,
            zeta: 0.602,
            delta: 0.05,
            epsilon: 0.1,
            s: 10.0,
            priors: 100,
            restarts: 5,
            cost: SampleCostOptions::default(),
        }
    }
}

impl SpsaParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.5..=1.0).contains(&self.gamma) {
            return Err(invalid("gamma", format!("must lie in [0.5, 1], got {}", self.gamma)));
        }
        if !(self.zeta > 0.5 && self.zeta <= 1.0) {
            return Err(invalid("zeta", format!("must lie in (0.5, 1], got {}", self.zeta)));
        }
        for (name, v) in [("delta", self.delta), ("epsilon", self.epsilon), ("s", self.s)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if self.priors == 0 {
            return Err(invalid("priors", "must be at least 1"));
        }
        if self.restarts == 0 {
            return Err(invalid("restarts", "must be at least 1"));
        }
        Ok(())
    }

    fn step(&self, n: usize) -> f64 {
        self.epsilon / (n as f64 + 1.0 + self.s).powf(self.zeta)
    }

    fn perturbation(&self, n: usize) -> f64 {
        self.delta / (n as f64 + 1.0).powf(self.gamma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpsaIterate {
    pub iteration: usize,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    /// Mean of the two perturbed costs.
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpsaRun {
    pub trace: Vec<SpsaIterate>,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
}

/// Simultaneous-perturbation descent on `objective(φ, seed)`.
///
/// Both perturbed evaluations of an iteration share a seed, so the
/// difference is taken under common random numbers.
pub fn spsa_optimize<F>(mut objective: F, init_phi: &[f64], params: &SpsaParams, seed: u64) -> Result<SpsaRun>
where
    F: FnMut(&[f64], u64) -> Result<f64>,
{
    params.validate()?;
    let mut phi = init_phi.to_vec();
    let mut trace = Vec::with_capacity(params.iterations);
    for n in 0..params.iterations {
        let mut rng = stream_rng(seed, n as u64);
        let dir: Vec<f64> = (0..phi.len())
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let eval_seed: u64 = rng.random();
        let h = params.perturbation(n);
        let plus: Vec<f64> = phi.iter().zip(&dir).map(|(p, d)| p + h * d).collect();
        let minus: Vec<f64> = phi.iter().zip(&dir).map(|(p, d)| p - h * d).collect();
        let jp = objective(&plus, eval_seed)?;
        let jm = objective(&minus, eval_seed)?;
        for v in [jp, jm] {
            if !v.is_finite() {
                return Err(Error::NonFiniteCost { iteration: n, value: v });
            }
        }
        let scale = params.step(n) * (jp - jm) / (2.0 * h);
        for (p, d) in phi.iter_mut().zip(&dir) {
            *p -= scale * d;
        }
        trace.push(SpsaIterate {
            iteration: n + 1,
            phi: phi.clone(),
            theta: phi_to_theta(&phi),
            cost: 0.5 * (jp + jm),
        });
    }
    Ok(SpsaRun {
        theta: phi_to_theta(&phi),
        phi,
        trace,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSearch {
    pub runs: Vec<SpsaRun>,
    pub init_phis: Vec<Vec<f64>>,
    /// Cost of each run's final policy on the shared evaluation priors.
    pub evaluation_costs: Vec<f64>,
    pub best: usize,
    pub policy: LinearThresholdPolicy,
}

fn uniform_priors(x: usize, count: usize, seed: u64) -> Vec<BeliefState> {
    let mut rng = stream_rng(seed, u64::MAX);
    (0..count).map(|_| dirichlet_uniform_sample(x, &mut rng)).collect()
}

/// Threshold policy from several SPSA restarts, each drawing fresh uniform
/// priors every iteration; the restart with the lowest cost on a common
/// evaluation set wins.
pub fn optimize_threshold(
    model: &DetectionModel,
    spec: &CostSpec,
    params: &SpsaParams,
    seed: u64,
) -> Result<ThresholdSearch> {
    params.validate()?;
    let x = model.states();
    let sampler = CostSampler::new(model, spec, &params.cost)?;
    let objective = |phi: &[f64], s: u64| {
        let policy = LinearThresholdPolicy::from_phi(phi)?;
        let priors = uniform_priors(x, params.priors, s);
        sampler.mean_cost(&|pi: &[f64]| policy.decide_unchecked(pi), &priors, s)
    };
    let mut init_rng = stream_rng(seed, 0);
    let mut runs = Vec::with_capacity(params.restarts);
    let mut init_phis = Vec::with_capacity(params.restarts);
    for r in 0..params.restarts {
        let init: Vec<f64> = (0..x - 1).map(|_| init_rng.random_range(-2.0..2.0)).collect();
        runs.push(spsa_optimize(objective, &init, params, seed.wrapping_add(r as u64 + 1))?);
        init_phis.push(init);
    }
    let eval_seed = seed ^ 0x9e37_79b9_7f4a_7c15;
    let evaluation_costs = runs
        .iter()
        .map(|run| objective(&run.phi, eval_seed))
        .collect::<Result<Vec<f64>>>()?;
    let best = (0..runs.len())
        .min_by(|&a, &b| evaluation_costs[a].total_cmp(&evaluation_costs[b]))
        .unwrap_or(0);
    let policy = LinearThresholdPolicy::new(runs[best].theta.clone())?;
    Ok(ThresholdSearch {
        runs,
        init_phis,
        evaluation_costs,
        best,
        policy,
    })
}
