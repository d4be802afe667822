use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::costs::CostEvaluator;
use super::grid::{Projection, SimplexGrid};
use super::scheduling::blackwell_degrade;
use crate::error::{invalid, Error, Result};
use crate::filters::{hmm_step, social_action_likelihood, SocialContext};
use crate::model::{risk_vectors, BeliefState, CostSpec, DetectionModel, Matrix, DEFAULT_GAUSSIAN_BINS};

/// Action 1 or 2. In the stopping families these are stop and continue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Stop,
    Continue,
}

impl Action {
    /// 1 for `Stop`, 2 for `Continue`.
    pub fn number(self) -> u8 {
        match self {
            Action::Stop => 1,
            Action::Continue => 2,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Action::Stop),
            2 => Some(Action::Continue),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// Maximum number of sweeps; required when the problem is undiscounted.
    pub horizon: Option<usize>,
    /// Stop once the sup-norm change of a sweep falls below this.
    pub tol: f64,
    pub projection: Projection,
    /// Sweep cap when no horizon is given.
    pub max_sweeps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            horizon: None,
            tol: 1e-8,
            projection: Projection::Nearest,
            max_sweeps: 10_000,
        }
    }
}

/// Value function and policy on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    /// Shifted value `V` per grid point.
    pub values: Vec<f64>,
    /// Unshifted value `V̄ = V + offset` per grid point.
    pub original: Vec<f64>,
    pub policy: Vec<Action>,
    pub q_stop: Vec<f64>,
    pub q_continue: Vec<f64>,
    pub sweeps: usize,
    pub sup_delta: f64,
    /// Sup-norm change of every sweep.
    pub deltas: Vec<f64>,
    pub projection: Projection,
}

impl GridSolution {
    pub fn stop_set(&self) -> Vec<usize> {
        (0..self.policy.len())
            .filter(|&i| self.policy[i] == Action::Stop)
            .collect()
    }
}

/// Tolerance under which the two Q-values count as tied.
pub fn tie_tol(q1: f64, q2: f64) -> f64 {
    1e-12 * (1.0 + q1.abs().max(q2.abs()))
}

// ---------------------------------------------------------------------------
// Successor beliefs
// ---------------------------------------------------------------------------

/// Belief transitions triggered by an action.
#[derive(Debug, Clone)]
pub(crate) enum Dynamics {
    Hmm { p: Matrix, b: Matrix },
    Risk { p: Matrix, b: Matrix, r2: Vec<f64> },
    Social { ctx: SocialContext },
}

impl Dynamics {
    /// Every positive-weight branch `(σ, next belief)`.
    pub(crate) fn successors(&self, pi: &[f64]) -> Vec<(f64, Vec<f64>)> {
        match self {
            Dynamics::Hmm { p, b } => hmm_branches(pi, p, b),
            Dynamics::Risk { p, b, r2 } => {
                let w: Vec<f64> = pi.iter().zip(r2).map(|(a, r)| a * r).collect();
                hmm_branches(&w, p, b)
            }
            Dynamics::Social { ctx } => {
                let belief = BeliefState::from_raw(pi.to_vec());
                (0..ctx.actions())
                    .filter_map(|a| {
                        let lik = social_action_likelihood(&belief, a, ctx).ok()?;
                        let un: Vec<f64> = pi.iter().zip(&lik).map(|(p, l)| p * l).collect();
                        let s: f64 = un.iter().sum();
                        (s > 0.0).then(|| (s, un.into_iter().map(|u| u / s).collect()))
                    })
                    .collect()
            }
        }
    }
}

fn hmm_branches(pi: &[f64], p: &Matrix, b: &Matrix) -> Vec<(f64, Vec<f64>)> {
    let mut out = Vec::with_capacity(b.cols());
    for y in 0..b.cols() {
        let mut next = vec![0.0; pi.len()];
        let s = hmm_step(pi, p, b, y, &mut next);
        if s > 0.0 {
            out.push((s, next));
        }
    }
    out
}

/// Dynamics of action 1 (`None` when it terminates) and of action 2.
pub(crate) fn dynamics(
    spec: &CostSpec,
    model: &DetectionModel,
) -> Result<(Option<Dynamics>, Dynamics)> {
    let p = model.transition.clone();
    let b = model.obs_matrix()?.clone();
    Ok(match spec {
        CostSpec::RiskSensitive { epsilon, beta, d } => {
            let (_, r2) = risk_vectors(*epsilon, *beta, *d, &p);
            (None, Dynamics::Risk { p, b, r2 })
        }
        CostSpec::SocialStopping { local_costs, .. } => (
            None,
            Dynamics::Social {
                ctx: SocialContext::new(local_costs.clone(), b)?,
            },
        ),
        CostSpec::Scheduling {
            confusion,
            coarse_observation,
            ..
        } => {
            let coarse = match coarse_observation {
                Some(m) => m.clone(),
                None => blackwell_degrade(&b, confusion)?,
            };
            if coarse.rows() != p.rows() {
                return Err(Error::Dimension {
                    context: "coarse observation rows",
                    expected: p.rows(),
                    found: coarse.rows(),
                });
            }
            (
                Some(Dynamics::Hmm {
                    p: p.clone(),
                    b: coarse,
                }),
                Dynamics::Hmm { p, b },
            )
        }
        _ => (None, Dynamics::Hmm { p, b }),
    })
}

type Kernel = Vec<Vec<(usize, f64)>>;

fn build_kernel(grid: &SimplexGrid, dynamics: &Dynamics, projection: Projection) -> Kernel {
    grid.points()
        .par_iter()
        .map(|pt| {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for (s, next) in dynamics.successors(pt.probs()) {
                for (j, w) in grid.project(&next, projection) {
                    row.push((j, s * w));
                }
            }
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (j, w) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += w,
                    _ => merged.push((j, w)),
                }
            }
            merged
        })
        .collect()
}

fn expect(row: &[(usize, f64)], v: &[f64]) -> f64 {
    row.iter().map(|(j, w)| w * v[*j]).sum()
}

/// Grid value iteration of the Bellman equation in shifted coordinates.
///
/// Successor beliefs are mapped back to the grid with `opts.projection`;
/// the successor kernels are built once since they do not depend on `V`.
/// Ties between the two actions go to action 1.
pub fn value_iterate(
    model: &DetectionModel,
    spec: &CostSpec,
    grid: &SimplexGrid,
    opts: &SolveOptions,
) -> Result<GridSolution> {
    let model = model.discretized(DEFAULT_GAUSSIAN_BINS)?;
    let x = model.states();
    if grid.dim() != x {
        return Err(Error::Dimension {
            context: "grid vs model",
            expected: x,
            found: grid.dim(),
        });
    }
    let eval = CostEvaluator::new(spec, &model)?;
    let rho = spec.rho();
    if rho >= 1.0 && opts.horizon.is_none() {
        return Err(invalid("horizon", "an undiscounted problem needs a finite horizon"));
    }
    let (first, second) = dynamics(spec, &model)?;
    let k_first = first.map(|d| build_kernel(grid, &d, opts.projection));
    let k_second = build_kernel(grid, &second, opts.projection);
    let costs: Vec<(f64, f64)> = grid.points().iter().map(|p| eval.costs(p.probs())).collect();

    let mut v: Vec<f64> = grid
        .points()
        .iter()
        .map(|p| eval.initial_value(p.probs()))
        .collect();
    let n = grid.len();
    let limit = opts.horizon.unwrap_or(opts.max_sweeps);
    let mut q1 = vec![0.0; n];
    let mut q2 = vec![0.0; n];
    let mut deltas = Vec::new();
    let mut sup_delta = f64::INFINITY;
    let mut sweeps = 0;
    while sweeps < limit {
        let next: Vec<(f64, f64)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let (c1, c2) = costs[i];
                let a = match &k_first {
                    Some(k) => c1 + rho * expect(&k[i], &v),
                    None => c1,
                };
                (a, c2 + rho * expect(&k_second[i], &v))
            })
            .collect();
        sup_delta = 0.0;
        for (i, (a, b)) in next.into_iter().enumerate() {
            q1[i] = a;
            q2[i] = b;
            let nv = a.min(b);
            sup_delta = f64::max(sup_delta, (nv - v[i]).abs());
            v[i] = nv;
        }
        if !sup_delta.is_finite() {
            return Err(Error::NonFiniteCost {
                iteration: sweeps,
                value: sup_delta,
            });
        }
        deltas.push(sup_delta);
        sweeps += 1;
        if sup_delta < opts.tol {
            break;
        }
    }
    let policy = (0..n)
        .map(|i| {
            if q1[i] <= q2[i] + tie_tol(q1[i], q2[i]) {
                Action::Stop
            } else {
                Action::Continue
            }
        })
        .collect();
    let original = grid
        .points()
        .iter()
        .zip(&v)
        .map(|(p, vi)| vi + eval.offset(p.probs()))
        .collect();
    Ok(GridSolution {
        values: v,
        original,
        policy,
        q_stop: q1,
        q_continue: q2,
        sweeps,
        sup_delta,
        deltas,
        projection: opts.projection,
    })
}
