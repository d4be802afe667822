use std::fmt;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::{BeliefState, Matrix};
use crate::error::{invalid, Error, Result};

/// Default number of bins when a Gaussian observation model is discretized.
pub const DEFAULT_GAUSSIAN_BINS: usize = 101;

const ROW_TOL: f64 = 1e-12;
const POWER_TOL: f64 = 1e-10;
const LEAK_TOL: f64 = 1e-9;
const POWER_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianObservation {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

/// Per-state observation law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationModel {
    Discrete(Matrix),
    Gaussian(GaussianObservation),
}

/// Hidden chain, prior and observation law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionModel {
    pub transition: Matrix,
    pub initial: BeliefState,
    pub observation: ObservationModel,
}

/// Which structural constraints [`validate_model`] enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    /// Row 1 absorbing, no mass on state 1 at time 0, transient block with
    /// spectral radius below one.
    #[default]
    Absorbing,
    /// As `Absorbing` but the prior may put mass on state 1.
    AbsorbingRelaxed,
    /// Only stochasticity is checked.
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape(String),
    TransitionRow { row: usize, sum: f64 },
    NegativeTransition { row: usize, col: usize },
    NotAbsorbing,
    InitialMass(f64),
    NotTransient { radius: f64 },
    ObservationRow { row: usize, sum: f64 },
    NegativeObservation { row: usize, col: usize },
    NonPositiveVariance { state: usize, variance: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape(s) => write!(f, "{s}"),
            Violation::TransitionRow { row, sum } => {
                write!(f, "transition row {row} sums to {sum}")
            }
            Violation::NegativeTransition { row, col } => {
                write!(f, "transition entry ({row}, {col}) is negative")
            }
            Violation::NotAbsorbing => write!(f, "row 1 not absorbing"),
            Violation::InitialMass(m) => write!(f, "initial belief puts mass {m} on state 1"),
            Violation::NotTransient { radius } => write!(
                f,
                "state 2 not transient: spectral radius of the pre-change block is {radius}"
            ),
            Violation::ObservationRow { row, sum } => {
                write!(f, "observation row {row} sums to {sum}")
            }
            Violation::NegativeObservation { row, col } => {
                write!(f, "observation entry ({row}, {col}) is negative")
            }
            Violation::NonPositiveVariance { state, variance } => {
                write!(f, "state {state} has non-positive variance {variance}")
            }
        }
    }
}

impl DetectionModel {
    pub fn new(transition: Matrix, initial: BeliefState, observation: ObservationModel) -> Self {
        Self {
            transition,
            initial,
            observation,
        }
    }

    pub fn states(&self) -> usize {
        self.transition.rows()
    }

    /// Discrete observation matrix; errors for Gaussian models.
    pub fn obs_matrix(&self) -> Result<&Matrix> {
        match &self.observation {
            ObservationModel::Discrete(b) => Ok(b),
            ObservationModel::Gaussian(_) => Err(invalid(
                "observation",
                "Gaussian observations must be discretized first",
            )),
        }
    }

    /// Copy of the model with Gaussian observations replaced by `bins` bins.
    pub fn discretized(&self, bins: usize) -> Result<DetectionModel> {
        let observation = match &self.observation {
            ObservationModel::Discrete(b) => ObservationModel::Discrete(b.clone()),
            ObservationModel::Gaussian(g) => {
                ObservationModel::Discrete(discretize_gaussian(g, bins)?)
            }
        };
        Ok(DetectionModel {
            observation,
            ..self.clone()
        })
    }

    pub fn with_transition(&self, transition: Matrix) -> DetectionModel {
        DetectionModel {
            transition,
            ..self.clone()
        }
    }

    /// Validates and returns the model, or every violation as an error.
    pub fn validated(self, family: ModelFamily) -> Result<Self> {
        let v = validate_model(&self, family);
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidModel(v.iter().map(|x| x.to_string()).collect()))
        }
    }
}

/// Lists every violated structural invariant. Empty means valid.
pub fn validate_model(model: &DetectionModel, family: ModelFamily) -> Vec<Violation> {
    let mut out = Vec::new();
    let p = &model.transition;
    let x = p.rows();
    if p.cols() != x {
        out.push(Violation::Shape(format!(
            "transition is {}x{}, expected square",
            x,
            p.cols()
        )));
        return out;
    }
    if model.initial.dim() != x {
        out.push(Violation::Shape(format!(
            "initial belief has {} entries, expected {x}",
            model.initial.dim()
        )));
    }
    for i in 0..x {
        for j in 0..x {
            if p.get(i, j) < 0.0 {
                out.push(Violation::NegativeTransition { row: i + 1, col: j + 1 });
            }
        }
        let s: f64 = p.row(i).iter().sum();
        if (s - 1.0).abs() > ROW_TOL {
            out.push(Violation::TransitionRow { row: i + 1, sum: s });
        }
    }
    match &model.observation {
        ObservationModel::Discrete(b) => {
            if b.rows() != x {
                out.push(Violation::Shape(format!(
                    "observation matrix has {} rows, expected {x}",
                    b.rows()
                )));
            }
            for i in 0..b.rows() {
                for j in 0..b.cols() {
                    if b.get(i, j) < 0.0 {
                        out.push(Violation::NegativeObservation { row: i + 1, col: j + 1 });
                    }
                }
                let s: f64 = b.row(i).iter().sum();
                if (s - 1.0).abs() > ROW_TOL {
                    out.push(Violation::ObservationRow { row: i + 1, sum: s });
                }
            }
        }
        ObservationModel::Gaussian(g) => {
            if g.means.len() != x || g.variances.len() != x {
                out.push(Violation::Shape(format!(
                    "Gaussian observation needs {x} means and variances"
                )));
            }
            for (i, &v) in g.variances.iter().enumerate() {
                if v.is_nan() || v <= 0.0 {
                    out.push(Violation::NonPositiveVariance {
                        state: i + 1,
                        variance: v,
                    });
                }
            }
        }
    }
    if family == ModelFamily::General || x < 2 {
        return out;
    }
    if p.get(0, 0) != 1.0 || (1..x).any(|j| p.get(0, j) != 0.0) {
        out.push(Violation::NotAbsorbing);
    }
    if family == ModelFamily::Absorbing && model.initial.dim() == x && model.initial[0] != 0.0 {
        out.push(Violation::InitialMass(model.initial[0]));
    }
    if !transient_block_leaks(p) {
        out.push(Violation::NotTransient {
            radius: transient_spectral_radius(p),
        });
    }
    out
}

/// Whether every state in 2..X reaches state 1 with positive probability.
///
/// For a substochastic block `M` of size `n`, this holds iff every row sum
/// of `M^n` is below one, which is equivalent to a spectral radius below one.
fn transient_block_leaks(p: &Matrix) -> bool {
    let n = p.rows() - 1;
    let mut mass = vec![1.0; n];
    for _ in 0..n {
        mass = (0..n)
            .map(|i| (0..n).map(|j| p.get(i + 1, j + 1) * mass[j]).sum())
            .collect();
    }
    mass.iter().all(|&m| m < 1.0 - LEAK_TOL)
}

/// Spectral radius of the block of `p` on states 2..X.
pub fn transient_spectral_radius(p: &Matrix) -> f64 {
    let x = p.rows();
    let block: Vec<Vec<f64>> = (1..x).map(|i| p.row(i)[1..].to_vec()).collect();
    spectral_radius(&block)
}

/// Perron root of a non-negative square matrix by power iteration.
///
/// Iterates on `M + I`, which has the same Perron vector and is aperiodic,
/// then subtracts the shift.
pub fn spectral_radius(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 0.0;
    }
    let mut v = vec![1.0 / n as f64; n];
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let mut w: Vec<f64> = (0..n)
            .map(|i| v[i] + m[i].iter().zip(&v).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let norm: f64 = w.iter().sum();
        if norm <= 0.0 {
            return 0.0;
        }
        w.iter_mut().for_each(|x| *x /= norm);
        let done = (norm - lambda).abs() < POWER_TOL;
        lambda = norm;
        v = w;
        if done {
            break;
        }
    }
    lambda - 1.0
}

/// Bins a per-state Gaussian law onto a shared uniform grid.
///
/// The grid spans six largest standard deviations beyond the extreme means.
/// Each entry is density at the bin center times bin width; rows are then
/// renormalized.
pub fn discretize_gaussian(obs: &GaussianObservation, bins: usize) -> Result<Matrix> {
    if bins < 3 {
        return Err(invalid("bins", format!("need at least 3, got {bins}")));
    }
    let x = obs.means.len();
    if obs.variances.len() != x || x == 0 {
        return Err(Error::Dimension {
            context: "Gaussian variances",
            expected: x,
            found: obs.variances.len(),
        });
    }
    if let Some(v) = obs.variances.iter().find(|v| v.is_nan() || **v <= 0.0) {
        return Err(invalid("variances", format!("non-positive variance {v}")));
    }
    let sd_max = obs.variances.iter().cloned().fold(0.0, f64::max).sqrt();
    let lo = obs.means.iter().cloned().fold(f64::INFINITY, f64::min) - 6.0 * sd_max;
    let hi = obs.means.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 6.0 * sd_max;
    let width = (hi - lo) / bins as f64;
    let mut m = Matrix::zeros(x, bins);
    for i in 0..x {
        let (mu, var) = (obs.means[i], obs.variances[i]);
        let norm = (2.0 * std::f64::consts::PI * var).sqrt();
        let mut total = 0.0;
        for k in 0..bins {
            let c = lo + (k as f64 + 0.5) * width;
            let v = (-(c - mu) * (c - mu) / (2.0 * var)).exp() / norm * width;
            m.set(i, k, v);
            total += v;
        }
        for k in 0..bins {
            m.set(i, k, m.get(i, k) / total);
        }
    }
    Ok(m)
}

/// Uniform draw from the simplex via normalized unit exponentials.
pub fn dirichlet_uniform_sample<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> BeliefState {
    assert!(dim >= 2, "simplex needs at least 2 states");
    let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let s: f64 = v.iter().sum();
    BeliefState::from_raw(v.into_iter().map(|x| x / s).collect())
}
