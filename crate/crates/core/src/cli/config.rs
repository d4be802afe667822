use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dp::{Projection, SolveOptions};
use crate::error::{Error, Result};
use crate::model::{CostSpec, DetectionModel, Matrix, ModelFamily, DEFAULT_GAUSSIAN_BINS};
use crate::policy::SpsaParams;

fn default_bins() -> usize {
    DEFAULT_GAUSSIAN_BINS
}

fn default_resolution() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            resolution: default_resolution(),
        }
    }
}

/// Where `simulate` takes its policy from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicySource {
    /// Solve the grid problem first and use its policy.
    Grid,
    /// Linear threshold coefficients.
    Theta(Vec<f64>),
    /// A `solution.csv` written by `solve`.
    SolutionFile(PathBuf),
}

fn default_max_steps() -> usize {
    crate::sim::DEFAULT_MAX_STEPS
}

fn default_export() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub trajectories: usize,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    pub policy: PolicySource,
    /// How many trajectories are written out step by step.
    #[serde(default = "default_export")]
    pub export: usize,
    /// Fixed state for social runs (zero-based).
    #[serde(default)]
    pub true_state: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    pub parameter: f64,
    pub transition: Matrix,
}

fn default_sweep_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub points: Vec<SweepPoint>,
    #[serde(default = "default_sweep_tol")]
    pub tolerance: f64,
}

fn default_k_max() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhdistConfig {
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// Monte Carlo absorption samples; 0 skips the comparison.
    #[serde(default)]
    pub samples: usize,
}

impl Default for PhdistConfig {
    fn default() -> Self {
        Self {
            k_max: default_k_max(),
            samples: 0,
        }
    }
}

/// One experiment: a model, a cost family and settings per command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub model: Option<DetectionModel>,
    /// Model in its own JSON file, relative to the config file.
    #[serde(default)]
    pub model_file: Option<PathBuf>,
    /// Structural checks applied to the model; chosen from the cost family
    /// when absent.
    #[serde(default)]
    pub model_family: Option<ModelFamily>,
    #[serde(default = "default_bins")]
    pub observation_bins: usize,
    pub cost: CostSpec,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolveOptions,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub spsa: SpsaParams,
    #[serde(default)]
    pub simulate: Option<SimulateConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub phdist: PhdistConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &base)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn family(&self) -> ModelFamily {
        self.model_family.unwrap_or(match self.cost {
            CostSpec::QuickestPredictiveDelay { .. }
            | CostSpec::QuickestClassicalDelay { .. }
            | CostSpec::RiskSensitive { .. } => ModelFamily::Absorbing,
            CostSpec::Transient { .. } => ModelFamily::AbsorbingRelaxed,
            _ => ModelFamily::General,
        })
    }

    /// The validated model with Gaussian observations discretized.
    pub fn model(&self) -> Result<DetectionModel> {
        let model = match (&self.model, &self.model_file) {
            (Some(m), None) => m.clone(),
            (None, Some(f)) => {
                let path = self.resolve(f);
                let text = fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| {
                    Error::Config(format!(
                        "{}: line {}, column {}: {e}",
                        path.display(),
                        e.line(),
                        e.column()
                    ))
                })?
            }
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either `model` or `model_file`, not both".into()))
            }
            (None, None) => return Err(Error::Config("missing `model` or `model_file`".into())),
        };
        let model = model.discretized(self.observation_bins)?.validated(self.family())?;
        self.cost.validate(model.states())?;
        Ok(model)
    }

    pub fn solve_options(&self) -> SolveOptions {
        let mut opts = self.solver;
        if opts.horizon.is_none() && self.cost.rho() >= 1.0 {
            opts.horizon = Some(200);
        }
        opts
    }

    pub fn projection(&self) -> Projection {
        self.solver.projection
    }
}
