//! Domain types: beliefs, matrices, detection models, cost families and the
//! phase-type law of the change time.

mod belief;
mod cost;
mod detection;
mod matrix;
mod phase_type;

pub use belief::{BeliefState, MASS_TOL};
pub use cost::{complement_of_first, risk_vectors, CostSpec};
pub use detection::{
    dirichlet_uniform_sample, discretize_gaussian, spectral_radius, transient_spectral_radius,
    validate_model, DetectionModel, GaussianObservation, ModelFamily, ObservationModel, Violation,
    DEFAULT_GAUSSIAN_BINS,
};
pub use matrix::Matrix;
pub use phase_type::{ph_pmf, PhDistribution};
