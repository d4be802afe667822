//! Belief-simplex grids, value iteration and stopping-region analysis.

mod costs;
mod grid;
mod regions;
mod scheduling;
mod solve;
mod sweep;

pub use costs::{original_costs, stage_costs, CostEvaluator};
pub use grid::{build_grid, Projection, SimplexGrid};
pub use regions::{
    components, convexity_check, extract_regions, grid_lines, line_crossing_check,
    regions_from_policy, switches, RegionStructure,
};
pub use scheduling::{blackwell_degrade, myopic_policy};
pub use solve::{tie_tol, value_iterate, Action, GridSolution, SolveOptions};
pub(crate) use solve::{dynamics, Dynamics};
pub use sweep::{value_monotonicity_sweep, FamilyOrder, SweepEntry, SweepResult};
