use serde::{Deserialize, Serialize};

use super::grid::SimplexGrid;
use super::solve::{value_iterate, GridSolution, SolveOptions};
use crate::error::{invalid, Result};
use crate::model::{CostSpec, DetectionModel};
use crate::orders::matrix_order_geq;

/// How consecutive transition matrices in a sweep compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyOrder {
    /// Each matrix dominates the one before it.
    Increasing,
    /// Each matrix is dominated by the one before it.
    Decreasing,
    NotComparable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepEntry {
    pub parameter: f64,
    pub solution: GridSolution,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
    pub family_order: FamilyOrder,
    /// Smallest `V(prev) - V(next)` over the grid and consecutive pairs,
    /// oriented so that a non-negative slack means the values move the way
    /// the matrix order predicts. `None` when fewer than two parameters or
    /// the family is unordered.
    pub min_slack: Option<f64>,
}

impl SweepResult {
    /// Pointwise ordering holds within `tol`.
    pub fn ordered(&self, tol: f64) -> bool {
        match self.min_slack {
            Some(s) => s >= -tol,
            None => self.entries.len() < 2,
        }
    }
}

/// Solve every model of a parameter family and compare the values.
///
/// A larger transition matrix in the order gives a smaller value, so for an
/// increasing family the values must decrease along the sweep.
pub fn value_monotonicity_sweep(
    family: &[(f64, DetectionModel)],
    spec: &CostSpec,
    grid: &SimplexGrid,
    opts: &SolveOptions,
) -> Result<SweepResult> {
    if family.is_empty() {
        return Err(invalid("family", "empty parameter sweep"));
    }
    let mut inc = true;
    let mut dec = true;
    for w in family.windows(2) {
        inc &= matrix_order_geq(&w[1].1.transition, &w[0].1.transition)?;
        dec &= matrix_order_geq(&w[0].1.transition, &w[1].1.transition)?;
    }
    let family_order = if inc {
        FamilyOrder::Increasing
    } else if dec {
        FamilyOrder::Decreasing
    } else {
        FamilyOrder::NotComparable
    };
    let mut entries = Vec::with_capacity(family.len());
    for (p, model) in family {
        entries.push(SweepEntry {
            parameter: *p,
            solution: value_iterate(model, spec, grid, opts)?,
        });
    }
    let sign = match family_order {
        FamilyOrder::Increasing => Some(1.0),
        FamilyOrder::Decreasing => Some(-1.0),
        FamilyOrder::NotComparable => None,
    };
    let min_slack = match sign {
        Some(s) if entries.len() >= 2 => Some(
            entries
                .windows(2)
                .flat_map(|w| {
                    w[0].solution
                        .original
                        .iter()
                        .zip(&w[1].solution.original)
                        .map(move |(a, b)| s * (a - b))
                })
                .fold(f64::INFINITY, f64::min),
        ),
        _ => None,
    };
    Ok(SweepResult {
        entries,
        family_order,
        min_slack,
    })
}
