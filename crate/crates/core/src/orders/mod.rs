//! Stochastic orders on beliefs and matrices, per-family sufficient
//! conditions for threshold structure, and random generators for property
//! tests.

mod assumptions;
pub mod random;

pub use assumptions::{check_assumptions, AssumptionCheck, AssumptionReport};

use crate::error::{invalid, Error, Result};
use crate::model::{BeliefState, Matrix};

/// Absolute slack used by every order predicate.
pub const ORDER_TOL: f64 = 1e-12;

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::Dimension {
            context: "order comparison",
            expected: a,
            found: b,
        })
    }
}

/// Likelihood-ratio dominance on raw vectors.
pub fn mlr_geq_slice(hi: &[f64], lo: &[f64]) -> bool {
    let n = hi.len();
    for i in 0..n {
        for j in i + 1..n {
            if hi[i] * lo[j] > lo[i] * hi[j] + ORDER_TOL {
                return false;
            }
        }
    }
    true
}

/// `π1 ≥_r π2`: `π1(i)π2(j) ≤ π2(i)π1(j)` for all `i < j`.
pub fn mlr_geq(p1: &BeliefState, p2: &BeliefState) -> Result<bool> {
    same_dim(p1.dim(), p2.dim())?;
    Ok(mlr_geq_slice(p1.probs(), p2.probs()))
}

/// First-order dominance: every upper tail sum of `π1` is at least that of `π2`.
pub fn fosd_geq(p1: &BeliefState, p2: &BeliefState) -> Result<bool> {
    same_dim(p1.dim(), p2.dim())?;
    let (mut t1, mut t2) = (0.0, 0.0);
    for i in (0..p1.dim()).rev() {
        t1 += p1[i];
        t2 += p2[i];
        if t1 < t2 - ORDER_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every 2x2 minor is non-negative (up to slack).
pub fn is_tp2(m: &Matrix) -> Result<bool> {
    if let Some((i, j)) = m.has_negative() {
        return Err(Error::InvalidMatrix(format!(
            "negative entry at ({}, {})",
            i + 1,
            j + 1
        )));
    }
    for i in 0..m.rows() {
        for k in i + 1..m.rows() {
            if !mlr_geq_slice(m.row(k), m.row(i)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Transition-matrix order `P1 ⪰ P2`: `P1_ij P2_ml ≤ P2_ij P1_ml` for all
/// `l > j` and all rows `i`, `m`.
pub fn matrix_order_geq(p1: &Matrix, p2: &Matrix) -> Result<bool> {
    if p1.rows() != p2.rows() || p1.cols() != p2.cols() {
        return Err(Error::Dimension {
            context: "transition matrix order",
            expected: p1.rows() * p1.cols(),
            found: p2.rows() * p2.cols(),
        });
    }
    let (r, c) = (p1.rows(), p1.cols());
    for i in 0..r {
        for m in 0..r {
            for j in 0..c {
                for l in j + 1..c {
                    if p1.get(i, j) * p2.get(m, l) > p2.get(i, j) * p1.get(m, l) + ORDER_TOL {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// `π + Σ_j ε_j (e_j - e_{j+1})`, which is first-order dominated by `π`.
pub fn epsilon_dominated(pi: &BeliefState, eps: &[f64]) -> Result<BeliefState> {
    let x = pi.dim();
    if eps.len() != x - 1 {
        return Err(Error::Dimension {
            context: "epsilon vector",
            expected: x - 1,
            found: eps.len(),
        });
    }
    for (j, &e) in eps.iter().enumerate() {
        let cap = (1.0 - pi[j]).min(pi[j + 1]);
        if !(e >= 0.0 && e <= cap + ORDER_TOL) {
            return Err(invalid(
                "epsilon",
                format!("entry {} = {e} outside [0, {cap}]", j + 1),
            ));
        }
    }
    let mut v = pi.probs().to_vec();
    for (j, &e) in eps.iter().enumerate() {
        v[j] += e;
        v[j + 1] -= e;
    }
    // Sequential shifts can push an entry past the box by rounding only.
    for p in v.iter_mut() {
        *p = p.clamp(0.0, 1.0);
    }
    BeliefState::normalized(v)
}

/// Point `(1-ε) π̄ + ε e_v` on the segment from a face point to vertex `v`
/// (zero-based).
pub fn line_point(vertex: usize, base: &BeliefState, eps: f64) -> Result<BeliefState> {
    if vertex >= base.dim() {
        return Err(invalid("vertex", format!("{vertex} out of range")));
    }
    if base[vertex] != 0.0 {
        return Err(invalid(
            "base",
            format!("must lie on the face opposite vertex {}", vertex + 1),
        ));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(invalid("eps", format!("{eps} outside [0, 1]")));
    }
    let mut v: Vec<f64> = base.probs().iter().map(|p| (1.0 - eps) * p).collect();
    v[vertex] = eps;
    BeliefState::normalized(v)
}
