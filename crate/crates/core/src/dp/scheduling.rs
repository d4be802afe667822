use super::costs::CostEvaluator;
use super::solve::Action;
use crate::error::{Error, Result};
use crate::model::{BeliefState, CostSpec, DetectionModel, Matrix};

/// Garbled observation matrix `B Q`.
///
/// Rows are renormalized only to absorb rounding.
pub fn blackwell_degrade(b: &Matrix, q: &Matrix) -> Result<Matrix> {
    q.check_stochastic("confusion matrix", 1e-12)?;
    if b.cols() != q.rows() {
        return Err(Error::Dimension {
            context: "confusion matrix rows",
            expected: b.cols(),
            found: q.rows(),
        });
    }
    let mut out = b.matmul(q)?;
    for i in 0..out.rows() {
        let s: f64 = out.row(i).iter().sum();
        for j in 0..out.cols() {
            out.set(i, j, out.get(i, j) / s);
        }
    }
    Ok(out)
}

/// Myopic sensor choice: 2 iff `C(π,2) < C(π,1)`.
pub fn myopic_policy(spec: &CostSpec, model: &DetectionModel, pi: &BeliefState) -> Result<Action> {
    if !matches!(spec, CostSpec::Scheduling { .. }) {
        return Err(spec.mismatch("the myopic sensor policy"));
    }
    let (c1, c2) = CostEvaluator::new(spec, model)?.costs(pi.probs());
    Ok(if c2 < c1 { Action::Continue } else { Action::Stop })
}
