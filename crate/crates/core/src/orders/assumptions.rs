use serde::{Deserialize, Serialize};

use super::ORDER_TOL;
use crate::dp::blackwell_degrade;
use crate::error::Result;
use crate::model::{risk_vectors, CostSpec, DetectionModel, Matrix, DEFAULT_GAUSSIAN_BINS};

/// One inequality with its slack; negative slack means it fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionCheck {
    pub name: String,
    pub passed: bool,
    pub slack: f64,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub family: String,
    pub checks: Vec<AssumptionCheck>,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&AssumptionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed(&self, name: &str) -> Option<bool> {
        self.get(name).map(|c| c.passed)
    }

    fn push(&mut self, name: &str, slack: f64, witness: Option<String>) {
        self.checks.push(AssumptionCheck {
            name: name.to_string(),
            passed: slack >= -ORDER_TOL,
            slack,
            witness: if slack >= -ORDER_TOL { None } else { witness },
        });
    }

    /// Records the smallest of several slacks, labelled by 1-based index.
    fn push_min(&mut self, name: &str, slacks: impl IntoIterator<Item = (String, f64)>) {
        let (w, s) = slacks
            .into_iter()
            .fold((None, f64::INFINITY), |(w, s), (label, v)| {
                if v < s {
                    (Some(label), v)
                } else {
                    (w, s)
                }
            });
        if s.is_finite() {
            self.push(name, s, w);
        }
    }

    fn push_tp2(&mut self, name: &str, m: &Matrix) {
        let (s, w) = min_minor(m);
        self.push(name, s, w);
    }
}

/// Smallest 2x2 minor and where it occurs (rows, columns, 1-based).
pub(crate) fn min_minor(m: &Matrix) -> (f64, Option<String>) {
    let mut best = (f64::INFINITY, None);
    for i in 0..m.rows() {
        for k in i + 1..m.rows() {
            for j in 0..m.cols() {
                for l in j + 1..m.cols() {
                    let v = m.get(i, j) * m.get(k, l) - m.get(i, l) * m.get(k, j);
                    if v < best.0 {
                        best = (
                            v,
                            Some(format!("rows {},{} cols {},{}", i + 1, k + 1, j + 1, l + 1)),
                        );
                    }
                }
            }
        }
    }
    if best.0.is_infinite() {
        (0.0, None)
    } else {
        best
    }
}


/// Evaluates the family's sufficient conditions for threshold structure.
pub fn check_assumptions(model: &DetectionModel, spec: &CostSpec) -> Result<AssumptionReport> {
    let model = model.discretized(DEFAULT_GAUSSIAN_BINS)?;
    let x = model.states();
    spec.validate(x)?;
    let p = &model.transition;
    let b = model.obs_matrix()?;
    let mut r = AssumptionReport {
        family: spec.name().to_string(),
        checks: Vec::new(),
    };
    match spec {
        CostSpec::QuickestPredictiveDelay {
            alpha, beta, d, rho, ..
        } => {
            let margin = d - rho * (alpha + beta);
            r.push("(A1-Ex1)", margin, Some(format!("d - rho(alpha+beta) = {margin}")));
            r.push_tp2("(A2)", b);
            r.push_tp2("(A3)", p);
            let s = margin * (1.0 - p.get(1, 0)) - (alpha - beta);
            r.push("(S-Ex1)", s, Some(format!("slack {s}")));
        }
        CostSpec::QuickestClassicalDelay {
            alpha,
            beta,
            d,
            rho,
            f,
        } => {
            r.push_tp2("(A2)", b);
            r.push_tp2("(A3)", p);
            let pf = p.mul_vec(f);
            let k = alpha + beta;
            r.push_min(
                "(AS-Ex1)(i)",
                (1..x).map(|i| {
                    let bound = 1.0_f64.max(rho * k / beta * pf[i] + (alpha - d) / beta);
                    (format!("i={}", i + 1), f[i] - bound)
                }),
            );
            let mut pairs = Vec::new();
            for i in 1..x.saturating_sub(2) {
                for j in i..x {
                    pairs.push((
                        format!("i={},j={}", i + 1, j + 1),
                        f[j] - f[i] - rho * (pf[j] - pf[i]),
                    ));
                }
            }
            r.push_min("(AS-Ex1)(ii)", pairs);
            r.push_min(
                "(AS-Ex1)(iii)",
                (1..x - 1).map(|i| {
                    (
                        format!("i={}", i + 1),
                        f[x - 1] - f[i] - rho * k / beta * (pf[x - 1] - pf[i]),
                    )
                }),
            );
        }
        CostSpec::Transient {
            alpha,
            beta,
            d,
            rho,
            f,
            transient_states,
            ..
        } => {
            r.push_tp2("(A2)", b);
            r.push_tp2("(A3)", p);
            r.push("(A1-Ex2)", d[0] - d[1], Some("d1 < d2".into()));
            if x == 3 {
                let p33 = p.get(2, 2);
                let bound = (d[1] + beta - rho * beta * p33) / (1.0 + rho * p33);
                r.push("(S-Ex2)", bound - alpha, Some(format!("alpha above {bound}")));
            }
            if let (Some(k), Some(f)) = (transient_states, f) {
                r.push("(PH-entry)", f[k + 1] - 1.0, Some(format!("f_{} < 1", k + 2)));
                let pf = p.mul_vec(f);
                let w: Vec<f64> = (0..x).map(|i| d[i] + beta * (rho * pf[i] - f[i])).collect();
                r.push_min(
                    "(PH-decreasing)",
                    (0..x - 1).map(|i| (format!("i={}", i + 1), w[i] - w[i + 1])),
                );
            }
        }
        CostSpec::RiskSensitive { epsilon, beta, d } => {
            r.push_tp2("(A2)", b);
            r.push_tp2("(A3)", p);
            let (r1, r2) = risk_vectors(*epsilon, *beta, *d, p);
            let pr1 = p.mul_vec(&r1);
            let w: Vec<f64> = (0..x).map(|i| r2[i] * pr1[i] - r1[i]).collect();
            r.push_min(
                "(A1-Ex3)",
                (0..x - 1).map(|i| (format!("i={}", i + 1), w[i] - w[i + 1])),
            );
        }
        CostSpec::SocialStopping {
            local_costs: c,
            welfare,
            ..
        } => {
            r.push("(dominance-1)", c.get(0, 1) - c.get(0, 0), Some("c(e1,1) >= c(e1,2)".into()));
            r.push("(dominance-2)", c.get(1, 0) - c.get(1, 1), Some("c(e2,2) >= c(e2,1)".into()));
            r.push_tp2("(A2)", b);
            if b.cols() == 2 {
                let s = -(b.get(0, 0) * b.get(0, 1) - b.get(1, 1) * b.get(1, 0)).abs();
                r.push("(B-symmetric)", s, Some("B11 B12 != B22 B21".into()));
            }
            if *welfare {
                r.push_min(
                    "(costs-decreasing)",
                    (0..c.cols()).map(|a| (format!("a={}", a + 1), c.get(0, a) - c.get(1, a))),
                );
            }
        }
        CostSpec::ConstrainedSocial {
            local_costs: c,
            rho,
            ..
        } => {
            let mut pairs = Vec::new();
            for i in 0..x - 1 {
                for a in 0..c.cols() {
                    pairs.push((
                        format!("i={},a={}", i + 1, a + 1),
                        c.get(i, a) - c.get(i + 1, a),
                    ));
                }
            }
            r.push_min("(A1-Ex5)", pairs);
            r.push_tp2("(A2)", b);
            let y = b.cols().min(c.cols());
            let weighted = |i: usize| -> f64 { (0..y).map(|k| c.get(i, k) * b.get(i, k)).sum() };
            let mut first = Vec::new();
            let mut second = Vec::new();
            for i in 0..x {
                for a in 0..c.cols() {
                    let label = format!("i={},a={}", i + 1, a + 1);
                    first.push((
                        label.clone(),
                        c.get(x - 1, a) - c.get(i, a) - (1.0 - rho) * (weighted(x - 1) - weighted(i)),
                    ));
                    second.push((
                        label,
                        (1.0 - rho) * (weighted(0) - weighted(i)) - (c.get(0, a) - c.get(i, a)),
                    ));
                }
            }
            r.push_min("(S-Ex5)(i)", first);
            r.push_min("(S-Ex5)(ii)", second);
        }
        CostSpec::Scheduling {
            confusion,
            coarse_observation,
            ..
        } => {
            r.push_tp2("(A2)", b);
            r.push_tp2("(A3)", p);
            let garbled = blackwell_degrade(b, confusion)?;
            let gap = coarse_observation
                .as_ref()
                .map_or(0.0, |m| m.max_abs_diff(&garbled));
            r.push("(Blackwell)", -gap, Some(format!("coarse sensor differs from B Q by {gap}")));
        }
    }
    Ok(r)
}
