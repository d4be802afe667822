use approx::assert_abs_diff_eq;

use phdetect::cli::{cmd_solve, ExperimentConfig};
use phdetect::dp::{
    blackwell_degrade, build_grid, components, convexity_check, extract_regions, grid_lines,
    original_costs, stage_costs, switches, value_iterate, Action, CostEvaluator, Projection,
    SolveOptions,
};
use phdetect::model::{BeliefState, CostSpec, DetectionModel, Matrix, ObservationModel};

fn m(r: Vec<Vec<f64>>) -> Matrix {
    Matrix::from_rows(r).unwrap()
}

fn config(name: &str) -> ExperimentConfig {
    let path = std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(format!("{name}.json"));
    ExperimentConfig::load(&path).unwrap()
}

fn three_state() -> DetectionModel {
    DetectionModel::new(
        m(vec![vec![1.0, 0.0, 0.0], vec![0.3, 0.1, 0.6], vec![0.0, 0.02, 0.98]]),
        BeliefState::vertex(3, 2),
        ObservationModel::Discrete(m(vec![vec![0.7, 0.3], vec![0.4, 0.6], vec![0.2, 0.8]])),
    )
}

fn predictive(alpha: f64, rho: f64) -> CostSpec {
    CostSpec::QuickestPredictiveDelay {
        alpha,
        beta: 1.0,
        d: 0.7,
        rho,
        c: 0.0,
    }
}

#[test]
fn grid_enumeration() {
    let g = build_grid(2, 4).unwrap();
    let pts: Vec<Vec<f64>> = g.points().iter().map(|p| p.probs().to_vec()).collect();
    assert_eq!(pts.len(), 5);
    for q in [0.0, 0.25, 0.5, 0.75, 1.0] {
        assert!(pts.contains(&vec![q, 1.0 - q]));
    }
    let g = build_grid(3, 20).unwrap();
    assert_eq!(g.len(), 231);
    for (dim, res) in [(2, 500), (3, 20), (3, 37), (4, 30), (5, 12)] {
        for p in build_grid(dim, res).unwrap().points() {
            assert_eq!(p.probs().iter().sum::<f64>(), 1.0, "{:?}", p.probs());
        }
    }
    let v = g.vertex(2);
    assert_eq!(g.point(v).probs(), &[0.0, 0.0, 1.0]);
    assert_eq!(g.nearest(&[0.01, 0.02, 0.97]), v);
}

#[test]
fn interpolation_reproduces_linear_functions() {
    let g = build_grid(3, 7).unwrap();
    let w = [0.3, -1.2, 2.5];
    let values: Vec<f64> = g.points().iter().map(|p| p.dot(&w)).collect();
    let pi = [0.123, 0.456, 0.421];
    let exact: f64 = pi.iter().zip(&w).map(|(a, b)| a * b).sum();
    assert_abs_diff_eq!(g.evaluate(&values, &pi, Projection::Interpolate), exact, epsilon = 1e-12);
    let weights = g.interpolation(&pi);
    assert_abs_diff_eq!(weights.iter().map(|(_, w)| w).sum::<f64>(), 1.0, epsilon = 1e-12);
}

#[test]
fn stage_cost_examples() {
    let model = three_state();
    for i in 0..3 {
        let (c1, _) = stage_costs(&predictive(0.0, 0.9), &model, &BeliefState::vertex(3, i)).unwrap();
        assert_eq!(c1, 0.0);
    }
    let spec = CostSpec::QuickestPredictiveDelay {
        alpha: 0.0,
        beta: 1.0,
        d: 2.0,
        rho: 1.0,
        c: 0.0,
    };
    let (s, c) = original_costs(&spec, &model, &BeliefState::vertex(3, 0)).unwrap();
    assert_eq!(s, 0.0);
    assert_abs_diff_eq!(c, 2.0, epsilon = 1e-15);
}

#[test]
fn risk_costs_match_first_order_expansion() {
    let model = three_state();
    let (beta, d, eps) = (2.0, 1.5, 1e-8);
    let spec = CostSpec::RiskSensitive { epsilon: eps, beta, d };
    let pi = [0.2, 0.3, 0.5];
    let (c1, c2) = CostEvaluator::new(&spec, &model).unwrap().costs(&pi);
    assert_eq!(c1, 0.0);
    let pp = model.transition.tmul_vec(&pi);
    let delay: f64 = (0..3).map(|i| pi[i] * model.transition.get(i, 0)).sum();
    let slope = beta * ((pp[1] + pp[2]) - (pi[1] + pi[2])) + d * delay;
    assert_abs_diff_eq!(c2 / eps, slope, epsilon = 1e-6);
}

#[test]
fn blackwell_product() {
    let b2 = m(vec![vec![0.9, 0.1], vec![0.1, 0.9]]);
    let q = m(vec![vec![0.8, 0.2], vec![0.2, 0.8]]);
    let b1 = blackwell_degrade(&b2, &q).unwrap();
    assert!(b1.max_abs_diff(&m(vec![vec![0.74, 0.26], vec![0.26, 0.74]])) < 1e-15);
    assert!(blackwell_degrade(&b2, &m(vec![vec![0.8, 0.3], vec![0.2, 0.8]])).is_err());
}

#[test]
fn undiscounted_needs_horizon() {
    let g = build_grid(3, 5).unwrap();
    let err = value_iterate(&three_state(), &predictive(0.0, 1.0), &g, &SolveOptions::default());
    assert!(err.is_err());
}

#[test]
fn discounted_iteration_contracts() {
    let g = build_grid(3, 12).unwrap();
    let rho = 0.8;
    let sol = value_iterate(&three_state(), &predictive(0.5, rho), &g, &SolveOptions::default()).unwrap();
    assert!(sol.sup_delta < 1e-8);
    for w in sol.deltas.windows(2).skip(1) {
        assert!(w[1] <= rho * w[0] + 1e-12, "{} then {}", w[0], w[1]);
    }
}

#[test]
fn stop_is_chosen_where_stopping_is_cheaper() {
    let g = build_grid(3, 10).unwrap();
    let sol = value_iterate(&three_state(), &predictive(0.5, 0.9), &g, &SolveOptions::default()).unwrap();
    for i in 0..g.len() {
        let v = sol.q_stop[i].min(sol.q_continue[i]);
        assert_abs_diff_eq!(sol.values[i], v, epsilon = 1e-12);
        if sol.policy[i] == Action::Stop {
            assert!(sol.q_stop[i] <= sol.q_continue[i] + 1e-10);
        }
    }
}

#[test]
fn stopped_vertices_form_a_prefix() {
    for name in ["fig3a", "fig3b", "fig3c", "fig5", "fig6"] {
        let out = cmd_solve(&config(name), None).unwrap();
        let stops: Vec<bool> = (0..out.grid.dim())
            .map(|v| out.solution.policy[out.grid.vertex(v)] == Action::Stop)
            .collect();
        let first_continue = stops.iter().position(|s| !s).unwrap_or(stops.len());
        assert!(stops[first_continue..].iter().all(|s| !s), "{name}: {stops:?}");
    }
}

#[test]
fn social_stop_set_has_at_most_three_intervals() {
    for name in ["fig4a", "fig4c"] {
        let out = cmd_solve(&config(name), None).unwrap();
        let r = extract_regions(&out.solution, &out.grid);
        assert!(r.stop_components.len() <= 3, "{name}");
    }
}

#[test]
fn constrained_social_stop_set_is_connected() {
    let out = cmd_solve(&config("constrained_social"), None).unwrap();
    let r = extract_regions(&out.solution, &out.grid);
    assert_eq!(r.stop_components.len(), 1);
    assert!(convexity_check(&r.stop, &out.grid).len() <= out.grid.len());
}

#[test]
fn region_helpers() {
    let g = build_grid(2, 6).unwrap();
    let lines = grid_lines(&g, 0);
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0].len(), 7);
    // Stop at the two ends only.
    let mut policy = vec![Action::Continue; g.len()];
    for (k, &i) in lines[0].iter().enumerate() {
        if k == 0 || k == 6 {
            policy[i] = Action::Stop;
        }
    }
    assert_eq!(switches(&policy, &lines[0]), 2);
    let stop: Vec<usize> = (0..g.len()).filter(|&i| policy[i] == Action::Stop).collect();
    assert_eq!(components(&stop, &g).len(), 2);
    assert!(!convexity_check(&stop, &g).is_empty());
}
