//! Experiment driver: JSON configs in, CSV tables and JSON reports out.

mod config;

pub use config::{
    ExperimentConfig, GridConfig, PhdistConfig, PolicySource, SimulateConfig, SweepConfig,
    SweepPoint,
};

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dp::{
    build_grid, convexity_check, extract_regions, line_crossing_check, value_iterate,
    value_monotonicity_sweep, Action, FamilyOrder, GridSolution, SimplexGrid,
};
use crate::error::{invalid, Error, Result};
use crate::filters::SocialContext;
use crate::model::{ph_pmf, BeliefState, CostSpec, DetectionModel};
use crate::orders::{check_assumptions, AssumptionReport};
use crate::policy::{optimize_threshold, LinearThresholdPolicy, ThresholdSearch};
use crate::sim::{
    shiryayev_decompose, social_trajectory, stream_rng, ShiryayevSummary, Simulator, Trajectory,
};

fn writer(out: &Path, name: &str) -> Result<csv::Writer<BufWriter<File>>> {
    fs::create_dir_all(out)?;
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(out.join(name))?)))
}

fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> Result<()> {
    fs::create_dir_all(out)?;
    let mut f = BufWriter::new(File::create(out.join(name))?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn belief_header(prefix: &str, x: usize) -> Vec<String> {
    (1..=x).map(|i| format!("{prefix}{i}")).collect()
}

/// Region summary of a solved grid problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub family: String,
    pub grid_points: usize,
    pub resolution: usize,
    pub sweeps: usize,
    pub sup_delta: f64,
    /// Unshifted value at the model prior.
    pub value_at_prior: f64,
    pub stop_points: usize,
    pub continue_points: usize,
    pub stop_components: usize,
    pub continue_components: usize,
    pub stop_convexity_violations: usize,
    /// Largest number of policy switches on a grid line through each vertex.
    pub max_crossings: Vec<usize>,
    /// One-based vertices assigned to stopping.
    pub stop_vertices: Vec<usize>,
    pub assumptions: Option<AssumptionReport>,
}

pub struct SolveOutput {
    pub report: SolveReport,
    pub solution: GridSolution,
    pub grid: SimplexGrid,
    pub model: DetectionModel,
}

fn solve_model(cfg: &ExperimentConfig, model: &DetectionModel) -> Result<(SimplexGrid, GridSolution)> {
    let grid = build_grid(model.states(), cfg.grid.resolution)?;
    let sol = value_iterate(model, &cfg.cost, &grid, &cfg.solve_options())?;
    Ok((grid, sol))
}

fn write_solution(out: &Path, name: &str, grid: &SimplexGrid, sol: &GridSolution, component: &[usize]) -> Result<()> {
    let mut w = writer(out, name)?;
    let mut header = belief_header("pi_", grid.dim());
    header.extend(["value", "original_value", "policy", "component"].map(String::from));
    w.write_record(&header)?;
    for i in 0..grid.len() {
        let mut row: Vec<String> = grid.point(i).probs().iter().map(|&p| num(p)).collect();
        row.push(num(sol.values[i]));
        row.push(num(sol.original[i]));
        row.push(sol.policy[i].number().to_string());
        row.push(component[i].to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Solve on the grid and analyse the stopping region.
pub fn cmd_solve(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<SolveOutput> {
    let model = cfg.model()?;
    let (grid, sol) = solve_model(cfg, &model)?;
    let regions = extract_regions(&sol, &grid);
    let violations = convexity_check(&regions.stop, &grid).len();
    let max_crossings = (0..grid.dim())
        .map(|v| line_crossing_check(&sol.policy, &grid, v))
        .collect();
    let stop_vertices = (0..grid.dim())
        .filter(|&v| sol.policy[grid.vertex(v)] == Action::Stop)
        .map(|v| v + 1)
        .collect();
    let report = SolveReport {
        family: cfg.cost.name().to_string(),
        grid_points: grid.len(),
        resolution: grid.resolution(),
        sweeps: sol.sweeps,
        sup_delta: sol.sup_delta,
        value_at_prior: grid.evaluate(&sol.original, model.initial.probs(), cfg.projection()),
        stop_points: regions.stop.len(),
        continue_points: regions.cont.len(),
        stop_components: regions.stop_components.len(),
        continue_components: regions.continue_components.len(),
        stop_convexity_violations: violations,
        max_crossings,
        stop_vertices,
        assumptions: check_assumptions(&model, &cfg.cost).ok(),
    };
    if let Some(out) = out {
        write_solution(out, "solution.csv", &grid, &sol, &regions.component_id)?;
        write_json(out, "report.json", &report)?;
    }
    Ok(SolveOutput {
        report,
        solution: sol,
        grid,
        model,
    })
}

/// Structural assumption report; also printed as rows.
pub fn cmd_orders(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<AssumptionReport> {
    let model = cfg.model()?;
    let report = check_assumptions(&model, &cfg.cost)?;
    if let Some(out) = out {
        let mut w = writer(out, "assumptions.csv")?;
        w.write_record(["assumption", "passed", "slack", "witness"])?;
        for c in &report.checks {
            w.write_record([
                c.name.clone(),
                c.passed.to_string(),
                num(c.slack),
                c.witness.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub parameters: Vec<f64>,
    pub family_order: FamilyOrder,
    pub min_slack: Option<f64>,
    pub ordered: bool,
    pub stop_points: Vec<usize>,
}

/// Solve every transition matrix of the sweep and compare values.
pub fn cmd_sweep(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<SweepReport> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("missing `sweep` section".into()))?;
    let base = cfg.model()?;
    let family = sweep
        .points
        .iter()
        .map(|pt| {
            let m = base.with_transition(pt.transition.clone()).validated(cfg.family())?;
            Ok((pt.parameter, m))
        })
        .collect::<Result<Vec<_>>>()?;
    let grid = build_grid(base.states(), cfg.grid.resolution)?;
    let res = value_monotonicity_sweep(&family, &cfg.cost, &grid, &cfg.solve_options())?;
    let report = SweepReport {
        parameters: res.entries.iter().map(|e| e.parameter).collect(),
        family_order: res.family_order,
        min_slack: res.min_slack,
        ordered: res.family_order != FamilyOrder::NotComparable && res.ordered(sweep.tolerance),
        stop_points: res.entries.iter().map(|e| e.solution.stop_set().len()).collect(),
    };
    if let Some(out) = out {
        for (k, e) in res.entries.iter().enumerate() {
            let regions = extract_regions(&e.solution, &grid);
            write_solution(out, &format!("values_{k}.csv"), &grid, &e.solution, &regions.component_id)?;
        }
        write_json(out, "sweep_report.json", &report)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpsaReport {
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub evaluation_costs: Vec<f64>,
    pub best: usize,
    /// Failed structural assumptions; the threshold form is then not
    /// guaranteed to contain the optimum.
    pub warnings: Vec<String>,
}

/// Threshold policy search with restarts.
pub fn cmd_spsa(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<(SpsaReport, ThresholdSearch)> {
    let model = cfg.model()?;
    let warnings = match check_assumptions(&model, &cfg.cost) {
        Ok(r) => r
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} fails (slack {})", c.name, c.slack))
            .collect(),
        Err(e) => vec![format!("assumptions not checked: {e}")],
    };
    let search = optimize_threshold(&model, &cfg.cost, &cfg.spsa, cfg.seed)?;
    let best = &search.runs[search.best];
    let report = SpsaReport {
        theta: search.policy.theta.clone(),
        phi: best.phi.clone(),
        evaluation_costs: search.evaluation_costs.clone(),
        best: search.best,
        warnings,
    };
    if let Some(out) = out {
        let n = model.states() - 1;
        let mut w = writer(out, "spsa_trace.csv")?;
        let mut header = vec!["restart".to_string(), "iteration".to_string()];
        header.extend((1..=n).map(|i| format!("phi_{i}")));
        header.extend((1..=n).map(|i| format!("theta_{i}")));
        header.push("cost".into());
        w.write_record(&header)?;
        for (r, run) in search.runs.iter().enumerate() {
            for it in &run.trace {
                let mut row = vec![r.to_string(), it.iteration.to_string()];
                row.extend(it.phi.iter().map(|&v| num(v)));
                row.extend(it.theta.iter().map(|&v| num(v)));
                row.push(num(it.cost));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        write_json(out, "spsa_result.json", &report)?;
    }
    Ok((report, search))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub trajectories: usize,
    pub censored: usize,
    pub mean_stop_step: f64,
    pub shiryayev: Option<ShiryayevSummary>,
    /// Grid value at the prior when the policy comes from the grid.
    pub dp_value_at_prior: Option<f64>,
}

fn read_solution_policy(path: &Path, grid: &SimplexGrid) -> Result<Vec<Action>> {
    let mut r = csv::Reader::from_path(path)?;
    let x = grid.dim();
    let mut policy = Vec::with_capacity(grid.len());
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Config(format!("{}: row {}: bad field {k}", path.display(), i + 2)))
        };
        if i >= grid.len() {
            return Err(Error::Config(format!("{}: more rows than grid points", path.display())));
        }
        for k in 0..x {
            if (field(k)? - grid.point(i)[k]).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "{}: row {} does not match the configured grid",
                    path.display(),
                    i + 2
                )));
            }
        }
        let a = Action::from_number(field(x + 2)? as u8)
            .ok_or_else(|| Error::Config(format!("{}: row {}: bad policy", path.display(), i + 2)))?;
        policy.push(a);
    }
    if policy.len() != grid.len() {
        return Err(Error::Config(format!("{}: fewer rows than grid points", path.display())));
    }
    Ok(policy)
}

fn shiryayev_weights(spec: &CostSpec) -> Option<(f64, f64)> {
    match spec {
        CostSpec::QuickestPredictiveDelay { d, beta, .. }
        | CostSpec::QuickestClassicalDelay { d, beta, .. }
        | CostSpec::RiskSensitive { d, beta, .. }
        | CostSpec::SocialStopping { d, beta, .. } => Some((*d, *beta)),
        _ => None,
    }
}

/// Monte Carlo runs under a grid or threshold policy.
pub fn cmd_simulate(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<SimulateReport> {
    let sc = cfg
        .simulate
        .as_ref()
        .ok_or_else(|| Error::Config("missing `simulate` section".into()))?;
    if sc.trajectories == 0 {
        return Err(invalid("trajectories", "must be at least 1"));
    }
    let model = cfg.model()?;
    let x = model.states();
    let mut dp_value = None;
    let policy: Box<dyn Fn(&BeliefState) -> Action + Sync> = match &sc.policy {
        PolicySource::Grid => {
            let (grid, sol) = solve_model(cfg, &model)?;
            dp_value = Some(grid.evaluate(&sol.original, model.initial.probs(), cfg.projection()));
            Box::new(move |pi| sol.policy[grid.nearest(pi.probs())])
        }
        PolicySource::Theta(theta) => {
            let p = LinearThresholdPolicy::new(theta.clone())?;
            if p.states() != x {
                return Err(Error::Dimension {
                    context: "theta vs model",
                    expected: x,
                    found: p.states(),
                });
            }
            Box::new(move |pi| p.decide_unchecked(pi.probs()))
        }
        PolicySource::SolutionFile(f) => {
            let grid = build_grid(x, cfg.grid.resolution)?;
            let actions = read_solution_policy(&cfg.resolve(f), &grid)?;
            Box::new(move |pi| actions[grid.nearest(pi.probs())])
        }
    };
    let trajectories: Vec<Trajectory> = match &cfg.cost {
        CostSpec::SocialStopping { local_costs, .. } => {
            let ctx = SocialContext::new(local_costs.clone(), model.obs_matrix()?.clone())?;
            (0..sc.trajectories)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream_rng(cfg.seed, i as u64);
                    social_trajectory(&ctx, &model.initial, &policy, sc.true_state, sc.max_steps, &mut rng)
                })
                .collect::<Result<_>>()?
        }
        _ => {
            let sim = Simulator::new(&model)?;
            (0..sc.trajectories)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream_rng(cfg.seed, i as u64);
                    sim.run(None, &policy, sc.max_steps, &mut rng)
                })
                .collect::<Result<_>>()?
        }
    };
    let stops: Vec<f64> = trajectories
        .iter()
        .map(|t| t.tau.unwrap_or(t.len()) as f64)
        .collect();
    let shiryayev = match shiryayev_weights(&cfg.cost) {
        Some((d, beta)) if !matches!(cfg.cost, CostSpec::SocialStopping { .. }) => {
            Some(shiryayev_decompose(&trajectories, d, beta)?)
        }
        _ => None,
    };
    let report = SimulateReport {
        trajectories: trajectories.len(),
        censored: trajectories.iter().filter(|t| t.censored).count(),
        mean_stop_step: stops.iter().sum::<f64>() / stops.len() as f64,
        shiryayev,
        dp_value_at_prior: dp_value,
    };
    if let Some(out) = out {
        let mut w = writer(out, "trajectories.csv")?;
        let mut header = vec!["trajectory".to_string(), "step".into(), "state".into(), "observation".into()];
        header.extend(belief_header("belief_", x));
        header.push("action".into());
        w.write_record(&header)?;
        for (j, t) in trajectories.iter().take(sc.export).enumerate() {
            for k in 0..t.len() {
                let mut row = vec![
                    j.to_string(),
                    (k + 1).to_string(),
                    (t.states[k] + 1).to_string(),
                    t.observations[k].map(|y| (y + 1).to_string()).unwrap_or_default(),
                ];
                row.extend(t.beliefs[k].probs().iter().map(|&p| num(p)));
                row.push(t.actions.get(k).map(|a| a.number().to_string()).unwrap_or_default());
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        write_json(out, "simulation_summary.json", &report)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhdistReport {
    pub pmf: Vec<f64>,
    pub cdf: Vec<f64>,
    pub mean_truncated: f64,
    pub total_mass: f64,
    /// Total variation distance to a Monte Carlo histogram, if sampled.
    pub tv_distance: Option<f64>,
}

/// Change-time distribution, optionally checked by simulation.
pub fn cmd_phdist(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<PhdistReport> {
    let model = cfg.model()?;
    let dist = ph_pmf(&model, cfg.phdist.k_max)?;
    let tv_distance = if cfg.phdist.samples > 0 {
        let sim = Simulator::new(&model)?;
        let k_max = cfg.phdist.k_max;
        let draws: Vec<Option<usize>> = (0..cfg.phdist.samples)
            .into_par_iter()
            .map(|i| sim.absorption_time(k_max, &mut stream_rng(cfg.seed, i as u64)))
            .collect();
        let mut counts = vec![0u64; k_max + 1];
        let mut overflow = 0;
        for d in draws {
            match d {
                Some(k) => counts[k] += 1,
                None => overflow += 1,
            }
        }
        Some(dist.tv_distance(&counts, overflow))
    } else {
        None
    };
    let report = PhdistReport {
        cdf: dist.cdf(),
        mean_truncated: dist.mean(),
        total_mass: dist.total_mass(),
        pmf: dist.pmf,
        tv_distance,
    };
    if let Some(out) = out {
        let mut w = writer(out, "phdist.csv")?;
        w.write_record(["k", "pmf", "cdf"])?;
        for (k, (p, c)) in report.pmf.iter().zip(&report.cdf).enumerate() {
            w.write_record([k.to_string(), num(*p), num(*c)])?;
        }
        w.flush()?;
        write_json(out, "phdist_report.json", &report)?;
    }
    Ok(report)
}
