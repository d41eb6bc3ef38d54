//! Grid expansion, cell execution, winner selection and output files.

use crate::config::{ConstraintRule, ExperimentConfig, Method, RhoTildeRule, SolverConfig, StationarityRuns};
use crate::cputime::CpuClock;
use crate::error::{HarnessError, Result};
use crate::metrics::{equally_spaced, write_rows, MetricsRow};
use crate::plot::{emit_plots, PlotInput, XAxis};
use crate::setup::{prepare, Prepared};
use rayon::prelude::*;
use ssg_core::ipp::{ipp_run_budget, SsgInner};
use ssg_core::schedules::ConstraintStep;
use ssg_core::solver::{sample_output, ssg_run_observed, sssg_run_observed};
use ssg_core::stationarity::{default_prox_weights, near_stationarity};
use ssg_core::{CheckpointPlan, DenseVector, RngStream, SolverTrace, StepsizePolicy};
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

/// One point of one solver's grid, possibly replicated.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Position in the full expansion; selects the cell's random stream.
    pub index: usize,
    pub solver: usize,
    pub label: String,
    pub method: Method,
    pub run_id: String,
    pub tolerance: f64,
    pub step: f64,
    pub rho_hat_mult: Option<f64>,
    pub replicate: usize,
}

pub fn expand_grid(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for (s, solver) in cfg.solvers.iter().enumerate() {
        let label = solver.label();
        let mults: Vec<Option<f64>> = match solver.method {
            Method::IppSsg => solver.rho_hat_mult.iter().copied().map(Some).collect(),
            _ => vec![None],
        };
        let mut local = 0;
        for tol in solver.tolerance.cells() {
            for step in solver.step.cells() {
                for &mult in &mults {
                    for rep in 0..cfg.run.replicates {
                        let mut run_id = format!("{label}-{local:03}");
                        if cfg.run.replicates > 1 {
                            run_id.push_str(&format!("-r{rep}"));
                        }
                        cells.push(Cell {
                            index: cells.len(),
                            solver: s,
                            label: label.clone(),
                            method: solver.method,
                            run_id,
                            tolerance: tol,
                            step,
                            rho_hat_mult: mult,
                            replicate: rep,
                        });
                    }
                    local += 1;
                }
            }
        }
    }
    cells
}

/// What a successful cell produced.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub rows: Vec<MetricsRow>,
    /// The iterate behind each row.
    pub iterates: Vec<DenseVector>,
    pub initial_objective: f64,
    pub cpu_seconds: f64,
    pub zero_subgradient_events: usize,
    /// Output iterate drawn by the method's randomized rule (last center
    /// for ipp-ssg). None when the rule has nothing to sample from.
    pub output_iteration: Option<usize>,
    pub output_point: Option<DenseVector>,
}

impl CellResult {
    pub fn final_row(&self) -> &MetricsRow {
        self.rows.last().expect("at least one checkpoint")
    }
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub cell: Cell,
    pub seed: u64,
    /// Prox weights of an ipp-ssg cell.
    pub rho_hat: Option<f64>,
    pub rho_tilde: Option<f64>,
    pub outcome: std::result::Result<CellResult, String>,
    pub winner: bool,
    pub stationarity_evaluated: usize,
    pub stationarity_failures: usize,
}

impl RunRecord {
    pub fn final_objective(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|r| r.final_row().objective)
    }
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub output_dir: PathBuf,
    pub runs: Vec<RunRecord>,
    pub run_csvs: Vec<PathBuf>,
    pub summary: PathBuf,
    pub plots: Vec<PathBuf>,
    pub info: BTreeMap<String, f64>,
}

impl ExperimentOutcome {
    pub fn winner(&self, label: &str) -> Option<&RunRecord> {
        self.runs.iter().find(|r| r.winner && r.cell.label == label)
    }
}

/// Row iterations for T steps and n checkpoints; row k holds x^(iteration+1).
pub fn checkpoint_iterations(iterations: usize, checkpoints: usize) -> Vec<usize> {
    equally_spaced(iterations, checkpoints)
}

fn policy_for(cfg: &ExperimentConfig, solver: &SolverConfig, cell: &Cell) -> ssg_core::Result<StepsizePolicy> {
    let constraint_step = match solver.constraint_step {
        ConstraintRule::Same => ConstraintStep::SameAsObjective,
        ConstraintRule::Polyak => ConstraintStep::Polyak { scale: solver.polyak_scale },
    };
    // ipp-ssg applies the policy per inner run.
    let horizon = match solver.inner_iters {
        Some(inner) if solver.method == Method::IppSsg => inner,
        _ => cfg.run.iterations,
    };
    let start = if solver.method == Method::IppSsg { 0 } else { cfg.run.start };
    let mut p = StepsizePolicy::manual(
        solver.tolerance.rule.rate(cell.tolerance),
        solver.step.rule.rate(cell.step),
        constraint_step,
        horizon,
        start,
        solver.output,
    )?;
    p.batch_size = solver.batch_size;
    Ok(p)
}

fn ipp_weights(prepared: &Prepared, solver: &SolverConfig, cell: &Cell) -> Option<(f64, f64)> {
    let mult = cell.rho_hat_mult?;
    let k = prepared.problem.constants();
    let rho_hat = mult * k.rho.max(1.0);
    let rho_tilde = match solver.rho_tilde {
        RhoTildeRule::Zero => 0.0,
        RhoTildeRule::EqualRhoHat => rho_hat,
        RhoTildeRule::Auto if k.constraint_convex => 0.0,
        RhoTildeRule::Auto => rho_hat,
    };
    Some((rho_hat, rho_tilde))
}

/// Runs one cell on the calling thread.
pub fn run_cell(prepared: &Prepared, cfg: &ExperimentConfig, cell: &Cell, seed: u64) -> ssg_core::Result<CellResult> {
    let solver = &cfg.solvers[cell.solver];
    let problem = &prepared.problem;
    let policy = policy_for(cfg, solver, cell)?;
    let horizon = cfg.run.iterations;
    let row_iters = checkpoint_iterations(horizon, cfg.run.checkpoints);
    let plan = CheckpointPlan::At(row_iters.iter().map(|t| t + 1).collect::<BTreeSet<_>>());
    let mut rng = RngStream::new(seed).substream(cell.index as u64);

    let clock = CpuClock::start();
    let mut stamps: BTreeMap<usize, f64> = BTreeMap::new();
    let mut observer = |t: usize| {
        stamps.insert(t, clock.elapsed());
    };
    let x0 = &prepared.x0;
    let (trace, output): (SolverTrace, Option<(usize, DenseVector)>) = match cell.method {
        Method::Ssg | Method::Sssg => {
            let trace = if cell.method == Method::Ssg {
                ssg_run_observed(problem, &policy, x0, &mut rng, plan, &mut observer)?
            } else {
                sssg_run_observed(problem, &policy, x0, policy.batch_size, &mut rng, plan, &mut observer)?
            };
            let mut out_rng = rng.substream(u64::MAX);
            let out = sample_output(problem, &policy, &trace, policy.output_mode, &mut out_rng).ok();
            (trace, out.map(|o| (o.tau, o.x_tau)))
        }
        Method::IppSsg => {
            let inner_iters = solver.inner_iters.expect("validated");
            let (rho_hat, rho_tilde) = ipp_weights(prepared, solver, cell).expect("ipp cells carry a multiplier");
            let inner = SsgInner { policy: policy.clone(), output: solver.inner_output };
            let ipp = ipp_run_budget(
                problem, &inner, horizon, inner_iters, rho_hat, rho_tilde, x0, &mut rng, plan, &mut observer,
            )?;
            let last = ipp.centers.last().cloned().unwrap_or_else(|| ipp.trace.final_iterate.clone());
            (ipp.trace, Some((horizon, last)))
        }
    };
    let cpu_seconds = clock.elapsed();

    let initial_objective = trace.checkpoint(0).map(|c| c.objective).unwrap_or(f64::NAN);
    let mut rows = Vec::with_capacity(row_iters.len());
    let mut iterates = Vec::with_capacity(row_iters.len());
    for &it in &row_iters {
        let cp = trace
            .checkpoint(it + 1)
            .ok_or_else(|| ssg_core::SsgError::Contract(format!("checkpoint {} missing from trace", it + 1)))?;
        rows.push(MetricsRow {
            run_id: cell.run_id.clone(),
            seed,
            iteration: it,
            wall_clock_s: stamps.get(&(it + 1)).copied().unwrap_or(cpu_seconds),
            objective: cp.objective,
            infeasibility: cp.constraint.max(0.0),
            near_stationarity: None,
        });
        iterates.push(cp.x.clone());
    }
    Ok(CellResult {
        rows,
        iterates,
        initial_objective,
        cpu_seconds,
        zero_subgradient_events: trace.zero_subgradient_events.len(),
        output_iteration: output.as_ref().map(|o| o.0),
        output_point: output.map(|o| o.1),
    })
}

/// Prox weights used by the near-stationarity evaluator.
pub fn stationarity_weights(cfg: &ExperimentConfig, prepared: &Prepared) -> (f64, f64) {
    let k = prepared.problem.constants();
    let (dh, dt) = default_prox_weights(k);
    match (cfg.stationarity.rho_hat, cfg.stationarity.rho_tilde) {
        (None, None) => (dh, dt),
        (Some(h), None) => (h, if k.constraint_convex { 0.0 } else { h }),
        (None, Some(t)) => (dh, t),
        (Some(h), Some(t)) => (h, t),
    }
}

/// Fills `near_stationarity` on the configured subsample of rows. Returns
/// (evaluated, failed).
pub fn fill_stationarity(cfg: &ExperimentConfig, prepared: &Prepared, cell: &Cell, result: &mut CellResult) -> (usize, usize) {
    let (rho_hat, rho_tilde) = stationarity_weights(cfg, prepared);
    let picks = equally_spaced(result.rows.len(), cfg.stationarity.subsample);
    let root = RngStream::new(cfg.seed).substream(cell.index as u64).substream(u64::MAX - 1);
    let values: Vec<Option<f64>> = picks
        .par_iter()
        .map(|&k| {
            let mut rng = root.substream(k as u64);
            near_stationarity(
                &prepared.problem,
                &result.iterates[k],
                rho_hat,
                rho_tilde,
                cfg.stationarity.inner_iters,
                &mut rng,
            )
            .ok()
            .map(|r| r.distance)
        })
        .collect();
    let mut failed = 0;
    for (&k, v) in picks.iter().zip(values) {
        if v.is_none() {
            failed += 1;
        }
        result.rows[k].near_stationarity = v;
    }
    (picks.len(), failed)
}

/// Marks the smallest final objective among each solver's successful runs.
pub fn mark_winners(runs: &mut [RunRecord]) {
    let mut best: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (i, r) in runs.iter().enumerate() {
        if let Some(v) = r.final_objective().filter(|v| !v.is_nan()) {
            let e = best.entry(r.cell.solver).or_insert((v, i));
            if v < e.0 {
                *e = (v, i);
            }
        }
    }
    for r in runs.iter_mut() {
        r.winner = false;
    }
    for (_, (_, i)) in best {
        runs[i].winner = true;
    }
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Invalid(format!("thread pool: {e}")))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let prepared = prepare(cfg)?;
    let cells = expand_grid(cfg);
    let out = cfg.output_dir.clone();
    let runs_dir = out.join("runs");
    std::fs::create_dir_all(&runs_dir).map_err(|e| HarnessError::io(&runs_dir, e))?;
    let pool = pool(cfg.threads)?;

    let mut runs: Vec<RunRecord> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                let solver = &cfg.solvers[cell.solver];
                let weights = ipp_weights(&prepared, solver, cell);
                RunRecord {
                    cell: cell.clone(),
                    seed: cfg.seed,
                    rho_hat: weights.map(|w| w.0),
                    rho_tilde: weights.map(|w| w.1),
                    outcome: run_cell(&prepared, cfg, cell, cfg.seed).map_err(|e| e.to_string()),
                    winner: false,
                    stationarity_evaluated: 0,
                    stationarity_failures: 0,
                }
            })
            .collect()
    });
    mark_winners(&mut runs);

    if cfg.stationarity.enabled {
        pool.install(|| {
            runs.par_iter_mut()
                .filter(|r| r.winner || cfg.stationarity.runs == StationarityRuns::All)
                .for_each(|r| {
                    let cell = r.cell.clone();
                    if let Ok(res) = r.outcome.as_mut() {
                        let (n, failed) = fill_stationarity(cfg, &prepared, &cell, res);
                        r.stationarity_evaluated = n;
                        r.stationarity_failures = failed;
                    }
                })
        });
    }

    let mut run_csvs = Vec::new();
    for r in &runs {
        if let Ok(res) = &r.outcome {
            let p = runs_dir.join(format!("{}.csv", r.cell.run_id));
            write_rows(&p, &res.rows)?;
            run_csvs.push(p);
        }
    }
    let summary = out.join("summary.csv");
    write_summary(&summary, &runs)?;

    let inputs: Vec<PlotInput> = runs
        .iter()
        .filter(|r| r.winner)
        .map(|r| PlotInput { label: r.cell.label.clone(), path: runs_dir.join(format!("{}.csv", r.cell.run_id)) })
        .collect();
    let mut plots = Vec::new();
    if !inputs.is_empty() {
        let plot_dir = out.join("plots");
        for axis in [XAxis::Iterations, XAxis::CpuTime] {
            plots.extend(emit_plots(&inputs, &plot_dir, &cfg.name, axis, true)?);
        }
    }
    Ok(ExperimentOutcome { output_dir: out, runs, run_csvs, summary, plots, info: prepared.info })
}

pub const SUMMARY_HEADER: [&str; 20] = [
    "run_id",
    "method",
    "label",
    "cell",
    "replicate",
    "seed",
    "tolerance",
    "step",
    "rho_hat",
    "rho_tilde",
    "status",
    "initial_objective",
    "final_objective",
    "final_infeasibility",
    "output_iteration",
    "zero_subgradient_steps",
    "stationarity_evaluated",
    "stationarity_failures",
    "winner",
    "cpu_seconds",
];

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v}")).unwrap_or_default()
}

fn write_summary(path: &Path, runs: &[RunRecord]) -> Result<()> {
    let csv_err = |source| HarnessError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut header: Vec<&str> = SUMMARY_HEADER.to_vec();
    header.push("message");
    w.write_record(&header).map_err(csv_err)?;
    for r in runs {
        let c = &r.cell;
        let (status, message, res) = match &r.outcome {
            Ok(res) => ("ok", String::new(), Some(res)),
            Err(e) => ("failed", e.clone(), None),
        };
        w.write_record([
            c.run_id.clone(),
            c.method.as_str().to_string(),
            c.label.clone(),
            c.index.to_string(),
            c.replicate.to_string(),
            r.seed.to_string(),
            format!("{}", c.tolerance),
            format!("{}", c.step),
            opt(r.rho_hat),
            opt(r.rho_tilde),
            status.to_string(),
            opt(res.map(|s| s.initial_objective)),
            opt(res.map(|s| s.final_row().objective)),
            opt(res.map(|s| s.final_row().infeasibility)),
            res.and_then(|s| s.output_iteration).map(|t| t.to_string()).unwrap_or_default(),
            res.map(|s| s.zero_subgradient_events.to_string()).unwrap_or_default(),
            r.stationarity_evaluated.to_string(),
            r.stationarity_failures.to_string(),
            r.winner.to_string(),
            res.map(|s| format!("{:.6}", s.cpu_seconds)).unwrap_or_default(),
            message,
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// Runs only the first cell of the named solver (or the first solver).
pub fn solve_single(cfg: &ExperimentConfig, label: Option<&str>) -> Result<(Cell, CellResult)> {
    let prepared = prepare(cfg)?;
    let cells = expand_grid(cfg);
    let cell = match label {
        Some(l) => cells.into_iter().find(|c| c.label == l),
        None => cells.into_iter().next(),
    }
    .ok_or_else(|| HarnessError::Invalid(format!("no solver labelled `{}`", label.unwrap_or(""))))?;
    let mut res = run_cell(&prepared, cfg, &cell, cfg.seed)?;
    if cfg.stationarity.enabled {
        fill_stationarity(cfg, &prepared, &cell, &mut res);
    }
    Ok((cell, res))
}
