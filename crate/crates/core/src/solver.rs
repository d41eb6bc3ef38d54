//! The switching subgradient method, deterministic and stochastic, and the
//! randomized output rule.

use crate::error::{Result, SsgError};
use crate::linalg::DenseVector;
use crate::problem::ProblemInstance;
use crate::rng::{RngStream, StreamPosition};
use crate::schedules::{ConstraintStep, OutputMode, StepsizePolicy};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Which iterates to keep. x^(0) and x^(T) are always kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckpointPlan {
    Every(usize),
    At(BTreeSet<usize>),
}

impl CheckpointPlan {
    pub fn contains(&self, t: usize, horizon: usize) -> bool {
        if t == 0 || t == horizon {
            return true;
        }
        match self {
            CheckpointPlan::Every(k) => *k > 0 && t % k == 0,
            CheckpointPlan::At(set) => set.contains(&t),
        }
    }
}

impl From<usize> for CheckpointPlan {
    fn from(k: usize) -> Self {
        CheckpointPlan::Every(k)
    }
}

/// A stored iterate x^(t) with exact f and g values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub iteration: usize,
    pub x: DenseVector,
    pub objective: f64,
    pub constraint: f64,
    /// Value and subgradient stream positions before step `iteration`.
    pub streams: Option<[StreamPosition; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TraceOrigin {
    Ssg,
    Sssg { batch_size: usize },
    Ipp { outer_iters: usize, inner_iters: usize },
    Feasibility { target: f64, reached: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub seed: u64,
    pub stream: u64,
}

/// Everything a run did, sufficient to re-create any iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub origin: TraceOrigin,
    pub horizon: usize,
    pub start: usize,
    /// `objective_branch[t]` is true when step t moved along ζ_f.
    pub objective_branch: Vec<bool>,
    pub eta: Vec<f64>,
    /// g(x^(t)), or the batch mean ω̄ in stochastic runs.
    pub g_values: Vec<f64>,
    pub checkpoints: Vec<Checkpoint>,
    /// Constraint steps where ζ_g = 0 forced a zero Polyak step.
    pub zero_subgradient_events: Vec<usize>,
    pub final_iterate: DenseVector,
    pub seed: SeedRecord,
}

impl SolverTrace {
    /// I: iterations t ≥ S that took the objective branch.
    pub fn index_set_i(&self) -> Vec<usize> {
        (self.start..self.horizon).filter(|&t| self.objective_branch[t]).collect()
    }

    /// J: iterations t ≥ S that took the constraint branch.
    pub fn index_set_j(&self) -> Vec<usize> {
        (self.start..self.horizon).filter(|&t| !self.objective_branch[t]).collect()
    }

    pub fn checkpoint(&self, t: usize) -> Option<&Checkpoint> {
        self.checkpoints
            .binary_search_by_key(&t, |c| c.iteration)
            .ok()
            .map(|k| &self.checkpoints[k])
    }

    fn checkpoint_at_or_before(&self, t: usize) -> Option<&Checkpoint> {
        let k = self.checkpoints.partition_point(|c| c.iteration <= t);
        k.checked_sub(1).map(|k| &self.checkpoints[k])
    }

    fn min_g_recorded(&self) -> f64 {
        self.g_values[self.start..]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Same iterates, branches, stepsizes and switching values.
    pub fn same_path(&self, other: &SolverTrace) -> bool {
        self.horizon == other.horizon
            && self.start == other.start
            && self.objective_branch == other.objective_branch
            && self.eta == other.eta
            && self.g_values == other.g_values
            && self.final_iterate == other.final_iterate
            && self.checkpoints.len() == other.checkpoints.len()
            && self
                .checkpoints
                .iter()
                .zip(&other.checkpoints)
                .all(|(a, b)| a.iteration == b.iteration && a.x == b.x)
    }
}

/// `scale · g / ‖ζ‖²`, or 0 when ζ = 0. `g` must already be the positive part.
pub fn polyak_step(g_value: f64, subgrad_norm_sq: f64, scale: f64) -> Result<f64> {
    if g_value < 0.0 {
        return Err(SsgError::Contract(format!("Polyak step needs g_+ >= 0, got {g_value}")));
    }
    if subgrad_norm_sq < 0.0 {
        return Err(SsgError::Contract("negative squared norm".into()));
    }
    if subgrad_norm_sq == 0.0 {
        return Ok(0.0);
    }
    Ok(scale * g_value / subgrad_norm_sq)
}

struct StepRecord {
    objective: bool,
    eta: f64,
    g: f64,
    zero_subgradient: bool,
}

enum Sampling {
    Exact,
    Stochastic {
        batch_size: usize,
        values: RngStream,
        subgradients: RngStream,
    },
}

struct Stepper<'a> {
    problem: &'a ProblemInstance,
    policy: &'a StepsizePolicy,
    sampling: Sampling,
}

impl Stepper<'_> {
    fn streams(&self) -> Option<[StreamPosition; 2]> {
        match &self.sampling {
            Sampling::Exact => None,
            Sampling::Stochastic { values, subgradients, .. } => {
                Some([values.position(), subgradients.position()])
            }
        }
    }

    fn step(&mut self, t: usize, x: &mut DenseVector) -> Result<StepRecord> {
        let eps_t = self.policy.tolerance_at(t);
        let (g, objective, direction) = match &mut self.sampling {
            Sampling::Exact => {
                let gr = self.problem.eval_constraint(x)?;
                if gr.value <= eps_t {
                    let fr = self.problem.eval_objective(x)?;
                    (gr.value, true, fr.subgradient)
                } else {
                    (gr.value, false, gr.subgradient)
                }
            }
            Sampling::Stochastic { batch_size, values, subgradients } => {
                let mut sum = 0.0;
                for _ in 0..*batch_size {
                    sum += self.problem.sample_constraint_value(x, values)?;
                }
                let mean = sum / *batch_size as f64;
                let objective = mean <= eps_t;
                let xi = self.problem.sample_subgradient(objective, x, subgradients)?;
                (mean, objective, xi)
            }
        };
        let (eta, zero_subgradient) = if objective {
            (self.policy.objective_step_at(t), false)
        } else {
            let nsq = direction.norm_sq();
            let eta = self.policy.constraint_step_at(t, g, nsq)?;
            let zero = nsq == 0.0 && matches!(self.policy.constraint_step, ConstraintStep::Polyak { .. });
            (eta, zero)
        };
        if eta != 0.0 {
            x.axpy(-eta, &direction);
            self.problem.projection().project_in_place(x);
        }
        if !x.is_finite() {
            return Err(SsgError::NonFinite { what: "iterate", iteration: Some(t + 1) });
        }
        Ok(StepRecord { objective, eta, g, zero_subgradient })
    }
}

fn checkpoint(problem: &ProblemInstance, t: usize, x: &DenseVector, streams: Option<[StreamPosition; 2]>) -> Result<Checkpoint> {
    Ok(Checkpoint {
        iteration: t,
        x: x.clone(),
        objective: problem.eval_objective(x)?.value,
        constraint: problem.eval_constraint(x)?.value,
        streams,
    })
}

fn run(
    problem: &ProblemInstance,
    policy: &StepsizePolicy,
    x0: &[f64],
    mut stepper: Stepper<'_>,
    origin: TraceOrigin,
    seed: SeedRecord,
    plan: &CheckpointPlan,
    observer: &mut dyn FnMut(usize),
) -> Result<SolverTrace> {
    policy.validate()?;
    let horizon = policy.horizon;
    let mut x = problem.project(x0)?;
    let mut trace = SolverTrace {
        origin,
        horizon,
        start: policy.start,
        objective_branch: Vec::with_capacity(horizon),
        eta: Vec::with_capacity(horizon),
        g_values: Vec::with_capacity(horizon),
        checkpoints: Vec::new(),
        zero_subgradient_events: Vec::new(),
        final_iterate: DenseVector::default(),
        seed,
    };
    for t in 0..horizon {
        if plan.contains(t, horizon) {
            observer(t);
            trace.checkpoints.push(checkpoint(problem, t, &x, stepper.streams())?);
        }
        let rec = stepper.step(t, &mut x).map_err(|e| e.at_iteration(t))?;
        trace.objective_branch.push(rec.objective);
        trace.eta.push(rec.eta);
        trace.g_values.push(rec.g);
        if rec.zero_subgradient {
            trace.zero_subgradient_events.push(t);
        }
    }
    observer(horizon);
    trace.checkpoints.push(checkpoint(problem, horizon, &x, stepper.streams())?);
    trace.final_iterate = x;
    Ok(trace)
}

/// Deterministic switching subgradient method.
///
/// Runs exactly `policy.horizon` iterations from `proj(x0)`. The stream is not
/// consumed; its seed is recorded for provenance.
pub fn ssg_run(
    problem: &ProblemInstance,
    policy: &StepsizePolicy,
    x0: &[f64],
    rng: &mut RngStream,
    checkpoints: impl Into<CheckpointPlan>,
) -> Result<SolverTrace> {
    ssg_run_observed(problem, policy, x0, rng, checkpoints, &mut |_| {})
}

/// [`ssg_run`], calling `observer(t)` as each checkpointed iterate is reached.
pub fn ssg_run_observed(
    problem: &ProblemInstance,
    policy: &StepsizePolicy,
    x0: &[f64],
    rng: &mut RngStream,
    checkpoints: impl Into<CheckpointPlan>,
    observer: &mut dyn FnMut(usize),
) -> Result<SolverTrace> {
    let stepper = Stepper { problem, policy, sampling: Sampling::Exact };
    let seed = SeedRecord { seed: rng.seed(), stream: rng.stream() };
    run(problem, policy, x0, stepper, TraceOrigin::Ssg, seed, &checkpoints.into(), observer)
}

/// Stochastic switching subgradient method.
///
/// Each iteration averages `batch_size` value samples of g to decide the
/// branch, then draws one stochastic subgradient of the chosen function.
/// Value and subgradient draws come from separate sub-streams of `rng`.
pub fn sssg_run(
    problem: &ProblemInstance,
    policy: &StepsizePolicy,
    x0: &[f64],
    batch_size: usize,
    rng: &mut RngStream,
    checkpoints: impl Into<CheckpointPlan>,
) -> Result<SolverTrace> {
    sssg_run_observed(problem, policy, x0, batch_size, rng, checkpoints, &mut |_| {})
}

pub fn sssg_run_observed(
    problem: &ProblemInstance,
    policy: &StepsizePolicy,
    x0: &[f64],
    batch_size: usize,
    rng: &mut RngStream,
    checkpoints: impl Into<CheckpointPlan>,
    observer: &mut dyn FnMut(usize),
) -> Result<SolverTrace> {
    if batch_size < 1 {
        return Err(SsgError::Regime("batch size must be at least 1".into()));
    }
    let stepper = Stepper {
        problem,
        policy,
        sampling: Sampling::Stochastic {
            batch_size,
            values: rng.substream(0),
            subgradients: rng.substream(1),
        },
    };
    let seed = SeedRecord { seed: rng.seed(), stream: rng.stream() };
    let origin = TraceOrigin::Sssg { batch_size };
    run(problem, policy, x0, stepper, origin, seed, &checkpoints.into(), observer)
}

/// Re-creates x^(t) by replaying from the nearest earlier checkpoint.
pub fn replay_iterate(problem: &ProblemInstance, policy: &StepsizePolicy, trace: &SolverTrace, t: usize) -> Result<DenseVector> {
    if t > trace.horizon {
        return Err(SsgError::Contract(format!("iteration {t} beyond horizon {}", trace.horizon)));
    }
    let cp = trace
        .checkpoint_at_or_before(t)
        .ok_or_else(|| SsgError::Contract("trace has no checkpoints".into()))?;
    if cp.iteration == t {
        return Ok(cp.x.clone());
    }
    let sampling = match trace.origin {
        TraceOrigin::Ssg => Sampling::Exact,
        TraceOrigin::Sssg { batch_size } => {
            let [v, s] = cp
                .streams
                .ok_or_else(|| SsgError::Contract("stochastic checkpoint lacks stream positions".into()))?;
            Sampling::Stochastic {
                batch_size,
                values: RngStream::at_position(v),
                subgradients: RngStream::at_position(s),
            }
        }
        _ => {
            return Err(SsgError::Contract(
                "only single-loop traces can be replayed; store every iterate instead".into(),
            ))
        }
    };
    let mut stepper = Stepper { problem, policy, sampling };
    let mut x = cp.x.clone();
    for s in cp.iteration..t {
        stepper.step(s, &mut x).map_err(|e| e.at_iteration(s))?;
    }
    Ok(x)
}

/// Categorical distribution over an index set with weights η_t.
#[derive(Debug, Clone)]
pub struct OutputSampler {
    indices: Vec<usize>,
    cumulative: Vec<f64>,
}

impl OutputSampler {
    pub fn new(trace: &SolverTrace, mode: OutputMode) -> Result<Self> {
        let indices = match mode {
            OutputMode::OutputI => trace.index_set_i(),
            OutputMode::OutputII => (trace.start..trace.horizon).collect(),
        };
        if indices.is_empty() {
            return Err(SsgError::NoFeasibleIterate { min_g: trace.min_g_recorded() });
        }
        let mut total = 0.0;
        let cumulative: Vec<f64> = indices
            .iter()
            .map(|&t| {
                total += trace.eta[t];
                total
            })
            .collect();
        if !(total > 0.0 && total.is_finite()) {
            return Err(SsgError::Contract(format!("output weights sum to {total}")));
        }
        Ok(Self { indices, cumulative })
    }

    /// P(t) = η_t / Σ_s η_s over the index set.
    pub fn probability(&self, t: usize) -> f64 {
        let total = *self.cumulative.last().unwrap();
        match self.indices.binary_search(&t) {
            Ok(k) => {
                let prev = if k == 0 { 0.0 } else { self.cumulative[k - 1] };
                (self.cumulative[k] - prev) / total
            }
            Err(_) => 0.0,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn draw(&self, rng: &mut RngStream) -> usize {
        let total = *self.cumulative.last().unwrap();
        let u = rng.uniform() * total;
        let k = self.cumulative.partition_point(|&c| c <= u);
        self.indices[k.min(self.indices.len() - 1)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSample {
    pub tau: usize,
    pub x_tau: DenseVector,
    pub mode: OutputMode,
}

/// Draws τ with probability ∝ η_τ and recovers x^(τ).
pub fn sample_output(
    problem: &ProblemInstance,
    policy: &StepsizePolicy,
    trace: &SolverTrace,
    mode: OutputMode,
    rng: &mut RngStream,
) -> Result<OutputSample> {
    let tau = OutputSampler::new(trace, mode)?.draw(rng);
    let x_tau = replay_iterate(problem, policy, trace, tau)?;
    Ok(OutputSample { tau, x_tau, mode })
}

/// Projected subgradient method on g_+ with Polyak steps.
///
/// Stops as soon as `g_+(x) ≤ target` or after `max_iters` steps. Every
/// iterate is kept.
pub fn polyak_feasibility_run(problem: &ProblemInstance, x0: &[f64], max_iters: usize, target: f64) -> Result<SolverTrace> {
    let mut x = problem.project(x0)?;
    let mut trace = SolverTrace {
        origin: TraceOrigin::Feasibility { target, reached: false },
        horizon: 0,
        start: 0,
        objective_branch: Vec::new(),
        eta: Vec::new(),
        g_values: Vec::new(),
        checkpoints: Vec::new(),
        zero_subgradient_events: Vec::new(),
        final_iterate: DenseVector::default(),
        seed: SeedRecord { seed: 0, stream: 0 },
    };
    let mut reached = false;
    for t in 0..=max_iters {
        let gr = problem.eval_constraint(&x)?;
        let fv = problem.eval_objective(&x)?.value;
        trace.checkpoints.push(Checkpoint {
            iteration: t,
            x: x.clone(),
            objective: fv,
            constraint: gr.value,
            streams: None,
        });
        let gp = gr.value.max(0.0);
        if gp <= target {
            reached = true;
            break;
        }
        if t == max_iters {
            break;
        }
        let nsq = gr.subgradient.norm_sq();
        let eta = polyak_step(gp, nsq, 1.0)?;
        if nsq == 0.0 {
            trace.zero_subgradient_events.push(t);
        }
        x.axpy(-eta, &gr.subgradient);
        problem.projection().project_in_place(&mut x);
        if !x.is_finite() {
            return Err(SsgError::NonFinite { what: "iterate", iteration: Some(t + 1) });
        }
        trace.objective_branch.push(false);
        trace.eta.push(eta);
        trace.g_values.push(gr.value);
    }
    trace.horizon = trace.eta.len();
    trace.origin = TraceOrigin::Feasibility { target, reached };
    trace.final_iterate = x;
    Ok(trace)
}
