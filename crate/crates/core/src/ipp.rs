//! Inexact proximal point: a double loop that solves a sequence of
//! quadratically regularized subproblems approximately.

use crate::error::{Result, SsgError};
use crate::linalg::{dist_sq, DenseVector};
use crate::oracle::{Oracle, StochasticOracle, SubgradientResult};
use crate::problem::{Constants, OracleSource, ProblemInstance};
use crate::rng::RngStream;
use crate::schedules::StepsizePolicy;
use crate::solver::{
    replay_iterate, ssg_run_observed, Checkpoint, CheckpointPlan, OutputSampler, SeedRecord, SolverTrace, TraceOrigin,
};
use std::collections::BTreeSet;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// `h(y) + (w/2)‖y − c‖²`
#[derive(Clone)]
pub struct ProxRegularized {
    base: Arc<dyn Oracle>,
    center: DenseVector,
    weight: f64,
}

impl Oracle for ProxRegularized {
    fn dimension(&self) -> usize {
        self.base.dimension()
    }

    fn evaluate(&self, y: &[f64]) -> SubgradientResult {
        let mut r = self.base.evaluate(y);
        if self.weight != 0.0 {
            r.value += 0.5 * self.weight * dist_sq(y, &self.center);
            for ((g, yi), ci) in r.subgradient.iter_mut().zip(y).zip(self.center.iter()) {
                *g += self.weight * (yi - ci);
            }
        }
        r
    }
}

#[derive(Clone)]
struct ProxRegularizedSampler {
    base: Arc<dyn StochasticOracle>,
    center: DenseVector,
    weight: f64,
}

impl StochasticOracle for ProxRegularizedSampler {
    fn dimension(&self) -> usize {
        self.base.dimension()
    }

    fn sample_value(&self, y: &[f64], rng: &mut RngStream) -> f64 {
        self.base.sample_value(y, rng) + 0.5 * self.weight * dist_sq(y, &self.center)
    }

    fn sample_subgradient(&self, y: &[f64], rng: &mut RngStream) -> DenseVector {
        let mut g = self.base.sample_subgradient(y, rng);
        for ((gi, yi), ci) in g.iter_mut().zip(y).zip(self.center.iter()) {
            *gi += self.weight * (yi - ci);
        }
        g
    }
}

fn regularize(source: &OracleSource, center: &DenseVector, weight: f64) -> OracleSource {
    let exact: Arc<dyn Oracle> = Arc::new(ProxRegularized {
        base: source.exact().clone(),
        center: center.clone(),
        weight,
    });
    match source.sampler() {
        None => OracleSource::Exact(exact),
        Some(s) => OracleSource::Sampled {
            exact,
            sampler: Arc::new(ProxRegularizedSampler { base: s.clone(), center: center.clone(), weight }),
        },
    }
}

/// `min f(y) + (ρ̂/2)‖y−x‖²  s.t.  g(y) + (ρ̃/2)‖y−x‖² ≤ 0,  y ∈ X`.
#[derive(Debug, Clone)]
pub struct ProxSubproblem {
    pub base: ProblemInstance,
    pub center: DenseVector,
    pub rho_hat: f64,
    pub rho_tilde: f64,
    instance: ProblemInstance,
}

impl ProxSubproblem {
    /// Requires ρ̂ > ρ, and ρ̃ = 0 or ρ < ρ̃ ≤ ρ̂.
    pub fn new(base: &ProblemInstance, center: &[f64], rho_hat: f64, rho_tilde: f64) -> Result<Self> {
        let k = base.constants();
        if !(rho_hat > k.rho) {
            return Err(SsgError::Regime(format!("need rho_hat > rho, got rho_hat={rho_hat}, rho={}", k.rho)));
        }
        if !(rho_tilde == 0.0 || (rho_tilde > k.rho && rho_tilde <= rho_hat)) {
            return Err(SsgError::Regime(format!(
                "rho_tilde={rho_tilde} must be 0 or lie in (rho, rho_hat] = ({}, {rho_hat}]",
                k.rho
            )));
        }
        let center = base.project(center)?;
        // Lemma-style radius: ‖x̂ − x‖ ≤ M/ρ̂ when X is unbounded.
        let radius = k.diameter.unwrap_or(k.m / rho_hat);
        let mut kc = Constants::new(k.m + rho_hat.max(rho_tilde) * radius, 0.0);
        kc.diameter = k.diameter;
        kc.constraint_convex = rho_tilde > 0.0 || k.constraint_convex;
        if !kc.constraint_convex {
            kc.rho = k.rho;
        }
        kc.mu = match (k.mu, rho_tilde > 0.0) {
            (Some(mu), _) if k.constraint_convex => Some(mu + rho_tilde),
            (_, true) => Some(rho_tilde - if k.constraint_convex { 0.0 } else { k.rho }).filter(|m| *m > 0.0),
            _ => k.mu,
        };
        let objective = regularize(base.objective(), &center, rho_hat);
        let constraint = regularize(base.constraint(), &center, rho_tilde);
        kc.x_feas = k
            .x_feas
            .clone()
            .filter(|x| constraint.exact().value(x) < 0.0);
        let instance = ProblemInstance::new(
            format!("prox[{}]", base.name()),
            objective,
            constraint,
            base.projection().clone(),
            kc,
        )?;
        Ok(Self { base: base.clone(), center, rho_hat, rho_tilde, instance })
    }

    pub fn instance(&self) -> &ProblemInstance {
        &self.instance
    }

    /// Strong convexity modulus of the regularized objective.
    pub fn objective_modulus(&self) -> f64 {
        self.rho_hat - self.base.constants().rho
    }
}

pub fn build_prox_subproblem(problem: &ProblemInstance, center: &[f64], rho_hat: f64, rho_tilde: f64) -> Result<ProblemInstance> {
    Ok(ProxSubproblem::new(problem, center, rho_hat, rho_tilde)?.instance)
}

/// How the inner run's point becomes the next center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerOutput {
    /// Randomized output per the inner policy's output mode.
    Sampled,
    /// The inner run's last iterate; needs no nearly-feasible step.
    #[default]
    LastIterate,
}

pub struct InnerSolution {
    pub next_center: DenseVector,
    /// Inner trace holding at least the requested iterates.
    pub trace: SolverTrace,
}

/// Approximately solves one prox subproblem.
pub trait InnerSolver: Send + Sync {
    /// Runs `iters` steps, storing the iterates listed in `keep` and calling
    /// `observer(s)` when iterate s of `keep` is reached.
    fn solve(
        &self,
        sub: &ProxSubproblem,
        iters: usize,
        keep: &BTreeSet<usize>,
        rng: &mut RngStream,
        observer: &mut dyn FnMut(usize),
    ) -> Result<InnerSolution>;
}

/// SSG as the inner solver.
#[derive(Debug, Clone)]
pub struct SsgInner {
    pub policy: StepsizePolicy,
    pub output: InnerOutput,
}

impl InnerSolver for SsgInner {
    fn solve(
        &self,
        sub: &ProxSubproblem,
        iters: usize,
        keep: &BTreeSet<usize>,
        rng: &mut RngStream,
        observer: &mut dyn FnMut(usize),
    ) -> Result<InnerSolution> {
        let policy = self.policy.with_horizon(iters);
        let plan = CheckpointPlan::At(keep.clone());
        let trace = ssg_run_observed(sub.instance(), &policy, &sub.center, rng, plan, observer)?;
        let next_center = match self.output {
            InnerOutput::LastIterate => trace.final_iterate.clone(),
            InnerOutput::Sampled => {
                let tau = OutputSampler::new(&trace, policy.output_mode)?.draw(rng);
                replay_iterate(sub.instance(), &policy, &trace, tau)?
            }
        };
        Ok(InnerSolution { next_center, trace })
    }
}

/// Parameter schedule of the ConEx inner solver:
/// `θ_t = t/(t+1)`, `η_t = c₁(t+1)`, `τ_t = c₂/(t+1)`.
///
/// This is an adapter slot; the update rules themselves are not shipped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConExInner {
    pub c1: f64,
    pub c2: f64,
}

impl ConExInner {
    pub fn theta(&self, t: usize) -> f64 {
        t as f64 / (t as f64 + 1.0)
    }

    pub fn eta(&self, t: usize) -> f64 {
        self.c1 * (t as f64 + 1.0)
    }

    pub fn tau(&self, t: usize) -> f64 {
        self.c2 / (t as f64 + 1.0)
    }
}

impl InnerSolver for ConExInner {
    fn solve(
        &self,
        _sub: &ProxSubproblem,
        _iters: usize,
        _keep: &BTreeSet<usize>,
        _rng: &mut RngStream,
        _observer: &mut dyn FnMut(usize),
    ) -> Result<InnerSolution> {
        Err(SsgError::Unimplemented("the ConEx inner solver"))
    }
}

#[derive(Debug, Clone)]
pub struct IppTrace {
    /// Inner iterations concatenated; iterate k·inner_iters is center k.
    pub trace: SolverTrace,
    /// Centers x₀, x₁, …, x_K.
    pub centers: Vec<DenseVector>,
}

/// Runs `outer_iters` prox steps with the given inner solver.
///
/// Checkpoints are indexed by total inner iterations and carry the base
/// problem's f and g.
#[allow(clippy::too_many_arguments)]
pub fn ipp_run_with(
    problem: &ProblemInstance,
    inner: &dyn InnerSolver,
    outer_iters: usize,
    inner_iters: usize,
    rho_hat: f64,
    rho_tilde: f64,
    x0: &[f64],
    rng: &mut RngStream,
    checkpoints: impl Into<CheckpointPlan>,
) -> Result<IppTrace> {
    ipp_run_observed(problem, inner, outer_iters, inner_iters, rho_hat, rho_tilde, x0, rng, checkpoints, &mut |_| {})
}

/// [`ipp_run_with`], calling `observer(t)` as each checkpointed global
/// iterate is reached.
#[allow(clippy::too_many_arguments)]
pub fn ipp_run_observed(
    problem: &ProblemInstance,
    inner: &dyn InnerSolver,
    outer_iters: usize,
    inner_iters: usize,
    rho_hat: f64,
    rho_tilde: f64,
    x0: &[f64],
    rng: &mut RngStream,
    checkpoints: impl Into<CheckpointPlan>,
    observer: &mut dyn FnMut(usize),
) -> Result<IppTrace> {
    if inner_iters < 1 || outer_iters < 1 {
        return Err(SsgError::Regime("IPP needs at least one outer and one inner iteration".into()));
    }
    let stages = vec![inner_iters; outer_iters];
    run_stages(problem, inner, &stages, rho_hat, rho_tilde, x0, rng, &checkpoints.into(), observer)
}

/// Spends exactly `budget` inner iterations in prox steps of `inner_iters`;
/// the last step is shorter when `inner_iters` does not divide `budget`.
#[allow(clippy::too_many_arguments)]
pub fn ipp_run_budget(
    problem: &ProblemInstance,
    inner: &dyn InnerSolver,
    budget: usize,
    inner_iters: usize,
    rho_hat: f64,
    rho_tilde: f64,
    x0: &[f64],
    rng: &mut RngStream,
    checkpoints: impl Into<CheckpointPlan>,
    observer: &mut dyn FnMut(usize),
) -> Result<IppTrace> {
    if inner_iters < 1 || budget < 1 {
        return Err(SsgError::Regime("IPP needs a positive budget and inner iteration count".into()));
    }
    let mut stages = vec![inner_iters; budget / inner_iters];
    if budget % inner_iters != 0 {
        stages.push(budget % inner_iters);
    }
    run_stages(problem, inner, &stages, rho_hat, rho_tilde, x0, rng, &checkpoints.into(), observer)
}

#[allow(clippy::too_many_arguments)]
fn run_stages(
    problem: &ProblemInstance,
    inner: &dyn InnerSolver,
    stages: &[usize],
    rho_hat: f64,
    rho_tilde: f64,
    x0: &[f64],
    rng: &mut RngStream,
    plan: &CheckpointPlan,
    observer: &mut dyn FnMut(usize),
) -> Result<IppTrace> {
    let horizon: usize = stages.iter().sum();
    let outer_iters = stages.len();
    let inner_iters = stages[0];
    let mut center = problem.project(x0)?;
    let mut centers = vec![center.clone()];
    let mut trace = SolverTrace {
        origin: TraceOrigin::Ipp { outer_iters, inner_iters },
        horizon,
        start: 0,
        objective_branch: Vec::with_capacity(horizon),
        eta: Vec::with_capacity(horizon),
        g_values: Vec::with_capacity(horizon),
        checkpoints: Vec::new(),
        zero_subgradient_events: Vec::new(),
        final_iterate: DenseVector::default(),
        seed: SeedRecord { seed: rng.seed(), stream: rng.stream() },
    };
    let base_checkpoint = |t: usize, x: &DenseVector| -> Result<Checkpoint> {
        Ok(Checkpoint {
            iteration: t,
            x: x.clone(),
            objective: problem.eval_objective(x)?.value,
            constraint: problem.eval_constraint(x)?.value,
            streams: None,
        })
    };
    let mut offset = 0;
    for (k, &inner_iters) in stages.iter().enumerate() {
        let wrap = |e: SsgError| SsgError::Outer { outer: k, source: Box::new(e) };
        let sub = ProxSubproblem::new(problem, &center, rho_hat, rho_tilde).map_err(wrap)?;
        let mut r = rng.substream(k as u64);
        let keep: BTreeSet<usize> = (0..inner_iters).filter(|s| plan.contains(offset + s, horizon)).collect();
        let mut inner_observer = |s: usize| {
            if keep.contains(&s) {
                observer(offset + s);
            }
        };
        let sol = inner.solve(&sub, inner_iters, &keep, &mut r, &mut inner_observer).map_err(wrap)?;
        for &s in &keep {
            let x = &sol.trace.checkpoint(s).expect("requested inner iterate is stored").x;
            trace.checkpoints.push(base_checkpoint(offset + s, x).map_err(wrap)?);
        }
        trace.objective_branch.extend_from_slice(&sol.trace.objective_branch);
        trace.eta.extend_from_slice(&sol.trace.eta);
        trace.g_values.extend_from_slice(&sol.trace.g_values);
        trace.zero_subgradient_events.extend(sol.trace.zero_subgradient_events.iter().map(|s| offset + s));
        center = sol.next_center;
        centers.push(center.clone());
        offset += inner_iters;
    }
    observer(horizon);
    trace.checkpoints.push(base_checkpoint(horizon, &center)?);
    trace.final_iterate = center;
    Ok(IppTrace { trace, centers })
}

/// IPP with SSG inside, sampling each next center per the inner policy.
#[allow(clippy::too_many_arguments)]
pub fn ipp_run(
    problem: &ProblemInstance,
    outer_iters: usize,
    inner_policy: &StepsizePolicy,
    inner_iters: usize,
    rho_hat: f64,
    rho_tilde: f64,
    x0: &[f64],
    rng: &mut RngStream,
    checkpoints: impl Into<CheckpointPlan>,
) -> Result<IppTrace> {
    let inner = SsgInner { policy: inner_policy.clone(), output: InnerOutput::default() };
    ipp_run_with(problem, &inner, outer_iters, inner_iters, rho_hat, rho_tilde, x0, rng, checkpoints)
}
