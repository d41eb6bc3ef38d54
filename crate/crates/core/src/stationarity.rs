//! Near-stationarity measurement: approximately solve the prox subproblem at
//! x, report ‖x̂(x) − x‖, and fit KKT multipliers at x̂.

use crate::error::{Result, SsgError};
use crate::ipp::ProxSubproblem;
use crate::linalg::{dist, dot, sub, DenseVector};
use crate::problem::{Constants, ProblemInstance};
use crate::projection::Projection;
use crate::rng::RngStream;
use crate::schedules::{ConstraintStep, OutputMode, Rate, StepsizePolicy};
use crate::solver::{ssg_run, CheckpointPlan};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Inner iterations used by the experiments.
pub const DEFAULT_INNER_ITERS: usize = 2500;
/// Reports whose refinement delta reaches this are flagged.
pub const REFINEMENT_TOLERANCE: f64 = 0.01;
/// Over-relaxed Polyak scale on the constraint branch of the inner solver.
pub const INNER_POLYAK_SCALE: f64 = 1.5;
const PROBE_DELTA: f64 = 1e-6;
const DEFAULT_PROBE_RADIUS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearStationarityReport {
    /// Estimate of ‖x̂(x) − x‖ from the longer run.
    pub distance: f64,
    /// Same estimate after half the iterations.
    pub short_run_distance: f64,
    pub x_hat: DenseVector,
    pub multiplier_estimate: f64,
    pub kkt_residual: f64,
    /// |d₂ − d₁| / max(d₂, ε_machine)
    pub refinement_delta: f64,
    pub inner_iters_used: usize,
    /// Set when `refinement_delta ≥ REFINEMENT_TOLERANCE`.
    pub flagged: bool,
}

/// `(ρ̂, ρ̃)` used when a caller does not choose: ρ̂ = 2·max(ρ, 1), and ρ̃ = ρ̂
/// unless the constraint is convex.
pub fn default_prox_weights(k: &Constants) -> (f64, f64) {
    let rho_hat = 2.0 * k.rho.max(1.0);
    let rho_tilde = if k.constraint_convex { 0.0 } else { rho_hat };
    (rho_hat, rho_tilde)
}

/// Solves the prox subproblem at `x` with SSG for `2·inner_iters` steps,
/// reading x̂ after `inner_iters` and after `2·inner_iters`.
///
/// The inner solver is deterministic; `rng` is accepted for interface
/// symmetry and left untouched.
pub fn near_stationarity(
    problem: &ProblemInstance,
    x: &[f64],
    rho_hat: f64,
    rho_tilde: f64,
    inner_iters: usize,
    rng: &mut RngStream,
) -> Result<NearStationarityReport> {
    if inner_iters < 1 {
        return Err(SsgError::Regime("inner_iters must be positive".into()));
    }
    let sub = ProxSubproblem::new(problem, x, rho_hat, rho_tilde)?;
    let mu = sub.objective_modulus();
    let total = 2 * inner_iters;
    let policy = StepsizePolicy::manual(
        Rate::Zero,
        Rate::InverseLinear { scale: 1.0 / mu },
        ConstraintStep::Polyak { scale: INNER_POLYAK_SCALE },
        total,
        0,
        OutputMode::OutputII,
    )?;
    let plan = CheckpointPlan::At(BTreeSet::from([inner_iters]));
    let trace = ssg_run(sub.instance(), &policy, &sub.center, rng, plan)?;
    if trace.index_set_i().is_empty() {
        let min_g = trace.g_values.iter().copied().fold(f64::INFINITY, f64::min);
        return Err(SsgError::NoFeasibleIterate { min_g });
    }
    let x1 = &trace.checkpoint(inner_iters).expect("planned checkpoint").x;
    let x_hat = trace.final_iterate.clone();
    let d1 = dist(x1, &sub.center);
    let d2 = dist(&x_hat, &sub.center);
    let refinement_delta = (d2 - d1).abs() / d2.max(f64::EPSILON);

    // Probe at the scale of the last objective step, where the iterate
    // still oscillates around the kinks of f and g.
    let eta_last = policy.objective_step_at(total - 1);
    let probe = 2.0 * eta_last * problem.constants().m + 1e-8;
    let samples = GradientSamples::collect(problem, &x_hat, &sub.center, rho_hat, rho_tilde, probe)?;
    let g_sub = sub.instance().eval_constraint(&x_hat)?.value;
    let inactive = g_sub < -2.0 * probe * sub.instance().constants().m;
    let (multiplier_estimate, kkt_residual) = if inactive {
        (0.0, samples.residual(problem.projection().as_ref(), 0.0))
    } else {
        samples.fit_multiplier(problem.projection().as_ref())
    };
    Ok(NearStationarityReport {
        distance: d2,
        short_run_distance: d1,
        x_hat,
        multiplier_estimate,
        kkt_residual,
        refinement_delta,
        inner_iters_used: total,
        flagged: refinement_delta >= REFINEMENT_TOLERANCE,
    })
}

/// Distance from `ζ_f + ρ̂(x̂−x) + λ̂(ζ_g + ρ̃(x̂−x))` to `−N_X(x̂)`, minimized
/// over ζ_f, ζ_g in the hulls of subgradients sampled at x̂ and within 1e−6
/// of it along each axis.
pub fn kkt_residual(
    problem: &ProblemInstance,
    x_hat: &[f64],
    x_center: &[f64],
    rho_hat: f64,
    rho_tilde: f64,
    lambda_hat: f64,
) -> Result<f64> {
    kkt_residual_with_probe(problem, x_hat, x_center, rho_hat, rho_tilde, lambda_hat, DEFAULT_PROBE_RADIUS)
}

pub fn kkt_residual_with_probe(
    problem: &ProblemInstance,
    x_hat: &[f64],
    x_center: &[f64],
    rho_hat: f64,
    rho_tilde: f64,
    lambda_hat: f64,
    probe: f64,
) -> Result<f64> {
    if !(lambda_hat >= 0.0) {
        return Err(SsgError::Contract(format!("lambda_hat must be >= 0, got {lambda_hat}")));
    }
    let samples = GradientSamples::collect(problem, x_hat, x_center, rho_hat, rho_tilde, probe)?;
    Ok(samples.residual(problem.projection().as_ref(), lambda_hat))
}

/// `(p − proj(p − δv))/δ`: the part of v not absorbed by −N_X(p).
fn tangent_part(projection: &dyn Projection, p: &[f64], v: &[f64]) -> DenseVector {
    let mut q: DenseVector = p.iter().zip(v).map(|(pi, vi)| pi - PROBE_DELTA * vi).collect();
    projection.project_in_place(&mut q);
    p.iter().zip(q.iter()).map(|(pi, qi)| (pi - qi) / PROBE_DELTA).collect()
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(w: &mut [f64]) {
    let mut u: Vec<f64> = w.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (k, uk) in u.iter().enumerate() {
        cum += uk;
        let t = (cum - 1.0) / (k as f64 + 1.0);
        if uk - t > 0.0 {
            theta = t;
        }
    }
    for wi in w.iter_mut() {
        *wi = (*wi - theta).max(0.0);
    }
}

struct GradientSamples {
    p: DenseVector,
    /// Subgradients of f, then ρ̂Δ.
    zf: Vec<DenseVector>,
    cf: DenseVector,
    zg: Vec<DenseVector>,
    cg: DenseVector,
}

impl GradientSamples {
    fn collect(
        problem: &ProblemInstance,
        x_hat: &[f64],
        x_center: &[f64],
        rho_hat: f64,
        rho_tilde: f64,
        probe: f64,
    ) -> Result<Self> {
        let d = x_hat.len();
        let mut points = vec![DenseVector::from(x_hat)];
        for i in 0..d {
            for s in [-1.0, 1.0] {
                let mut y = DenseVector::from(x_hat);
                y[i] += s * probe;
                points.push(y);
            }
        }
        let mut zf = Vec::with_capacity(points.len());
        let mut zg = Vec::with_capacity(points.len());
        for y in &points {
            zf.push(problem.eval_objective(y)?.subgradient);
            zg.push(problem.eval_constraint(y)?.subgradient);
        }
        let delta = sub(x_hat, x_center);
        let cf = delta.iter().map(|v| rho_hat * v).collect();
        let cg = delta.iter().map(|v| rho_tilde * v).collect();
        Ok(Self { p: x_hat.into(), zf, cf, zg, cg })
    }

    fn combine(&self, alpha: &[f64], gamma: &[f64]) -> (DenseVector, DenseVector) {
        let mut a = self.cf.clone();
        for (w, z) in alpha.iter().zip(&self.zf) {
            a.axpy(*w, z);
        }
        let mut b = self.cg.clone();
        for (w, z) in gamma.iter().zip(&self.zg) {
            b.axpy(*w, z);
        }
        (a, b)
    }

    /// FISTA on ½‖G(Aα + c_f + λ(Bγ + c_g))‖² over the two simplices.
    fn minimize(&self, projection: &dyn Projection, lambda: f64, alpha: &mut Vec<f64>, gamma: &mut Vec<f64>) -> f64 {
        let frob = |zs: &[DenseVector]| zs.iter().map(|z| z.norm_sq()).sum::<f64>();
        let lip = frob(&self.zf) + lambda * lambda * frob(&self.zg);
        let value_at = |al: &[f64], ga: &[f64]| {
            let (a, b) = self.combine(al, ga);
            let mut v = a;
            v.axpy(lambda, &b);
            tangent_part(projection, &self.p, &v)
        };
        if lip == 0.0 {
            return value_at(alpha, gamma).norm();
        }
        let step = 1.0 / lip;
        let (mut ya, mut yg) = (alpha.clone(), gamma.clone());
        let mut t = 1.0f64;
        for _ in 0..2000 {
            let r = value_at(&ya, &yg);
            let mut na: Vec<f64> = ya.iter().zip(&self.zf).map(|(w, z)| w - step * dot(z, &r)).collect();
            let mut ng: Vec<f64> = yg.iter().zip(&self.zg).map(|(w, z)| w - step * lambda * dot(z, &r)).collect();
            project_simplex(&mut na);
            project_simplex(&mut ng);
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let m = (t - 1.0) / t_next;
            ya = na.iter().zip(alpha.iter()).map(|(n, o)| n + m * (n - o)).collect();
            yg = ng.iter().zip(gamma.iter()).map(|(n, o)| n + m * (n - o)).collect();
            *alpha = na;
            *gamma = ng;
            t = t_next;
        }
        value_at(alpha, gamma).norm()
    }

    fn start(&self) -> (Vec<f64>, Vec<f64>) {
        let k = self.zf.len() as f64;
        (vec![1.0 / k; self.zf.len()], vec![1.0 / k; self.zg.len()])
    }

    fn residual(&self, projection: &dyn Projection, lambda: f64) -> f64 {
        let (mut alpha, mut gamma) = self.start();
        self.minimize(projection, lambda, &mut alpha, &mut gamma)
    }

    /// Alternates hull weights with the closed-form λ̂ = max(0, −⟨a,b⟩/‖b‖²).
    fn fit_multiplier(&self, projection: &dyn Projection) -> (f64, f64) {
        let (mut alpha, mut gamma) = self.start();
        let mut best = (0.0, self.minimize(projection, 0.0, &mut alpha, &mut gamma));
        for _ in 0..10 {
            let (a, b) = self.combine(&alpha, &gamma);
            let bb = b.norm_sq();
            let lambda = if bb > 0.0 { (-dot(&a, &b) / bb).max(0.0) } else { 0.0 };
            let r = self.minimize(projection, lambda, &mut alpha, &mut gamma);
            if r < best.1 {
                best = (lambda, r);
            }
        }
        best
    }
}
