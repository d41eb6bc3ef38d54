//! Three operations for the static page in `www/`: a two-ball trajectory,
//! a schedule explorer and l1-disk convergence curves.
//!
//! The plain functions are what the native tests call; the `#[wasm_bindgen]`
//! wrappers only flatten their results for JavaScript.

use serde::Serialize;
use ssg_core::problems::{l1_over_unit_disk, synthetic_two_ball, TwoBall};
use ssg_core::schedules::{
    lambda_bound_convex, nu_prime, schedule_convex_diminishing, schedule_convex_static, schedule_strongly_convex,
    schedule_weakly_convex, ConstraintStep, Horizon, Rate, Variant, WeaklyConvexParams,
};
use ssg_core::solver::ssg_run;
use ssg_core::{DenseVector, OutputMode, RngStream, StepsizePolicy};
use wasm_bindgen::prelude::*;

/// Iterates of SSG on the two-ball instance (centers (±2, 0), radius 1,
/// objective x + 0.3y) with the weakly convex schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub points: Vec<[f64; 2]>,
    pub constraint: Vec<f64>,
    pub objective_steps: usize,
    pub tolerance: f64,
    pub step: f64,
}

pub fn two_ball(x0: [f64; 2], eps: f64, iters: usize) -> Result<Trajectory, String> {
    let tb = TwoBall::new(DenseVector::from([-2.0, 0.0]), DenseVector::from([2.0, 0.0]), 1.0).map_err(|e| e.to_string())?;
    let p = synthetic_two_ball(tb.c1.clone(), tb.c2.clone(), 1.0, DenseVector::from([1.0, 0.3])).map_err(|e| e.to_string())?;
    let policy = schedule_weakly_convex(WeaklyConvexParams {
        eps,
        m: p.constants().m,
        rho: TwoBall::RHO,
        nu: tb.calibrated_nu(360),
        eps_bar: None,
        horizon: Horizon::Iterations { count: iters.max(1) },
    })
    .map_err(|e| e.to_string())?;
    let trace = ssg_run(&p, &policy, &x0, &mut RngStream::new(0), 1).map_err(|e| e.to_string())?;
    Ok(Trajectory {
        points: trace.checkpoints.iter().map(|c| [c.x[0], c.x[1]]).collect(),
        constraint: trace.checkpoints.iter().map(|c| c.constraint).collect(),
        objective_steps: trace.index_set_i().len(),
        tolerance: policy.tolerance_at(0),
        step: policy.objective_step_at(0),
    })
}

/// What a schedule constructor produces for the given constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleSummary {
    pub kind: String,
    pub horizon: usize,
    pub start: usize,
    pub output: String,
    pub lambda: f64,
    /// `(t, ε_t, η_t)` at up to 50 log-spaced iterations.
    pub samples: Vec<(usize, f64, f64)>,
}

/// `kind` is one of `convex-static`, `convex-diminishing`,
/// `strongly-convex` (μ = 2) or `weakly-convex` (ν from the Slater value,
/// 10 000 iterations). Λ comes from the convex bound with g(x_feas) = `g_feas`.
pub fn schedule(kind: &str, eps: f64, m: f64, d: f64, rho: f64, rho_hat: f64, g_feas: f64) -> Result<ScheduleSummary, String> {
    let lambda = lambda_bound_convex(m, d, rho_hat, g_feas).map_err(|e| e.to_string())?;
    let policy = match kind {
        "convex-static" => schedule_convex_static(eps, m, d, rho, rho_hat, lambda),
        "convex-diminishing" => schedule_convex_diminishing(eps, m, d, rho, rho_hat, lambda),
        "strongly-convex" => schedule_strongly_convex(eps, m, d, rho, rho_hat, 2.0, Variant::Static),
        "weakly-convex" => schedule_weakly_convex(WeaklyConvexParams {
            eps,
            m,
            rho,
            nu: nu_prime(g_feas, d).map_err(|e| e.to_string())?,
            eps_bar: None,
            horizon: Horizon::Iterations { count: 10_000 },
        }),
        other => return Err(format!("unknown schedule kind {other:?}")),
    }
    .map_err(|e| e.to_string())?;
    Ok(ScheduleSummary {
        kind: format!("{:?}", policy.kind),
        horizon: policy.horizon,
        start: policy.start,
        output: format!("{:?}", policy.output_mode),
        lambda,
        samples: log_spaced(policy.horizon, 50)
            .into_iter()
            .map(|t| (t, policy.tolerance_at(t), policy.objective_step_at(t)))
            .collect(),
    })
}

fn log_spaced(horizon: usize, count: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..count)
        .map(|k| ((horizon as f64).powf(k as f64 / (count - 1) as f64) - 1.0).round() as usize)
        .map(|t| t.min(horizon.saturating_sub(1)))
        .collect();
    out.dedup();
    out
}

/// Objective and infeasibility of SSG on min ‖x − (2,2)‖₁ s.t. ‖x‖² ≤ 1 at
/// constant ε and η, from the origin.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curves {
    pub iteration: Vec<usize>,
    pub objective: Vec<f64>,
    pub infeasibility: Vec<f64>,
}

/// The optimal value, 4 − √2.
pub const L1_DISK_OPTIMUM: f64 = 4.0 - std::f64::consts::SQRT_2;

pub fn l1_disk(tolerance: f64, step: f64, iters: usize, points: usize) -> Result<Curves, String> {
    let p = l1_over_unit_disk(DenseVector::from([2.0, 2.0]), 3.0).map_err(|e| e.to_string())?;
    let policy = StepsizePolicy::manual(
        Rate::Constant { value: tolerance },
        Rate::Constant { value: step },
        ConstraintStep::SameAsObjective,
        iters.max(1),
        0,
        OutputMode::OutputI,
    )
    .map_err(|e| e.to_string())?;
    let stride = (iters / points.max(1)).max(1);
    let trace = ssg_run(&p, &policy, &[0.0, 0.0], &mut RngStream::new(0), stride).map_err(|e| e.to_string())?;
    Ok(Curves {
        iteration: trace.checkpoints.iter().map(|c| c.iteration).collect(),
        objective: trace.checkpoints.iter().map(|c| c.objective).collect(),
        infeasibility: trace.checkpoints.iter().map(|c| c.constraint.max(0.0)).collect(),
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

/// JSON of [`Trajectory`].
#[wasm_bindgen(js_name = twoBall)]
pub fn two_ball_js(x: f64, y: f64, eps: f64, iters: usize) -> Result<String, JsError> {
    to_js(two_ball([x, y], eps, iters))
}

/// JSON of [`ScheduleSummary`].
#[wasm_bindgen(js_name = schedule)]
pub fn schedule_js(kind: &str, eps: f64, m: f64, d: f64, rho: f64, rho_hat: f64, g_feas: f64) -> Result<String, JsError> {
    to_js(schedule(kind, eps, m, d, rho, rho_hat, g_feas))
}

/// JSON of [`Curves`].
#[wasm_bindgen(js_name = l1Disk)]
pub fn l1_disk_js(tolerance: f64, step: f64, iters: usize, points: usize) -> Result<String, JsError> {
    to_js(l1_disk(tolerance, step, iters, points))
}
