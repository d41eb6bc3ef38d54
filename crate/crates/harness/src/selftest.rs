//! Invariant suites runnable from the CLI.

use ssg_core::checks::{finite_difference_check, nonexpansiveness_ratio, weak_convexity_gap, FdOutcome};
use ssg_core::linalg::{dist, SparseVector};
use ssg_core::oracle::Oracle;
use ssg_core::problems::elementary::{Affine, NormDistance};
use ssg_core::problems::{
    dp_oracle, erm_pretrain, hinge_erm_oracle, lipschitz_constants, roc_fairness_oracle, theta_grid, LinearClassifierData,
    Scad,
};
use ssg_core::solver::polyak_feasibility_run;
use ssg_core::{Ball, BoxSet, Constants, DenseVector, ProblemInstance, Projection, RngStream};
use std::sync::Arc;

pub const FD_STEP: f64 = 1e-6;
/// Averaged losses over n rows kink by O(1/n) per row, so this sits well below 1/n.
pub const FD_KINK_TOL: f64 = 1e-5;
pub const FD_REL_TOL: f64 = 1e-4;
pub const CONVEXITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn random_point(rng: &mut RngStream, dim: usize, scale: f64) -> DenseVector {
    (0..dim).map(|_| rng.uniform_range(-scale, scale)).collect()
}

/// Finite differences against the oracle at `want` random non-kink points.
pub fn fd_suite(name: &str, oracle: &dyn Oracle, want: usize, scale: f64, rng: &mut RngStream) -> CheckLine {
    let (mut checked, mut kinks, mut worst) = (0usize, 0usize, 0.0f64);
    let mut failures = 0usize;
    while checked < want && kinks < 20 * want {
        let x = random_point(rng, oracle.dimension(), scale);
        match finite_difference_check(oracle, &x, FD_STEP, FD_KINK_TOL) {
            FdOutcome::Kink { .. } => kinks += 1,
            FdOutcome::Checked { relative_error } => {
                checked += 1;
                worst = worst.max(relative_error);
                if !(relative_error < FD_REL_TOL) {
                    failures += 1;
                }
            }
        }
    }
    CheckLine {
        name: format!("finite differences, {name}"),
        passed: checked == want && failures == 0,
        detail: format!("{checked} points, {kinks} skipped as kinks, worst relative error {worst:.2e}"),
    }
}

/// Midpoint-style convexity of `h + (ρ/2)‖·‖²` over random triples (x, y, t).
pub fn convexity_suite(name: &str, oracle: &dyn Oracle, rho: f64, triples: usize, scale: f64, rng: &mut RngStream) -> CheckLine {
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..triples {
        let x = random_point(rng, oracle.dimension(), scale);
        let y = random_point(rng, oracle.dimension(), scale);
        let t = rng.uniform();
        worst = worst.max(weak_convexity_gap(oracle, rho, &x, &y, t));
    }
    CheckLine {
        name: format!("weak convexity, {name} with rho={rho:.4}"),
        passed: worst <= CONVEXITY_TOL,
        detail: format!("{triples} triples, largest gap {worst:.2e}"),
    }
}

pub fn projection_suite(name: &str, projection: &dyn Projection, dim: usize, pairs: usize, rng: &mut RngStream) -> CheckLine {
    let mut worst = 0.0f64;
    let mut idempotent = true;
    for _ in 0..pairs {
        let x = random_point(rng, dim, 5.0);
        let y = random_point(rng, dim, 5.0);
        worst = worst.max(nonexpansiveness_ratio(projection, &x, &y));
        let mut p = x.to_vec();
        projection.project_in_place(&mut p);
        let mut q = p.clone();
        projection.project_in_place(&mut q);
        idempotent &= dist(&p, &q) <= 1e-12;
    }
    CheckLine {
        name: format!("projection, {name}"),
        passed: worst <= 1.0 + 1e-12 && idempotent,
        detail: format!("largest ratio {worst:.6}, idempotent {idempotent}"),
    }
}

/// Polyak steps on `‖x‖ − 1` over ball(3) from ‖x₀‖ = 2.
pub fn polyak_suite(dim: usize, rng: &mut RngStream) -> CheckLine {
    let mut k = Constants::new(1.0, 0.0);
    k.x_feas = Some(DenseVector::zeros(dim));
    let problem = ProblemInstance::new(
        "norm-ball",
        Affine { coefficients: DenseVector::zeros(dim), offset: 0.0 },
        NormDistance { center: DenseVector::zeros(dim), radius: 1.0 },
        Arc::new(Ball::centered(dim, 3.0)),
        k,
    );
    let problem = match problem {
        Ok(p) => p,
        Err(e) => return CheckLine { name: "polyak contraction".into(), passed: false, detail: e.to_string() },
    };
    let mut x0 = random_point(rng, dim, 1.0);
    let n = x0.norm().max(1e-12);
    x0.scale(2.0 / n);
    match polyak_feasibility_run(&problem, &x0, 200, 0.0) {
        Ok(trace) => {
            let xf = &trace.final_iterate;
            let d = (xf.norm() - 1.0).max(0.0);
            CheckLine {
                name: "polyak contraction".into(),
                passed: d < 1e-6 && trace.horizon <= 200,
                detail: format!("dist(x, S) = {d:.2e} after {} steps", trace.horizon),
            }
        }
        Err(e) => CheckLine { name: "polyak contraction".into(), passed: false, detail: e.to_string() },
    }
}

/// Dense random features with groups split on the sign of feature 0.
pub fn synthetic_classifier(n: usize, dim: usize, rng: &mut RngStream) -> LinearClassifierData {
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let a: Vec<f64> = (0..dim).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
        let noise = 0.3 * rng.standard_normal();
        labels.push(if a[1] + 0.5 * a[0] + noise > 0.0 { 1.0 } else { -1.0 });
        features.push(SparseVector::from_dense(&a));
    }
    let mut data = LinearClassifierData::new(dim, features.clone(), labels).expect("labels are ±1");
    for a in features {
        if a.get(0) > 0.0 {
            data.group_p.push(a);
        } else {
            data.group_u.push(a);
        }
    }
    data
}

/// The classification oracles and SCAD on `data`.
pub fn oracle_suites(data: &Arc<LinearClassifierData>, points: usize, triples: usize, rng: &mut RngStream) -> Vec<CheckLine> {
    let mut out = Vec::new();
    let scale = 1.0;
    let (_, beta) = match lipschitz_constants(data) {
        Ok(v) => v,
        Err(e) => return vec![CheckLine { name: "fairness constants".into(), passed: false, detail: e.to_string() }],
    };
    let scad = Scad { dim: data.dim };
    out.push(fd_suite("SCAD", &scad, points, 3.0, rng));
    match hinge_erm_oracle(data.clone()) {
        Ok(h) => out.push(fd_suite("hinge loss", &h, points, scale, rng)),
        Err(e) => out.push(CheckLine { name: "hinge loss".into(), passed: false, detail: e.to_string() }),
    }
    match erm_pretrain(data.clone(), 300, 0.1).and_then(|(_, x)| theta_grid(data, &x)).and_then(|g| roc_fairness_oracle(data, &g)) {
        Ok(roc) => out.push(fd_suite("ROC fairness", &roc, points, scale, rng)),
        Err(e) => out.push(CheckLine { name: "ROC fairness".into(), passed: false, detail: e.to_string() }),
    }
    match dp_oracle(data) {
        Ok(dp) => {
            out.push(fd_suite("DP fairness", &dp, points, scale, rng));
            out.push(convexity_suite("DP fairness", &dp, beta, triples, scale, rng));
        }
        Err(e) => out.push(CheckLine { name: "DP fairness".into(), passed: false, detail: e.to_string() }),
    }
    out.push(convexity_suite("SCAD", &scad, Scad::RHO, triples, 3.0, rng));
    out
}

/// Every suite on small synthetic inputs; finishes in seconds.
pub fn run_selftest(seed: u64) -> Vec<CheckLine> {
    let mut rng = RngStream::new(seed);
    let data = Arc::new(synthetic_classifier(120, 5, &mut rng));
    let mut out = oracle_suites(&data, 200, 2000, &mut rng);
    out.push(projection_suite("ball(2) in R^4", &Ball::centered(4, 2.0), 4, 500, &mut rng));
    out.push(projection_suite("box [-1,1]^4", &BoxSet::cube(4, -1.0, 1.0), 4, 500, &mut rng));
    out.push(polyak_suite(3, &mut rng));
    out
}
