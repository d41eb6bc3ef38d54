//! The two fairness-constrained classification problems.

use crate::error::{Result, SsgError};
use crate::linalg::DenseVector;
use crate::oracle::Oracle;
use crate::problem::{Constants, ProblemInstance};
use crate::problems::classifier::{hinge_erm_oracle, theta_grid, LinearClassifierData};
use crate::problems::compose::{Shifted, WeightedSum};
use crate::problems::fairness::{dp_oracle, lipschitz_constants, roc_fairness_oracle};
use crate::problems::scad::Scad;
use crate::projection::{Ball, Whole};
use std::sync::Arc;

/// `min L(x) + λ·SCAD(x)  s.t.  R₀(x) − κ ≤ 0` over ℝ^d.
///
/// ρ = max{2λ, β}. The origin is a Slater point since R₀(0) = 0.
pub fn dp_problem(data: Arc<LinearClassifierData>, lambda: f64, kappa: f64) -> Result<ProblemInstance> {
    if !(lambda >= 0.0) {
        return Err(SsgError::Regime(format!("lambda must be nonnegative, got {lambda}")));
    }
    if !(kappa > 0.0) {
        return Err(SsgError::Regime(format!("kappa must be positive, got {kappa}")));
    }
    let hinge = hinge_erm_oracle(data.clone())?;
    let scad = Scad { dim: data.dim };
    let (alpha, beta) = lipschitz_constants(&data)?;
    let m = (hinge.lipschitz() + lambda * scad.lipschitz()).max(alpha).max(f64::MIN_POSITIVE);
    let objective = WeightedSum::new(vec![
        (1.0, Arc::new(hinge) as Arc<dyn Oracle>),
        (lambda, Arc::new(scad) as Arc<dyn Oracle>),
    ])?;
    let constraint = Shifted { base: Arc::new(dp_oracle(&data)?), offset: -kappa };
    let mut k = Constants::new(m, (2.0 * lambda).max(beta));
    k.x_feas = Some(DenseVector::zeros(data.dim));
    k.constraint_convex = false;
    ProblemInstance::new("demographic-parity", objective, constraint, Arc::new(Whole), k)
}

/// `min R(x)  s.t.  L(x) − L* − κ ≤ 0,  ‖x‖ ≤ r` with κ = `kappa_frac`·L* and
/// r = `radius_mult`·‖x_erm‖. The threshold grid is built from `x_erm`.
pub fn roc_problem(
    data: Arc<LinearClassifierData>,
    l_star: f64,
    kappa_frac: f64,
    radius_mult: f64,
    x_erm: &DenseVector,
) -> Result<ProblemInstance> {
    if !(kappa_frac > 0.0 && l_star > 0.0) {
        return Err(SsgError::Regime(format!(
            "need kappa > 0, got kappa_frac={kappa_frac} and L*={l_star}"
        )));
    }
    let radius = radius_mult * x_erm.norm();
    if !(radius > 0.0) {
        return Err(SsgError::Regime("ball radius from x_erm is zero".into()));
    }
    let kappa = kappa_frac * l_star;
    let grid = theta_grid(&data, x_erm)?;
    let roc = roc_fairness_oracle(&data, &grid)?;
    let hinge = hinge_erm_oracle(data.clone())?;
    let (alpha, beta) = lipschitz_constants(&data)?;
    let m = alpha.max(hinge.lipschitz()).max(f64::MIN_POSITIVE);
    let constraint = Shifted { base: Arc::new(hinge), offset: -l_star - kappa };
    let mut k = Constants::new(m, beta);
    k.x_feas = Some(x_erm.clone());
    k.constraint_convex = true;
    ProblemInstance::new(
        "roc-fairness",
        roc,
        constraint,
        Arc::new(Ball::centered(data.dim, radius)),
        k,
    )
}
