#![allow(dead_code)]

use ssg_core::oracle::FnOracle;
use ssg_core::problems::elementary::{sign0, Constant};
use ssg_core::{BoxSet, Constants, DenseVector, ProblemInstance};
use std::sync::Arc;

pub fn abs_1d() -> FnOracle<impl Fn(&[f64]) -> (f64, DenseVector) + Send + Sync> {
    FnOracle::new(1, |x: &[f64]| (x[0].abs(), DenseVector::from([sign0(x[0])])))
}

pub fn linear_1d(c: f64, b: f64) -> FnOracle<impl Fn(&[f64]) -> (f64, DenseVector) + Send + Sync> {
    FnOracle::new(1, move |x: &[f64]| (c * x[0] + b, DenseVector::from([c])))
}

/// `min |y| s.t. y − 1 ≤ 0, y ∈ [−2, 2]`
pub fn abs_below_one() -> ProblemInstance {
    let mut k = Constants::new(1.0, 0.0);
    k.x_feas = Some(DenseVector::from([0.0]));
    ProblemInstance::new("abs", abs_1d(), linear_1d(1.0, -1.0), Arc::new(BoxSet::cube(1, -2.0, 2.0)), k).unwrap()
}

/// Objective `f` on `[lo, hi]` with the always-satisfied constraint `g ≡ −1`.
pub fn unconstrained_1d<O: ssg_core::Oracle + 'static>(f: O, lo: f64, hi: f64, m: f64) -> ProblemInstance {
    ProblemInstance::new(
        "free",
        f,
        Constant { dim: 1, value: -1.0 },
        Arc::new(BoxSet::cube(1, lo, hi)),
        Constants::new(m, 0.0),
    )
    .unwrap()
}

/// Exhaustive search for `argmin |y| + (ρ̂/2)(y−x)²  s.t.  y ≤ 1` over `[−2, 2]`.
pub fn grid_prox_abs(x: f64, rho_hat: f64, step: f64) -> f64 {
    let n = (4.0 / step).round() as i64;
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..=n {
        let y = -2.0 + k as f64 * step;
        if y > 1.0 {
            break;
        }
        let v = y.abs() + 0.5 * rho_hat * (y - x).powi(2);
        if v < best.0 {
            best = (v, y);
        }
    }
    best.1
}

/// Random classifier data with groups split on the sign of feature 0.
pub fn random_classifier(n: usize, dim: usize, seed: u64) -> ssg_core::problems::LinearClassifierData {
    use ssg_core::linalg::SparseVector;
    let mut rng = ssg_core::RngStream::new(seed);
    let mut features = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let mut pairs = Vec::new();
        for j in 0..dim {
            if rng.uniform() < 0.7 {
                pairs.push((j, rng.uniform_range(-1.0, 1.0)));
            }
        }
        let a = SparseVector::from_pairs(pairs);
        let score = a.get(1) + 0.5 * a.get(0);
        labels.push(if score + 0.3 * rng.standard_normal() > 0.0 { 1.0 } else { -1.0 });
        features.push(a);
    }
    let mut data = ssg_core::problems::LinearClassifierData::new(dim, features.clone(), labels).unwrap();
    for a in features {
        if a.get(0) > 0.0 {
            data.group_p.push(a);
        } else {
            data.group_u.push(a);
        }
    }
    data
}
