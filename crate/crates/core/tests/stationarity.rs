mod common;

use common::*;
use ssg_core::oracle::FnOracle;
use ssg_core::problems::l1_over_unit_disk;
use ssg_core::schedules::lambda_bound_convex;
use ssg_core::stationarity::*;
use ssg_core::{DenseVector, RngStream};

#[test]
fn minimizer_is_its_own_prox_point() {
    let p = abs_below_one();
    let r = near_stationarity(&p, &[0.0], 1.0, 0.0, 2500, &mut RngStream::new(0)).unwrap();
    assert!(r.distance < 1e-3, "{}", r.distance);
    assert_eq!(r.inner_iters_used, 5000);
    assert!(r.kkt_residual < 1e-6);
}

#[test]
fn prox_point_of_half_matches_grid_search() {
    let p = abs_below_one();
    let want = (grid_prox_abs(0.5, 1.0, 1e-6) - 0.5).abs();
    assert!((want - 0.5).abs() < 1e-6);
    let r = near_stationarity(&p, &[0.5], 1.0, 0.0, 2500, &mut RngStream::new(0)).unwrap();
    assert!((r.distance - want).abs() < 1e-3);
    assert!(!r.flagged);
    assert!(r.refinement_delta < REFINEMENT_TOLERANCE);
}

#[test]
fn random_centers_match_grid_search() {
    let p = abs_below_one();
    let mut rng = RngStream::new(2024);
    for _ in 0..20 {
        let x = rng.uniform_range(-2.0, 2.0);
        let y = grid_prox_abs(x, 1.0, 1e-5);
        let r = near_stationarity(&p, &[x], 1.0, 0.0, 2500, &mut rng).unwrap();
        assert!((r.distance - (y - x).abs()).abs() < 1e-3, "x={x}: {} vs {}", r.distance, (y - x).abs());
        assert!((r.x_hat[0] - y).abs() < 1e-3);
        if x.abs() >= 0.1 {
            assert!(r.refinement_delta < REFINEMENT_TOLERANCE, "x={x}: {}", r.refinement_delta);
        }
    }
}

#[test]
fn kkt_residual_examples() {
    let p = abs_below_one();
    // −0.5 lies in [−1, 1] − 0.5, the subdifferential plus the prox term.
    assert!(kkt_residual(&p, &[0.0], &[0.5], 1.0, 0.0, 0.0).unwrap() < 1e-8);
    assert!(kkt_residual(&p, &[0.01], &[0.5], 1.0, 0.0, 0.0).unwrap() > 0.1);
    assert!(kkt_residual(&p, &[0.0], &[0.5], 1.0, 0.0, -1.0).is_err());

    let f = FnOracle::new(1, |x: &[f64]| ((x[0] - 0.3).powi(2), DenseVector::from([2.0 * (x[0] - 0.3)])));
    let q = unconstrained_1d(f, -5.0, 5.0, 11.0);
    assert!(kkt_residual(&q, &[0.3], &[0.3], 1.0, 0.0, 0.0).unwrap() < 1e-8);
}

#[test]
fn boundary_normal_cone_absorbs_outward_pull() {
    // At y = 1 with center 2 and λ = 0, v = 1 + (1 − 2) = 0.
    let p = abs_below_one();
    let r = kkt_residual(&p, &[1.0], &[2.0], 1.0, 0.0, 0.0).unwrap();
    assert!(r < 1e-8);
    // At the box edge y = −2 with center −5, v = −1 + 3 points into −N_X(−2).
    assert!(kkt_residual(&p, &[-2.0], &[-5.0], 1.0, 0.0, 0.0).unwrap() < 1e-6);
}

#[test]
fn multiplier_on_the_l1_disk() {
    let p = l1_over_unit_disk(DenseVector::from([2.0, 2.0]), 3.0).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // At the constrained minimizer (s, s) the multiplier solves 2λs = 1.
    let r = near_stationarity(&p, &[s, s], 1.0, 0.0, 2500, &mut RngStream::new(0)).unwrap();
    assert!(r.distance < 1e-3, "{}", r.distance);
    assert!((r.multiplier_estimate - s).abs() < 0.05, "{}", r.multiplier_estimate);
    assert!(r.kkt_residual < 1e-2, "{}", r.kkt_residual);
    let k = p.constants();
    let lambda = lambda_bound_convex(k.m, k.diameter.unwrap(), 1.0, k.g_feas_value.unwrap()).unwrap();
    let mut rng = RngStream::new(6);
    for _ in 0..10 {
        let x = [rng.uniform_range(-2.0, 2.0), rng.uniform_range(-2.0, 2.0)];
        let r = near_stationarity(&p, &x, 1.0, 0.0, 2500, &mut rng).unwrap();
        assert!(r.multiplier_estimate <= 1.05 * lambda);
        assert!(r.distance >= 0.0 && r.refinement_delta >= 0.0);
    }
}

#[test]
fn default_weights_follow_convexity() {
    let p = abs_below_one();
    assert_eq!(default_prox_weights(p.constants()), (2.0, 0.0));
    let mut k = p.constants().clone();
    k.rho = 3.0;
    k.constraint_convex = false;
    assert_eq!(default_prox_weights(&k), (6.0, 6.0));
}
