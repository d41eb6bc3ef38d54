use proptest::prelude::*;
use ssg_core::linalg::{dist, DenseVector, SparseVector};
use ssg_core::schedules::OutputMode;
use ssg_core::solver::{OutputSampler, SeedRecord, SolverTrace, TraceOrigin};
use ssg_core::{Ball, BoxSet, Projection, RngStream};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn projection_examples() {
    let b = Ball::centered(2, 1.0);
    let p = b.project(&[3.0, 4.0]);
    assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
    let bx = BoxSet::cube(3, -2.0, 2.0);
    assert_eq!(bx.project(&[1.0, -2.0, 0.5]).as_slice(), &[1.0, -2.0, 0.5]);
    assert_eq!(Ball::centered(2, 2.0).project(&[0.0, 0.0]).as_slice(), &[0.0, 0.0]);
}

fn vec3() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-20.0f64..20.0, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn ball_projection_is_nonexpansive_and_idempotent(x in vec3(), y in vec3(), r in 0.1f64..5.0) {
        let b = Ball { center: DenseVector::from([1.0, -0.5, 2.0]), radius: r };
        let y_in = b.project(&y);
        let px = b.project(&x);
        prop_assert!(dist(&px, &y_in) <= dist(&x, &y_in) + 1e-12);
        prop_assert!(dist(&b.project(&px), &px) <= 1e-12);
        prop_assert!(dist(&px, &b.project(&y)) <= dist(&x, &y) + 1e-12);
    }

    #[test]
    fn box_projection_is_nonexpansive_and_idempotent(x in vec3(), y in vec3()) {
        let b = BoxSet::cube(3, -2.0, 3.0);
        let (px, py) = (b.project(&x), b.project(&y));
        prop_assert!(dist(&px, &py) <= dist(&x, &y) + 1e-12);
        prop_assert_eq!(b.project(&px), px.clone());
        prop_assert!(b.contains(&px, 0.0));
    }

    #[test]
    fn sparse_dot_matches_dense(pairs in prop::collection::vec((0usize..8, -5.0f64..5.0), 0..12), x in prop::collection::vec(-3.0f64..3.0, 8)) {
        let s = SparseVector::from_pairs(pairs);
        let dense = s.to_dense(8);
        let want: f64 = dense.iter().zip(&x).map(|(a, b)| a * b).sum();
        prop_assert!((s.dot(&x) - want).abs() <= 1e-12 * (1.0 + want.abs()));
        prop_assert!((s.norm() - dense.norm()).abs() <= 1e-12);
    }

    #[test]
    fn streams_replay_from_seed(seed in any::<u64>(), k in 0u64..50) {
        let mut a = RngStream::new(seed).substream(k);
        let mut b = RngStream::new(seed).substream(k);
        let xs: Vec<f64> = (0..16).map(|_| a.uniform()).collect();
        let ys: Vec<f64> = (0..16).map(|_| b.uniform()).collect();
        prop_assert_eq!(xs, ys);
        let mut c = RngStream::new(seed).substream(k + 1);
        prop_assert_ne!(a.uniform(), c.uniform());
    }
}

#[test]
fn stream_position_resumes_exactly() {
    let mut a = RngStream::new(5);
    for _ in 0..37 {
        a.standard_normal();
    }
    let mut b = RngStream::at_position(a.position());
    for _ in 0..100 {
        assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
    }
}

fn weighted_trace(eta: Vec<f64>) -> SolverTrace {
    let n = eta.len();
    SolverTrace {
        origin: TraceOrigin::Ssg,
        horizon: n,
        start: 0,
        objective_branch: vec![true; n],
        eta,
        g_values: vec![0.0; n],
        checkpoints: Vec::new(),
        zero_subgradient_events: Vec::new(),
        final_iterate: DenseVector::zeros(1),
        seed: SeedRecord { seed: 0, stream: 0 },
    }
}

/// Pearson χ² p-value of `draws` samples against the η weights.
pub fn chi_square_p(eta: &[f64], draws: usize, seed: u64) -> f64 {
    let s = OutputSampler::new(&weighted_trace(eta.to_vec()), OutputMode::OutputI).unwrap();
    let mut counts = vec![0usize; eta.len()];
    let mut rng = RngStream::new(seed);
    for _ in 0..draws {
        counts[s.draw(&mut rng)] += 1;
    }
    let total: f64 = eta.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(eta)
        .map(|(&c, &w)| {
            let e = draws as f64 * w / total;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    1.0 - ChiSquared::new((eta.len() - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn sampler_passes_chi_square() {
    let flat = vec![1.0; 20];
    let decreasing: Vec<f64> = (0..50).map(|t| 1.0 / ((t + 1) as f64).sqrt()).collect();
    let spiky: Vec<f64> = (0..30).map(|t| if t % 7 == 0 { 5.0 } else { 0.2 }).collect();
    for (k, eta) in [flat, decreasing, spiky].iter().enumerate() {
        let p = chi_square_p(eta, 100_000, 40 + k as u64);
        assert!(p > 0.01, "profile {k}: p = {p}");
    }
}
