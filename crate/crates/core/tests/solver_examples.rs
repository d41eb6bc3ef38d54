mod common;

use common::*;
use ssg_core::linalg::{dist, DenseVector};
use ssg_core::oracle::{GaussianNoise, Oracle, StochasticOracle};
use ssg_core::problems::elementary::{Affine, NormDistance};
use ssg_core::problems::{l1_over_unit_disk, noisy_l1_over_unit_disk, synthetic_two_ball, TwoBall};
use ssg_core::schedules::*;
use ssg_core::solver::*;
use ssg_core::{Ball, Constants, ProblemInstance, RngStream, SsgError};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

fn constant_policy(eta: f64, horizon: usize) -> StepsizePolicy {
    StepsizePolicy::manual(
        Rate::Zero,
        Rate::Constant { value: eta },
        ConstraintStep::SameAsObjective,
        horizon,
        0,
        OutputMode::OutputII,
    )
    .unwrap()
}

fn iterates(trace: &SolverTrace) -> Vec<f64> {
    trace.checkpoints.iter().map(|c| c.x[0]).collect()
}

#[test]
fn abs_with_constant_step_walks_to_the_kink() {
    let p = unconstrained_1d(abs_1d(), -10.0, 10.0, 1.0);
    let tr = ssg_run(&p, &constant_policy(0.5, 7), &[2.0], &mut RngStream::new(0), 1).unwrap();
    assert_eq!(iterates(&tr), vec![2.0, 1.5, 1.0, 0.5, 0.0, 0.0, 0.0, 0.0]);
    assert_eq!(tr.index_set_i().len(), 7);
}

#[test]
fn large_step_is_clamped_by_the_projection() {
    let p = unconstrained_1d(linear_1d(1.0, 0.0), -1.0, 1.0, 1.0);
    let tr = ssg_run(&p, &constant_policy(10.0, 4), &[0.0], &mut RngStream::new(0), 1).unwrap();
    assert_eq!(iterates(&tr), vec![0.0, -1.0, -1.0, -1.0, -1.0]);
}

fn l1_disk() -> ProblemInstance {
    l1_over_unit_disk(DenseVector::from([2.0, 2.0]), 3.0).unwrap()
}

#[test]
fn switching_invariant_and_membership() {
    let p = l1_disk();
    let policy = schedule_convex_diminishing(1.0, 6.0, 6.0, 0.0, 1.0, 0.0).unwrap().with_horizon(400);
    let tr = ssg_run(&p, &policy, &[2.5, -1.0], &mut RngStream::new(3), 1).unwrap();
    let (i, j) = (tr.index_set_i(), tr.index_set_j());
    assert_eq!(i.len() + j.len(), tr.horizon - tr.start);
    assert!(i.iter().all(|t| !j.contains(t)));
    for cp in &tr.checkpoints {
        let t = cp.iteration;
        assert!(dist(&p.projection().project(&cp.x), &cp.x) <= 1e-12);
        if t >= tr.start && t < tr.horizon {
            assert_eq!(i.contains(&t), cp.constraint <= policy.tolerance_at(t), "t={t}");
            assert_eq!(tr.g_values[t], cp.constraint);
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let p = noisy_l1_over_unit_disk(DenseVector::from([2.0, 2.0]), 3.0, 0.5).unwrap();
    let policy = schedule_convex_static(0.5, 6.0, 6.0, 0.0, 1.0, 72.0).unwrap().with_horizon(500);
    let a = sssg_run(&p, &policy, &[0.0, 0.0], 2, &mut RngStream::new(11), 50).unwrap();
    let b = sssg_run(&p, &policy, &[0.0, 0.0], 2, &mut RngStream::new(11), 50).unwrap();
    assert!(a.same_path(&b));
    assert_eq!(a, b);
    let c = sssg_run(&p, &policy, &[0.0, 0.0], 2, &mut RngStream::new(12), 50).unwrap();
    assert!(!a.same_path(&c));
}

#[test]
fn stochastic_run_without_noise_reduces_to_deterministic() {
    let exact = l1_disk();
    let noiseless = noisy_l1_over_unit_disk(DenseVector::from([2.0, 2.0]), 3.0, 0.0).unwrap();
    let policy = schedule_convex_static(0.5, 6.0, 6.0, 0.0, 1.0, 72.0).unwrap().with_horizon(2000);
    let a = ssg_run(&exact, &policy, &[1.0, -2.0], &mut RngStream::new(5), 100).unwrap();
    let b = sssg_run(&noiseless, &policy, &[1.0, -2.0], 1, &mut RngStream::new(5), 100).unwrap();
    assert!(a.same_path(&b));
}

/// Cycles through fixed value samples; the subgradient is exact.
struct Scripted {
    values: Vec<f64>,
    next: AtomicUsize,
}

impl StochasticOracle for Scripted {
    fn dimension(&self) -> usize {
        1
    }
    fn sample_value(&self, _x: &[f64], _rng: &mut RngStream) -> f64 {
        let k = self.next.fetch_add(1, Ordering::Relaxed);
        self.values[k % self.values.len()]
    }
    fn sample_subgradient(&self, _x: &[f64], _rng: &mut RngStream) -> DenseVector {
        DenseVector::from([1.0])
    }
}

#[test]
fn batch_mean_decides_the_branch() {
    let p = ProblemInstance::new(
        "scripted",
        linear_1d(1.0, 0.0),
        linear_1d(1.0, 0.0),
        Arc::new(ssg_core::BoxSet::cube(1, -5.0, 5.0)),
        Constants::new(1.0, 0.0),
    )
    .unwrap()
    .with_constraint_sampler(Arc::new(Scripted { values: vec![0.1, 0.3, 0.2, 0.4], next: AtomicUsize::new(0) }))
    .unwrap();
    let policy = StepsizePolicy::manual(
        Rate::Constant { value: 0.3 },
        Rate::Constant { value: 0.1 },
        ConstraintStep::SameAsObjective,
        1,
        0,
        OutputMode::OutputII,
    )
    .unwrap();
    let tr = sssg_run(&p, &policy, &[0.0], 4, &mut RngStream::new(0), 1).unwrap();
    assert_eq!(tr.g_values[0], 0.25);
    assert!(tr.objective_branch[0]);
}

#[test]
fn gaussian_subgradients_are_unbiased() {
    let base: Arc<dyn Oracle> = Arc::new(NormDistance { center: DenseVector::zeros(3), radius: 1.0 });
    let noisy = GaussianNoise { base: base.clone(), value_sd: 0.3, subgradient_sd: 0.7 };
    let x = [0.3, -1.2, 2.0];
    let truth = base.evaluate(&x);
    let mut rng = RngStream::new(99);
    let n = 100_000;
    let mut mean = vec![0.0; 3];
    let mut vmean = 0.0;
    for _ in 0..n {
        let s = noisy.sample_subgradient(&x, &mut rng);
        for (m, v) in mean.iter_mut().zip(s.iter()) {
            *m += v / n as f64;
        }
        vmean += noisy.sample_value(&x, &mut rng) / n as f64;
    }
    let se = 0.7 / (n as f64).sqrt();
    for (m, t) in mean.iter().zip(truth.subgradient.iter()) {
        assert!((m - t).abs() < 3.0 * se, "{m} vs {t}");
    }
    assert!((vmean - truth.value).abs() < 3.0 * 0.3 / (n as f64).sqrt());
}

fn bare_trace(eta: Vec<f64>, objective_branch: Vec<bool>) -> SolverTrace {
    let horizon = eta.len();
    SolverTrace {
        origin: TraceOrigin::Ssg,
        horizon,
        start: 0,
        g_values: vec![-1.0; horizon],
        objective_branch,
        eta,
        checkpoints: Vec::new(),
        zero_subgradient_events: Vec::new(),
        final_iterate: DenseVector::zeros(1),
        seed: SeedRecord { seed: 0, stream: 0 },
    }
}

#[test]
fn output_sampler_probabilities() {
    let s = OutputSampler::new(&bare_trace(vec![1.0, 3.0], vec![true, true]), OutputMode::OutputI).unwrap();
    assert_eq!(s.probability(0), 0.25);
    assert_eq!(s.probability(1), 0.75);

    let s = OutputSampler::new(&bare_trace(vec![1.0, 3.0, 2.0], vec![false, true, false]), OutputMode::OutputI).unwrap();
    let mut rng = RngStream::new(1);
    assert!((0..100).all(|_| s.draw(&mut rng) == 1));
    assert_eq!(s.probability(1), 1.0);

    let s = OutputSampler::new(&bare_trace(vec![0.5; 4], vec![true, false, true, false]), OutputMode::OutputII).unwrap();
    let mut counts = [0usize; 4];
    for _ in 0..100_000 {
        counts[s.draw(&mut rng)] += 1;
    }
    for c in counts {
        assert!((c as f64 / 1e5 - 0.25).abs() < 0.01);
    }
}

#[test]
fn empty_index_set_reports_min_g() {
    let mut t = bare_trace(vec![1.0, 1.0], vec![false, false]);
    t.g_values = vec![0.7, 0.4];
    match OutputSampler::new(&t, OutputMode::OutputI) {
        Err(SsgError::NoFeasibleIterate { min_g }) => assert_eq!(min_g, 0.4),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn polyak_step_examples() {
    assert_eq!(polyak_step(2.0, 4.0, 1.0).unwrap(), 0.5);
    assert!((polyak_step(0.4, 1.0, 0.25).unwrap() - 0.1).abs() < 1e-15);
    assert_eq!(polyak_step(1.0, 0.0, 0.7).unwrap(), 0.0);
    assert!(polyak_step(-1.0, 1.0, 1.0).is_err());
}

#[test]
fn zero_subgradient_on_constraint_branch_is_flagged() {
    let p = ProblemInstance::new(
        "hopeless",
        linear_1d(1.0, 0.0),
        NormDistance { center: DenseVector::zeros(1), radius: -1.0 },
        Arc::new(ssg_core::BoxSet::cube(1, -1.0, 1.0)),
        Constants::new(1.0, 0.0),
    )
    .unwrap();
    let policy = StepsizePolicy::manual(
        Rate::Zero,
        Rate::Constant { value: 0.1 },
        ConstraintStep::Polyak { scale: 1.0 },
        3,
        0,
        OutputMode::OutputI,
    )
    .unwrap();
    let tr = ssg_run(&p, &policy, &[0.0], &mut RngStream::new(0), 1).unwrap();
    assert_eq!(tr.zero_subgradient_events, vec![0, 1, 2]);
    assert_eq!(tr.final_iterate.as_slice(), &[0.0]);
}

#[test]
fn polyak_contraction_on_norm_constraint() {
    let mut k = Constants::new(1.0, 0.0);
    k.x_feas = Some(DenseVector::zeros(2));
    let p = ProblemInstance::new(
        "norm-ball",
        Affine { coefficients: DenseVector::zeros(2), offset: 0.0 },
        NormDistance { center: DenseVector::zeros(2), radius: 1.0 },
        Arc::new(Ball::centered(2, 3.0)),
        k,
    )
    .unwrap();
    let x0 = [2.0f64.sqrt(), 2.0f64.sqrt()];
    let tr = polyak_feasibility_run(&p, &x0, 200, 1e-7).unwrap();
    let d: Vec<f64> = tr.checkpoints.iter().map(|c| (c.x.norm() - 1.0).max(0.0)).collect();
    assert!(d.windows(2).all(|w| w[1] <= w[0]));
    assert!(*d.last().unwrap() < 1e-6);
    assert!(matches!(tr.origin, TraceOrigin::Feasibility { reached: true, .. }));

    let inside = polyak_feasibility_run(&p, &[0.5, 0.0], 200, 0.0).unwrap();
    assert_eq!(inside.horizon, 0);
    assert_eq!(inside.final_iterate.as_slice(), &[0.5, 0.0]);
}

#[test]
fn polyak_contraction_on_two_balls() {
    let tb = TwoBall::new(DenseVector::from([-2.0, 0.0]), DenseVector::from([2.0, 0.0]), 1.0).unwrap();
    let p = synthetic_two_ball(tb.c1.clone(), tb.c2.clone(), 1.0, DenseVector::from([1.0, 0.0])).unwrap();
    let nu = tb.calibrated_nu(720);
    let m = p.constants().m;
    let bound = 1.0 - nu * nu / (8.0 * m * m) + 1e-9;
    let mut rng = RngStream::new(4);
    for _ in 0..50 {
        let phi = rng.uniform_range(0.0, std::f64::consts::TAU);
        let r = 1.0 + rng.uniform_range(0.01, nu / (4.0 * TwoBall::RHO));
        let x0 = [-2.0 + r * phi.cos(), r * phi.sin()];
        let tr = polyak_feasibility_run(&p, &x0, 100, 0.0).unwrap();
        let d2: Vec<f64> = tr.checkpoints.iter().map(|c| tb.distance(&c.x).powi(2)).collect();
        for w in d2.windows(2).filter(|w| w[0] > 0.0) {
            assert!(w[1] / w[0] <= bound, "ratio {}", w[1] / w[0]);
        }
    }
}

#[test]
fn weakly_convex_schedule_keeps_two_ball_iterates_nearly_feasible() {
    let tb = TwoBall::new(DenseVector::from([-2.0, 0.0]), DenseVector::from([2.0, 0.0]), 1.0).unwrap();
    let p = synthetic_two_ball(tb.c1.clone(), tb.c2.clone(), 1.0, DenseVector::from([1.0, 0.3])).unwrap();
    let eps = 0.1;
    let policy = schedule_weakly_convex(WeaklyConvexParams {
        eps,
        m: p.constants().m,
        rho: TwoBall::RHO,
        nu: tb.calibrated_nu(720),
        eps_bar: None,
        horizon: Horizon::Iterations { count: 3000 },
    })
    .unwrap();
    let tr = ssg_run(&p, &policy, &[-2.5, 0.5], &mut RngStream::new(0), 1).unwrap();
    assert!(tr.checkpoints.iter().all(|c| c.constraint <= eps * eps));
}

#[test]
fn replay_recovers_stored_iterates() {
    let p = noisy_l1_over_unit_disk(DenseVector::from([2.0, 2.0]), 3.0, 0.3).unwrap();
    let policy = schedule_convex_diminishing(1.0, 6.0, 6.0, 0.0, 1.0, 0.0).unwrap().with_horizon(300);
    let dense = sssg_run(&p, &policy, &[0.0, 0.0], 3, &mut RngStream::new(8), 1).unwrap();
    let sparse = sssg_run(&p, &policy, &[0.0, 0.0], 3, &mut RngStream::new(8), 64).unwrap();
    for t in [0, 1, 63, 64, 65, 199, 300] {
        let x = replay_iterate(&p, &policy, &sparse, t).unwrap();
        assert_eq!(x, dense.checkpoint(t).unwrap().x, "t={t}");
    }
    let exact = l1_disk();
    let d = ssg_run(&exact, &policy, &[0.0, 0.0], &mut RngStream::new(0), 1).unwrap();
    let s = ssg_run(&exact, &policy, &[0.0, 0.0], &mut RngStream::new(0), 50).unwrap();
    let out = sample_output(&exact, &policy, &s, OutputMode::OutputII, &mut RngStream::new(2)).unwrap();
    assert_eq!(out.x_tau, d.checkpoint(out.tau).unwrap().x);
}
