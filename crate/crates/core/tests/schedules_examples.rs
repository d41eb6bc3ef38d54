use approx::assert_relative_eq;
use ssg_core::schedules::*;
use ssg_core::SsgError;

#[test]
fn lambda_convex_examples() {
    assert_eq!(lambda_bound_convex(1.0, 2.0, 1.0, -0.5).unwrap(), 12.0);
    assert_eq!(lambda_bound_convex(0.0, 0.0, 1.0, -1.0).unwrap(), 0.0);
    assert_relative_eq!(lambda_bound_convex(1.0, 1.0, 2.0, -0.1).unwrap(), 30.0, max_relative = 1e-14);
    assert!(matches!(lambda_bound_convex(1.0, 1.0, 1.0, 0.0), Err(SsgError::InvalidSlater { .. })));
}

#[test]
fn lambda_weakly_convex_examples() {
    let (l, r) = lambda_bound_weakly_convex(1.0, 0.5, 2.0, 1.0).unwrap();
    assert_eq!(l, 2.0);
    assert_eq!(r, 0.5);
    assert_relative_eq!(lambda_bound_weakly_convex(2.0, 2.0, 3.0, 1.0).unwrap().0, 4.0 / 8f64.sqrt(), max_relative = 1e-14);
    assert_eq!(lambda_bound_weakly_convex(1.0, 0.125, 5.0, 1.0).unwrap().0, 2.0);
    assert!(matches!(lambda_bound_weakly_convex(1.0, 1.0, 1.0, 1.0), Err(SsgError::Regime(_))));
}

#[test]
fn nu_examples() {
    assert_eq!(nu_sharpness(0.5, 2.0, 1.0).unwrap(), 1.0);
    assert_relative_eq!(nu_sharpness(2.0, 1.5, 1.0).unwrap(), 2f64.sqrt(), max_relative = 1e-15);
    assert_relative_eq!(nu_sharpness(0.02, 2.0, 1.0).unwrap(), 0.2, max_relative = 1e-15);
    assert!(check_nu_bound(3.0, 1.0).is_some());
    assert!(check_nu_bound(1.0, 1.0).is_none());
    assert_relative_eq!(nu_prime(-0.2, 2.0).unwrap(), 0.1, max_relative = 1e-15);
}

#[test]
fn lambda_equality_examples() {
    assert_eq!(lambda_bound_equality(0.0, 0.0, 1.0, -1.0, 1, 1.0, 1.0).unwrap(), 0.0);
    assert_eq!(lambda_bound_equality(1.0, 1.0, 1.0, -1.0, 1, 1.0, 1.0).unwrap(), 8.0);
    assert_eq!(lambda_bound_equality(1.0, 1.0, 1.0, -1.0, 4, 0.5, 2.0).unwrap(), 7.0);
    assert!(lambda_bound_equality(1.0, 1.0, 1.0, 0.5, 1, 1.0, 1.0).is_err());
}

#[test]
fn convex_static_examples() {
    let p = schedule_convex_static(0.1, 1.0, 1.0, 1.0, 2.0, 0.0).unwrap();
    assert_relative_eq!(p.tolerance_at(0), 0.01, max_relative = 1e-14);
    assert_relative_eq!(p.objective_step_at(7), 0.004, max_relative = 1e-14);
    assert_eq!(p.horizon, 62_500);
    assert_eq!((p.start, p.output_mode), (0, OutputMode::OutputI));

    let p = schedule_convex_static(1.0, 1.0, 1.0, 0.0, 1.0, 0.0).unwrap();
    assert_eq!((p.tolerance_at(0), p.objective_step_at(0), p.horizon), (1.0, 0.4, 7));

    let p = schedule_convex_static(0.1, 2.0, 1.0, 1.0, 2.0, 3.0).unwrap();
    assert_relative_eq!(p.tolerance_at(0), 0.0025, max_relative = 1e-14);
    assert_relative_eq!(p.objective_step_at(0), 2.5e-4, max_relative = 1e-14);
    assert_eq!(p.horizon, 4_000_000);
}

#[test]
fn convex_diminishing_examples() {
    let p = schedule_convex_diminishing(1.0, 1.0, 1.0, 0.0, 1.0, 0.0).unwrap();
    assert_eq!((p.horizon, p.start), (50, 25));
    assert_eq!((p.tolerance_at(0), p.objective_step_at(0)), (5.0, 1.0));
    assert_eq!((p.tolerance_at(24), p.objective_step_at(24)), (1.0, 0.2));
    let p = schedule_convex_diminishing(1.0, 1.0, 1.0, 0.0, 1.0, 1.0).unwrap();
    assert_eq!(p.horizon, 200);
    for t in 1..p.horizon {
        assert!(p.tolerance_at(t) < p.tolerance_at(t - 1));
        assert!(p.objective_step_at(t) < p.objective_step_at(t - 1));
    }
}

#[test]
fn strongly_convex_examples() {
    let p = schedule_strongly_convex(1.0, 1.0, 1.0, 0.0, 1.0, 2.0, Variant::Static).unwrap();
    assert_eq!((p.objective_step_at(0), p.horizon), (1.0, 1));
    let p = schedule_strongly_convex(0.5, 1.0, 1.0, 0.0, 1.0, 2.0, Variant::Static).unwrap();
    assert_eq!((p.objective_step_at(0), p.horizon), (0.25, 16));
    assert_eq!(p.output_mode, OutputMode::OutputII);
    let q = schedule_strongly_convex(0.3, 3.0, 2.0, 0.5, 4.0, 0.7, Variant::Diminishing).unwrap();
    assert_eq!(q.start, q.horizon / 2);
    for p in [p, q] {
        assert!((0..p.horizon.min(1000)).all(|t| p.tolerance_at(t) == 0.0));
    }
    assert!(schedule_strongly_convex(1.0, 1.0, 1.0, 0.0, 1.0, 0.0, Variant::Static).is_err());
}

#[test]
fn weakly_convex_examples() {
    let mk = |eps| WeaklyConvexParams {
        eps,
        m: 1.0,
        rho: 1.0,
        nu: 1.0,
        eps_bar: None,
        horizon: Horizon::Iterations { count: 10 },
    };
    let p = schedule_weakly_convex(mk(1.0)).unwrap();
    assert_eq!((p.tolerance_at(0), p.objective_step_at(0)), (0.0625, 0.0625));
    let p = schedule_weakly_convex(mk(0.1)).unwrap();
    assert_relative_eq!(p.tolerance_at(0), 0.0025, max_relative = 1e-14);
    assert_relative_eq!(p.objective_step_at(0), 0.0025, max_relative = 1e-14);
    assert_eq!(p.constraint_step_at(0, 0.5, 4.0).unwrap(), 0.125);
    assert_eq!(p.output_mode, OutputMode::OutputII);
    assert!(schedule_weakly_convex(WeaklyConvexParams { nu: 0.0, ..mk(1.0) }).is_err());
    let warned = schedule_weakly_convex(WeaklyConvexParams { eps_bar: Some(0.5), ..mk(1.0) }).unwrap();
    assert_eq!(warned.warnings.len(), 1);
}

#[test]
fn weakly_convex_theory_horizon() {
    // 8M²(f0 − f̲ + 3M²/(2ρ̂)) / (ρ̂(1+Λ′)νε² q), q = min{ε²/M, ν/(4ρ)}
    let (eps, m, rho, nu, f0, fl, rh, lp): (f64, f64, f64, f64, f64, f64, f64, f64) = (0.5, 2.0, 1.0, 1.0, 3.0, 1.0, 2.0, 4.0);
    let q: f64 = (eps * eps / m).min(nu / (4.0 * rho));
    let want = (8.0 * m * m * (f0 - fl + 3.0 * m * m / (2.0 * rh)) / (rh * (1.0 + lp) * nu * eps * eps * q)).ceil();
    let p = schedule_weakly_convex(WeaklyConvexParams {
        eps,
        m,
        rho,
        nu,
        eps_bar: None,
        horizon: Horizon::Theory { f_x0: f0, f_lower: fl, rho_hat: rh, lambda_prime: lp },
    })
    .unwrap();
    assert_eq!(p.horizon as f64, want);
}

#[test]
fn bounded_s_convex_examples() {
    let p = schedule_bounded_s_convex(1.0, 1.0, 0.5, 1.0).unwrap();
    assert_eq!((p.tolerance_at(0), p.objective_step_at(0)), (0.125, 0.125));
    assert_eq!(p.output_mode, OutputMode::OutputI);
    assert_relative_eq!(p.constraint_step_at(0, 0.4, 1.0).unwrap(), 0.1, max_relative = 1e-14);
    // 8·1·1/(0.125·min{1, 0.25}) = 256, plus one.
    assert_eq!(p.horizon, 257);
}

fn stoch(variant: StochasticVariant, case: StochasticCase, delta: f64, sigma: f64) -> StochasticParams {
    StochasticParams {
        eps: 1.0,
        m: 1.0,
        d: 1.0,
        rho: 0.0,
        rho_hat: 1.0,
        lambda: 0.0,
        delta,
        sigma,
        variant,
        case,
        e: None,
    }
}

#[test]
fn stochastic_case_one_three_term_max() {
    // ln(8/δ) = 12, so the middle term is max{12·12, (16/9)·144} = 256.
    let delta = 8.0 * (-12f64).exp();
    let p = schedule_stochastic(stoch(StochasticVariant::Semi, StochasticCase::I, delta, 0.0)).unwrap();
    let base = 1.0f64;
    let l4 = (4.0 / delta).ln();
    let want = (25.0 / 4.0 * base).max(256.0).max(300.0 * l4 * base);
    assert_relative_eq!(l4, 12.0 - 2f64.ln(), max_relative = 1e-14);
    assert_eq!(p.horizon as f64, want.ceil());
    assert_eq!(p.batch_size, 1);

    // With ε large the base term vanishes and the δ-only term decides.
    let mut q = stoch(StochasticVariant::Semi, StochasticCase::I, delta, 0.0);
    q.eps = 10.0;
    let p = schedule_stochastic(q).unwrap();
    assert_eq!(p.horizon, 256);
}

#[test]
fn stochastic_full_batch_sizes() {
    let p = schedule_stochastic(stoch(StochasticVariant::Full, StochasticCase::I, 0.1, 0.0)).unwrap();
    assert_eq!(p.batch_size, 1);
    let p = schedule_stochastic(stoch(StochasticVariant::Full, StochasticCase::I, 0.1, 0.2)).unwrap();
    let t = p.horizon as f64;
    let want = (300.0 * 0.04 * (4.0 * t / 0.1).ln()).ceil();
    assert_eq!(p.batch_size as f64, want);
    let p = schedule_stochastic(stoch(StochasticVariant::Full, StochasticCase::II, 0.1, 0.2)).unwrap();
    let t = p.horizon as f64;
    let want = (3.0 * t * 0.04 * (2.0 * t / 0.1).ln() / 2.0).ceil();
    assert_eq!(p.batch_size as f64, want);
}

#[test]
fn stochastic_case_two_e_bound() {
    let delta = 4.0 * (-3f64).exp();
    let l8 = 3.0 + 2f64.ln();
    let l4 = 3.0f64;
    let tail = 2.0 * std::f64::consts::PI / 6f64.sqrt() * (12.0 * l8).sqrt().max(4.0 / 3.0 * l8) + 8.0 * (3.0 * l4).sqrt();
    assert_relative_eq!(e_lower_bound(delta, StochasticVariant::Semi), 4.0 + tail, max_relative = 1e-14);
    assert_relative_eq!(e_lower_bound(delta, StochasticVariant::Full), 8.0 + tail, max_relative = 1e-14);
    let p = schedule_stochastic(stoch(StochasticVariant::Semi, StochasticCase::II, delta, 0.0)).unwrap();
    let e = 4.0 + tail;
    let t = (2.0 * e * e).ceil() as usize;
    assert_eq!(p.horizon, t + t % 2);
    assert_eq!(p.start, p.horizon / 2);
    assert_relative_eq!(p.tolerance_at(0), e, max_relative = 1e-14);
    let mut small = stoch(StochasticVariant::Semi, StochasticCase::II, delta, 0.0);
    small.e = Some(1.0);
    assert!(schedule_stochastic(small).is_err());
}

#[test]
fn policy_step_sums_are_positive_and_finite() {
    let policies = [
        schedule_convex_static(0.5, 1.0, 1.0, 0.0, 1.0, 0.0).unwrap(),
        schedule_convex_diminishing(1.0, 1.0, 1.0, 0.0, 1.0, 0.0).unwrap(),
        schedule_strongly_convex(0.5, 1.0, 1.0, 0.0, 1.0, 2.0, Variant::Static).unwrap(),
        schedule_bounded_s_convex(1.0, 1.0, 0.5, 1.0).unwrap(),
    ];
    for p in &policies {
        let s: f64 = (p.start..p.horizon).map(|t| p.objective_step_at(t)).sum();
        assert!(s > 0.0 && s.is_finite(), "{:?}", p.kind);
        assert!(p.start < p.horizon);
    }
}

#[test]
fn polyak_scale_must_stay_below_two() {
    let bad = StepsizePolicy::manual(
        Rate::Zero,
        Rate::Constant { value: 0.1 },
        ConstraintStep::Polyak { scale: 2.0 },
        10,
        0,
        OutputMode::OutputII,
    );
    assert!(bad.is_err());
}
