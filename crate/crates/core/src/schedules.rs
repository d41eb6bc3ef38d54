//! Tolerance and stepsize schedules, and the analytic constants they depend on.

use crate::error::{Result, SsgError};
use crate::problem::Constants;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    StaticConvex,
    DiminishingConvex,
    StronglyConvexStatic,
    StronglyConvexDiminishing,
    WeaklyConvexSwitching,
    BoundedSConvexSwitching,
    StochasticStatic,
    StochasticDiminishing,
    ManualGrid,
}

/// Which index set the returned iterate is sampled from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputMode {
    /// Sample from I, the nearly-feasible iterations.
    #[serde(rename = "output-i")]
    OutputI,
    /// Sample from I ∪ J.
    #[serde(rename = "output-ii")]
    OutputII,
}

/// A nonnegative sequence indexed by the iteration counter t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Rate {
    Zero,
    Constant { value: f64 },
    /// `scale / sqrt(t + 1)`
    InverseSqrt { scale: f64 },
    /// `scale / (t + 1)`
    InverseLinear { scale: f64 },
}

impl Rate {
    pub fn at(&self, t: usize) -> f64 {
        let k = t as f64 + 1.0;
        match *self {
            Rate::Zero => 0.0,
            Rate::Constant { value } => value,
            Rate::InverseSqrt { scale } => scale / k.sqrt(),
            Rate::InverseLinear { scale } => scale / k,
        }
    }

    fn coefficient(&self) -> f64 {
        match *self {
            Rate::Zero => 0.0,
            Rate::Constant { value } => value,
            Rate::InverseSqrt { scale } | Rate::InverseLinear { scale } => scale,
        }
    }
}

/// Stepsize rule on the constraint branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum ConstraintStep {
    /// Same η_t as the objective branch.
    SameAsObjective,
    /// `scale · g / ‖ζ_g‖²`, resolved by the solver at runtime.
    Polyak { scale: f64 },
}

/// A complete schedule: horizon T, start index S, ε_t, η_t and output rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepsizePolicy {
    pub kind: PolicyKind,
    pub output_mode: OutputMode,
    pub horizon: usize,
    pub start: usize,
    pub tolerance: Rate,
    pub objective_step: Rate,
    pub constraint_step: ConstraintStep,
    /// Value samples per iteration in the stochastic method.
    #[serde(default = "one")]
    pub batch_size: usize,
    /// Named inputs and derived quantities, kept for provenance.
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

fn one() -> usize {
    1
}

impl StepsizePolicy {
    /// A hand-specified schedule, e.g. one cell of a tuning grid.
    pub fn manual(
        tolerance: Rate,
        objective_step: Rate,
        constraint_step: ConstraintStep,
        horizon: usize,
        start: usize,
        output_mode: OutputMode,
    ) -> Result<Self> {
        let p = Self {
            kind: PolicyKind::ManualGrid,
            output_mode,
            horizon,
            start,
            tolerance,
            objective_step,
            constraint_step,
            batch_size: 1,
            parameters: BTreeMap::new(),
            warnings: Vec::new(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(SsgError::Regime("horizon T must be at least 1".into()));
        }
        if self.start >= self.horizon {
            return Err(SsgError::Regime(format!(
                "start index S={} must be below T={}",
                self.start, self.horizon
            )));
        }
        if self.batch_size < 1 {
            return Err(SsgError::Regime("batch size must be at least 1".into()));
        }
        let tol = self.tolerance.coefficient();
        let eta = self.objective_step.coefficient();
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(SsgError::Regime(format!("tolerance coefficient {tol} is not a nonnegative real")));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(SsgError::Regime(format!("objective stepsize coefficient {eta} is not positive")));
        }
        if let ConstraintStep::Polyak { scale } = self.constraint_step {
            if !(scale > 0.0 && scale < 2.0) {
                return Err(SsgError::Regime(format!("Polyak scale {scale} outside (0, 2)")));
            }
        }
        Ok(())
    }

    pub fn tolerance_at(&self, t: usize) -> f64 {
        self.tolerance.at(t)
    }

    pub fn objective_step_at(&self, t: usize) -> f64 {
        self.objective_step.at(t)
    }

    /// η_t on the constraint branch given the current `g > ε_t ≥ 0` and `‖ζ_g‖²`.
    pub fn constraint_step_at(&self, t: usize, g: f64, subgrad_norm_sq: f64) -> Result<f64> {
        match self.constraint_step {
            ConstraintStep::SameAsObjective => Ok(self.objective_step.at(t)),
            ConstraintStep::Polyak { scale } => {
                crate::solver::polyak_step(g.max(0.0), subgrad_norm_sq, scale)
            }
        }
    }

    /// Same schedule over a different horizon, keeping S/T for schedules that start half way.
    pub fn with_horizon(&self, horizon: usize) -> Self {
        let mut p = self.clone();
        p.start = if self.start == 0 {
            0
        } else {
            (horizon / 2).min(horizon.saturating_sub(1))
        };
        p.horizon = horizon;
        p
    }

    fn record(&mut self, name: &str, value: f64) {
        self.parameters.insert(name.to_string(), value);
    }
}

/// Smallest integer ≥ x, discounting floating-point noise of relative size 1e-12.
fn ceil_count(x: f64, what: &str) -> Result<usize> {
    if !x.is_finite() || x < 0.0 {
        return Err(SsgError::Regime(format!("{what} evaluates to {x}")));
    }
    let c = (x * (1.0 - 1e-12)).ceil();
    if c > 1e18 {
        return Err(SsgError::Regime(format!("{what} = {x:e} does not fit an iteration counter")));
    }
    Ok((c as usize).max(1))
}

fn round_up_even(t: usize) -> usize {
    t + (t % 2)
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SsgError::Regime(format!("{name} must be positive, got {v}")))
    }
}

fn require_gap(rho: f64, rho_hat: f64) -> Result<f64> {
    if rho_hat > rho {
        Ok(rho_hat - rho)
    } else {
        Err(SsgError::Regime(format!("need rho_hat > rho, got rho_hat={rho_hat}, rho={rho}")))
    }
}

// ---------------------------------------------------------------------------
// Constants

/// Multiplier bound for convex constraints: `(M D + ρ̂ D²) / (−g(x_feas))`.
pub fn lambda_bound_convex(m: f64, d: f64, rho_hat: f64, g_feas: f64) -> Result<f64> {
    if !(g_feas < 0.0) {
        return Err(SsgError::InvalidSlater { g_feas });
    }
    Ok((m * d + rho_hat * d * d) / (-g_feas))
}

/// Multiplier bound for weakly convex constraints with uniform Slater slack θ.
///
/// Returns `(Λ′, M/ρ̂)`; the second value bounds `‖x̂(x) − x‖`.
pub fn lambda_bound_weakly_convex(m: f64, theta: f64, rho_hat: f64, rho: f64) -> Result<(f64, f64)> {
    require_positive("theta", theta)?;
    let gap = require_gap(rho, rho_hat)?;
    Ok((2.0 * m / (2.0 * theta * gap).sqrt(), m / rho_hat))
}

/// Sharpness constant `ν = √(2θ(ρ̂−ρ))`.
pub fn nu_sharpness(theta: f64, rho_hat: f64, rho: f64) -> Result<f64> {
    require_positive("theta", theta)?;
    let gap = require_gap(rho, rho_hat)?;
    Ok((2.0 * theta * gap).sqrt())
}

/// A real instance always has ν ≤ 2M; returns a warning when that fails.
pub fn check_nu_bound(nu: f64, m: f64) -> Option<String> {
    (nu > 2.0 * m).then(|| format!("nu = {nu} exceeds 2M = {}; constants are inconsistent", 2.0 * m))
}

/// Sharpness constant for convex constraints on a bounded set: `ν′ = −g(x_feas)/D`.
pub fn nu_prime(g_feas: f64, d: f64) -> Result<f64> {
    if !(g_feas < 0.0) {
        return Err(SsgError::InvalidSlater { g_feas });
    }
    require_positive("D", d)?;
    Ok(-g_feas / d)
}

/// Multiplier bound with `l` affine equality constraints folded into g.
#[allow(clippy::too_many_arguments)]
pub fn lambda_bound_equality(
    m: f64,
    d: f64,
    rho_hat: f64,
    h_feas: f64,
    l: usize,
    pinv_norm: f64,
    dist_boundary: f64,
) -> Result<f64> {
    if !(h_feas < 0.0) {
        return Err(SsgError::Regime(format!("h(x_feas) must be negative, got {h_feas}")));
    }
    if l < 1 {
        return Err(SsgError::Regime("need at least one equality constraint".into()));
    }
    require_positive("dist_boundary", dist_boundary)?;
    let base = (m * d + rho_hat * d * d) / (-h_feas);
    let inner = (m * m * d + rho_hat * m * d * d) / (-h_feas)
        + (m * d + rho_hat * d * d) / dist_boundary
        + m
        + rho_hat * d;
    Ok(base + (l as f64).sqrt() * pinv_norm * inner)
}

/// Multiplier bound for bounded feasible sets: `(M + ρ̂(D+ν′)) D / (−g(x_feas))`.
pub fn lambda_bound_bounded(m: f64, d: f64, rho_hat: f64, g_feas: f64) -> Result<f64> {
    let np = nu_prime(g_feas, d)?;
    Ok((m + rho_hat * (d + np)) * d / (-g_feas))
}

/// Every constant derivable from an instance's known quantities.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstantReport {
    pub lambda: Option<f64>,
    pub lambda_prime: Option<f64>,
    pub lambda_double_prime: Option<f64>,
    pub lambda_eq: Option<f64>,
    pub nu: Option<f64>,
    pub nu_prime: Option<f64>,
    pub c: Option<f64>,
    pub c_prime: Option<f64>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl ConstantReport {
    /// Fills whatever the constants allow at the given ρ̂.
    pub fn for_constants(k: &Constants, rho_hat: f64) -> Self {
        let mut r = ConstantReport::default();
        let gap = rho_hat - k.rho;
        if let (Some(d), Some(g)) = (k.diameter, k.g_feas_value) {
            r.lambda = lambda_bound_convex(k.m, d, rho_hat, g).ok();
            r.nu_prime = nu_prime(g, d).ok();
            r.lambda_double_prime = lambda_bound_bounded(k.m, d, rho_hat, g).ok();
        }
        if let Some(theta) = k.theta {
            if let Ok((lp, _)) = lambda_bound_weakly_convex(k.m, theta, rho_hat, k.rho) {
                r.lambda_prime = Some(lp);
                r.c = Some(2.0 * ((1.0 + lp) / gap).sqrt());
            }
            r.nu = nu_sharpness(theta, rho_hat, k.rho).ok();
            if let Some(w) = r.nu.and_then(|nu| check_nu_bound(nu, k.m)) {
                r.warnings.push(w);
            }
        }
        if let (Some(np), Some(l2)) = (r.nu_prime, r.lambda_double_prime) {
            if gap > 0.0 {
                r.c_prime = Some((np * (1.0 + l2) / (2.0 * k.m * gap)).sqrt());
            }
        }
        if gap <= 0.0 {
            r.warnings.push(format!("rho_hat={rho_hat} does not exceed rho={}", k.rho));
        }
        r
    }
}

// ---------------------------------------------------------------------------
// Convex constraints

/// Constant tolerance and stepsize, sampling from I.
pub fn schedule_convex_static(eps: f64, m: f64, d: f64, rho: f64, rho_hat: f64, lambda: f64) -> Result<StepsizePolicy> {
    require_positive("eps", eps)?;
    require_positive("M", m)?;
    let gap = require_gap(rho, rho_hat)?;
    let l1 = 1.0 + lambda;
    let tol = eps * eps * gap / l1;
    let eta = 2.0 * eps * eps * gap / (5.0 * l1 * m * m);
    let t = ceil_count(25.0 * m * m * d * d * l1 * l1 / (4.0 * eps.powi(4) * gap * gap), "T")?;
    let mut p = StepsizePolicy {
        kind: PolicyKind::StaticConvex,
        output_mode: OutputMode::OutputI,
        horizon: t,
        start: 0,
        tolerance: Rate::Constant { value: tol },
        objective_step: Rate::Constant { value: eta },
        constraint_step: ConstraintStep::SameAsObjective,
        batch_size: 1,
        parameters: BTreeMap::new(),
        warnings: Vec::new(),
    };
    record_common(&mut p, eps, m, d, rho, rho_hat, lambda);
    Ok(p)
}

/// `ε_t = 5MD/√(t+1)`, `η_t = D/(M√(t+1))`, sampling from the second half.
pub fn schedule_convex_diminishing(eps: f64, m: f64, d: f64, rho: f64, rho_hat: f64, lambda: f64) -> Result<StepsizePolicy> {
    require_positive("eps", eps)?;
    require_positive("M", m)?;
    require_positive("D", d)?;
    let gap = require_gap(rho, rho_hat)?;
    let l1 = 1.0 + lambda;
    let t = round_up_even(ceil_count(50.0 * m * m * d * d * l1 * l1 / (eps.powi(4) * gap * gap), "T")?);
    let mut p = StepsizePolicy {
        kind: PolicyKind::DiminishingConvex,
        output_mode: OutputMode::OutputI,
        horizon: t,
        start: t / 2,
        tolerance: Rate::InverseSqrt { scale: 5.0 * m * d },
        objective_step: Rate::InverseSqrt { scale: d / m },
        constraint_step: ConstraintStep::SameAsObjective,
        batch_size: 1,
        parameters: BTreeMap::new(),
        warnings: Vec::new(),
    };
    record_common(&mut p, eps, m, d, rho, rho_hat, lambda);
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Static,
    Diminishing,
}

/// Strongly convex constraint: ε_t = 0 and sampling from I ∪ J.
pub fn schedule_strongly_convex(
    eps: f64,
    m: f64,
    d: f64,
    rho: f64,
    rho_hat: f64,
    mu: f64,
    variant: Variant,
) -> Result<StepsizePolicy> {
    require_positive("eps", eps)?;
    require_positive("M", m)?;
    if !(mu > 0.0) {
        return Err(SsgError::Regime(format!("strong convexity modulus must be positive, got {mu}")));
    }
    let gap = require_gap(rho, rho_hat)?;
    let denom = eps.powi(4) * (gap * gap).min(mu * mu / 4.0);
    let (kind, t, start, step) = match variant {
        Variant::Static => {
            let eta = eps * eps * gap.min(mu / 2.0) / (m * m);
            let t = ceil_count(m * m * d * d / denom, "T")?;
            (PolicyKind::StronglyConvexStatic, t, 0, Rate::Constant { value: eta })
        }
        Variant::Diminishing => {
            require_positive("D", d)?;
            let t = round_up_even(ceil_count(4.0 * m * m * d * d / denom, "T")?);
            (PolicyKind::StronglyConvexDiminishing, t, t / 2, Rate::InverseSqrt { scale: d / m })
        }
    };
    let mut p = StepsizePolicy {
        kind,
        output_mode: OutputMode::OutputII,
        horizon: t,
        start,
        tolerance: Rate::Zero,
        objective_step: step,
        constraint_step: ConstraintStep::SameAsObjective,
        batch_size: 1,
        parameters: BTreeMap::new(),
        warnings: Vec::new(),
    };
    p.record("eps", eps);
    p.record("M", m);
    p.record("D", d);
    p.record("rho", rho);
    p.record("rho_hat", rho_hat);
    p.record("mu", mu);
    Ok(p)
}

fn record_common(p: &mut StepsizePolicy, eps: f64, m: f64, d: f64, rho: f64, rho_hat: f64, lambda: f64) {
    p.record("eps", eps);
    p.record("M", m);
    p.record("D", d);
    p.record("rho", rho);
    p.record("rho_hat", rho_hat);
    p.record("Lambda", lambda);
    p.record("T", p.horizon as f64);
    p.record("S", p.start as f64);
}

// ---------------------------------------------------------------------------
// Weakly convex and bounded-S convex constraints

/// How many iterations a switching schedule runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "from", rename_all = "kebab-case")]
pub enum Horizon {
    Iterations { count: usize },
    /// From the complexity bound, given `f(x⁰)`, a lower bound `f̲`, ρ̂ and Λ′.
    Theory {
        f_x0: f64,
        f_lower: f64,
        rho_hat: f64,
        lambda_prime: f64,
    },
}

/// Inputs to the weakly convex schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeaklyConvexParams {
    pub eps: f64,
    pub m: f64,
    pub rho: f64,
    pub nu: f64,
    /// Upper limit on ε, when known.
    pub eps_bar: Option<f64>,
    pub horizon: Horizon,
}

/// Weakly convex constraint: constant ε_t and η_t on I, Polyak steps on J,
/// sampling from I ∪ J.
pub fn schedule_weakly_convex(params: WeaklyConvexParams) -> Result<StepsizePolicy> {
    let WeaklyConvexParams { eps, m, rho, nu, eps_bar, horizon } = params;
    require_positive("eps", eps)?;
    require_positive("M", m)?;
    if !(nu > 0.0) {
        return Err(SsgError::Regime(format!("nu must be positive, got {nu}")));
    }
    let cap = if rho > 0.0 { nu / (4.0 * rho) } else { f64::INFINITY };
    let q = (eps * eps / m).min(cap);
    let tol = nu / 4.0 * q;
    let eta = nu / (4.0 * m * m) * q;
    let mut warnings = Vec::new();
    if let Some(bar) = eps_bar {
        if eps > bar {
            warnings.push(format!("eps = {eps} exceeds the declared eps_bar = {bar}"));
        }
    }
    if let Some(w) = check_nu_bound(nu, m) {
        warnings.push(w);
    }
    let t = match horizon {
        Horizon::Iterations { count } => count,
        Horizon::Theory { f_x0, f_lower, rho_hat, lambda_prime } => {
            require_positive("rho_hat", rho_hat)?;
            let num = 8.0 * m * m * (f_x0 - f_lower + 3.0 * m * m / (2.0 * rho_hat));
            let den = rho_hat * (1.0 + lambda_prime) * nu * eps * eps * q;
            ceil_count(num / den, "T")?
        }
    };
    let mut p = StepsizePolicy {
        kind: PolicyKind::WeaklyConvexSwitching,
        output_mode: OutputMode::OutputII,
        horizon: t,
        start: 0,
        tolerance: Rate::Constant { value: tol },
        objective_step: Rate::Constant { value: eta },
        constraint_step: ConstraintStep::Polyak { scale: 1.0 },
        batch_size: 1,
        parameters: BTreeMap::new(),
        warnings,
    };
    p.validate()?;
    p.record("eps", eps);
    p.record("M", m);
    p.record("rho", rho);
    p.record("nu", nu);
    Ok(p)
}

/// Convex constraint with a bounded feasible set: scaled Polyak steps on J,
/// sampling from I. `T = ⌈8M³D²/(ν′³ min{ε⁴/M², ν′²})⌉ + 1`.
pub fn schedule_bounded_s_convex(eps: f64, m: f64, nu_prime: f64, d: f64) -> Result<StepsizePolicy> {
    require_positive("eps", eps)?;
    require_positive("M", m)?;
    require_positive("D", d)?;
    if !(nu_prime > 0.0) {
        return Err(SsgError::Regime(format!("nu' must be positive, got {nu_prime}")));
    }
    let q = (eps * eps / m).min(nu_prime);
    let tol = nu_prime / 2.0 * q;
    let eta = nu_prime / (2.0 * m * m) * q;
    let bound = 8.0 * m.powi(3) * d * d / (nu_prime.powi(3) * (eps.powi(4) / (m * m)).min(nu_prime * nu_prime));
    let t = ceil_count(bound, "T")? + 1;
    let mut p = StepsizePolicy {
        kind: PolicyKind::BoundedSConvexSwitching,
        output_mode: OutputMode::OutputI,
        horizon: t,
        start: 0,
        tolerance: Rate::Constant { value: tol },
        objective_step: Rate::Constant { value: eta },
        constraint_step: ConstraintStep::Polyak { scale: nu_prime / (2.0 * m) },
        batch_size: 1,
        parameters: BTreeMap::new(),
        warnings: Vec::new(),
    };
    p.validate()?;
    p.record("eps", eps);
    p.record("M", m);
    p.record("nu_prime", nu_prime);
    p.record("D", d);
    Ok(p)
}

// ---------------------------------------------------------------------------
// Stochastic

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StochasticVariant {
    /// Exact values of g, stochastic subgradients.
    Semi,
    /// Stochastic values of g averaged over a batch.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StochasticCase {
    I,
    II,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticParams {
    pub eps: f64,
    pub m: f64,
    pub d: f64,
    pub rho: f64,
    pub rho_hat: f64,
    pub lambda: f64,
    pub delta: f64,
    pub sigma: f64,
    pub variant: StochasticVariant,
    pub case: StochasticCase,
    /// Diminishing-case constant E. Defaults to its lower bound.
    pub e: Option<f64>,
}

/// Smallest admissible E for the diminishing stochastic schedules.
pub fn e_lower_bound(delta: f64, variant: StochasticVariant) -> f64 {
    let l8 = (8.0 / delta).ln();
    let l4 = (4.0 / delta).ln();
    let lead = match variant {
        StochasticVariant::Semi => 4.0,
        StochasticVariant::Full => 8.0,
    };
    lead + 2.0 * std::f64::consts::PI / 6f64.sqrt() * (12.0 * l8).sqrt().max(4.0 / 3.0 * l8) + 8.0 * (3.0 * l4).sqrt()
}

/// High-probability schedules for the stochastic method.
pub fn schedule_stochastic(params: StochasticParams) -> Result<StepsizePolicy> {
    let StochasticParams { eps, m, d, rho, rho_hat, lambda, delta, sigma, variant, case, e } = params;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(SsgError::Regime(format!("delta must lie in (0, 1), got {delta}")));
    }
    if !(sigma >= 0.0) {
        return Err(SsgError::Regime(format!("sigma must be nonnegative, got {sigma}")));
    }
    let sigma = match variant {
        StochasticVariant::Semi => 0.0,
        StochasticVariant::Full => sigma,
    };
    require_positive("eps", eps)?;
    require_positive("M", m)?;
    require_positive("D", d)?;
    let gap = require_gap(rho, rho_hat)?;
    let l1 = 1.0 + lambda;
    let base = m * m * d * d * l1 * l1 / (eps.powi(4) * gap * gap);
    let mut p = match case {
        StochasticCase::I => {
            let mut p = schedule_convex_static(eps, m, d, rho, rho_hat, lambda)?;
            let l8 = (8.0 / delta).ln();
            let l4 = (4.0 / delta).ln();
            let t = (25.0 / 4.0 * base)
                .max((12.0 * l8).max(16.0 / 9.0 * l8 * l8))
                .max(300.0 * l4 * base);
            p.horizon = ceil_count(t, "T")?;
            p.kind = PolicyKind::StochasticStatic;
            if variant == StochasticVariant::Full {
                let tf = p.horizon as f64;
                let b = 300.0 * sigma * sigma * (4.0 * tf / delta).ln() * l1.powi(4) / (eps.powi(4) * gap * gap);
                p.batch_size = ceil_count(b, "B")?;
            }
            p
        }
        StochasticCase::II => {
            let lower = e_lower_bound(delta, variant);
            let e = e.unwrap_or(lower);
            if e < lower {
                return Err(SsgError::Regime(format!("E = {e} is below its lower bound {lower}")));
            }
            let mut p = schedule_convex_diminishing(eps, m, d, rho, rho_hat, lambda)?;
            p.horizon = round_up_even(ceil_count(2.0 * e * e * base, "T")?);
            p.start = p.horizon / 2;
            p.tolerance = Rate::InverseSqrt { scale: e * m * d };
            p.kind = PolicyKind::StochasticDiminishing;
            p.record("E", e);
            if variant == StochasticVariant::Full {
                let tf = p.horizon as f64;
                let b = 3.0 * tf * sigma * sigma * (2.0 * tf / delta).ln() * l1 * l1 / (2.0 * m * m * d * d);
                p.batch_size = ceil_count(b, "B")?;
            }
            p
        }
    };
    p.record("delta", delta);
    p.record("sigma", sigma);
    p.record("T", p.horizon as f64);
    p.record("S", p.start as f64);
    p.record("B", p.batch_size as f64);
    p.validate()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates() {
        assert_eq!(Rate::InverseSqrt { scale: 5.0 }.at(24), 1.0);
        assert_eq!(Rate::InverseLinear { scale: 2.0 }.at(3), 0.5);
        assert_eq!(Rate::Zero.at(9), 0.0);
    }

    #[test]
    fn ceil_discounts_rounding_noise() {
        assert_eq!(ceil_count(62500.000000001, "T").unwrap(), 62500);
        assert_eq!(ceil_count(6.25, "T").unwrap(), 7);
        assert_eq!(ceil_count(0.0, "T").unwrap(), 1);
        assert!(ceil_count(f64::NAN, "T").is_err());
    }

    #[test]
    fn with_horizon_keeps_half_start() {
        let p = schedule_convex_diminishing(1.0, 1.0, 1.0, 0.0, 1.0, 0.0).unwrap();
        let q = p.with_horizon(10);
        assert_eq!((q.horizon, q.start), (10, 5));
    }
}
