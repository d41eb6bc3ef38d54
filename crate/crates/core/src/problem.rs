//! A constrained problem `min f(x) s.t. g(x) ≤ 0, x ∈ X` with its known constants.

use crate::error::{Result, SsgError};
use crate::linalg::DenseVector;
use crate::oracle::{Oracle, StochasticOracle, SubgradientResult};
use crate::projection::Projection;
use crate::rng::RngStream;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// An oracle that is either exact, or exact plus an unbiased sampler.
///
/// The exact oracle is always available so that metrics and the stationarity
/// evaluator can measure the true problem.
#[derive(Clone)]
pub enum OracleSource {
    Exact(Arc<dyn Oracle>),
    Sampled {
        exact: Arc<dyn Oracle>,
        sampler: Arc<dyn StochasticOracle>,
    },
}

impl OracleSource {
    pub fn exact(&self) -> &Arc<dyn Oracle> {
        match self {
            OracleSource::Exact(o) => o,
            OracleSource::Sampled { exact, .. } => exact,
        }
    }

    pub fn sampler(&self) -> Option<&Arc<dyn StochasticOracle>> {
        match self {
            OracleSource::Exact(_) => None,
            OracleSource::Sampled { sampler, .. } => Some(sampler),
        }
    }
}

impl<O: Oracle + 'static> From<O> for OracleSource {
    fn from(o: O) -> Self {
        OracleSource::Exact(Arc::new(o))
    }
}

/// Analytic constants known for an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// Bound on every subgradient norm of f and g over X.
    pub m: f64,
    /// Weak convexity modulus shared by f and g.
    pub rho: f64,
    /// Diameter of X, when bounded.
    pub diameter: Option<f64>,
    pub rho_bar: Option<f64>,
    pub theta: Option<f64>,
    pub sigma: Option<f64>,
    pub g_feas_value: Option<f64>,
    pub x_feas: Option<DenseVector>,
    /// Strong convexity modulus of g.
    pub mu: Option<f64>,
    /// Whether g itself is convex (as opposed to only ρ-weakly convex).
    pub constraint_convex: bool,
}

impl Constants {
    pub fn new(m: f64, rho: f64) -> Self {
        Self {
            m,
            rho,
            diameter: None,
            rho_bar: None,
            theta: None,
            sigma: None,
            g_feas_value: None,
            x_feas: None,
            mu: None,
            constraint_convex: rho == 0.0,
        }
    }
}

#[derive(Clone)]
pub struct ProblemInstance {
    name: String,
    dimension: usize,
    objective: OracleSource,
    constraint: OracleSource,
    projection: Arc<dyn Projection>,
    constants: Constants,
}

impl fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("constants", &self.constants)
            .finish()
    }
}

impl ProblemInstance {
    /// Validates dimensions and constants. When `x_feas` is given, `g(x_feas)`
    /// is evaluated and stored as `g_feas_value`; it must be negative.
    pub fn new(
        name: impl Into<String>,
        objective: impl Into<OracleSource>,
        constraint: impl Into<OracleSource>,
        projection: Arc<dyn Projection>,
        mut constants: Constants,
    ) -> Result<Self> {
        let objective = objective.into();
        let constraint = constraint.into();
        let dimension = objective.exact().dimension();
        if dimension == 0 {
            return Err(SsgError::Contract("dimension must be positive".into()));
        }
        check_dim(dimension, constraint.exact().dimension())?;
        for s in [objective.sampler(), constraint.sampler()].into_iter().flatten() {
            check_dim(dimension, s.dimension())?;
        }
        if !(constants.m > 0.0 && constants.m.is_finite()) {
            return Err(SsgError::Contract(format!("M must be positive, got {}", constants.m)));
        }
        if !(constants.rho >= 0.0 && constants.rho.is_finite()) {
            return Err(SsgError::Contract(format!("rho must be nonnegative, got {}", constants.rho)));
        }
        if constants.diameter.is_none() {
            constants.diameter = projection.diameter();
        }
        if let Some(x) = &constants.x_feas {
            check_dim(dimension, x.len())?;
            let g = constraint.exact().value(x);
            if !(g < 0.0) {
                return Err(SsgError::InvalidSlater { g_feas: g });
            }
            constants.g_feas_value = Some(g);
        } else if let Some(g) = constants.g_feas_value {
            if !(g < 0.0) {
                return Err(SsgError::InvalidSlater { g_feas: g });
            }
        }
        Ok(Self {
            name: name.into(),
            dimension,
            objective,
            constraint,
            projection,
            constants,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    pub fn objective(&self) -> &OracleSource {
        &self.objective
    }

    pub fn constraint(&self) -> &OracleSource {
        &self.constraint
    }

    pub fn projection(&self) -> &Arc<dyn Projection> {
        &self.projection
    }

    pub fn is_stochastic(&self) -> bool {
        self.objective.sampler().is_some() || self.constraint.sampler().is_some()
    }

    pub fn with_objective_sampler(mut self, sampler: Arc<dyn StochasticOracle>) -> Result<Self> {
        check_dim(self.dimension, sampler.dimension())?;
        self.objective = OracleSource::Sampled {
            exact: self.objective.exact().clone(),
            sampler,
        };
        Ok(self)
    }

    pub fn with_constraint_sampler(mut self, sampler: Arc<dyn StochasticOracle>) -> Result<Self> {
        check_dim(self.dimension, sampler.dimension())?;
        self.constraint = OracleSource::Sampled {
            exact: self.constraint.exact().clone(),
            sampler,
        };
        Ok(self)
    }

    pub fn project(&self, x: &[f64]) -> Result<DenseVector> {
        self.check_point(x)?;
        Ok(self.projection.project(x))
    }

    pub fn eval_objective(&self, x: &[f64]) -> Result<SubgradientResult> {
        self.check_point(x)?;
        finite(self.objective.exact().evaluate(x), "objective oracle output")
    }

    pub fn eval_constraint(&self, x: &[f64]) -> Result<SubgradientResult> {
        self.check_point(x)?;
        finite(self.constraint.exact().evaluate(x), "constraint oracle output")
    }

    /// One value sample ω of g. Falls back to the exact value.
    pub(crate) fn sample_constraint_value(&self, x: &[f64], rng: &mut RngStream) -> Result<f64> {
        let v = match self.constraint.sampler() {
            Some(s) => s.sample_value(x, rng),
            None => self.constraint.exact().value(x),
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(SsgError::NonFinite { what: "constraint value sample", iteration: None })
        }
    }

    pub(crate) fn sample_subgradient(
        &self,
        objective: bool,
        x: &[f64],
        rng: &mut RngStream,
    ) -> Result<DenseVector> {
        let source = if objective { &self.objective } else { &self.constraint };
        let g = match source.sampler() {
            Some(s) => s.sample_subgradient(x, rng),
            None => source.exact().evaluate(x).subgradient,
        };
        if g.is_finite() {
            Ok(g)
        } else {
            Err(SsgError::NonFinite { what: "subgradient sample", iteration: None })
        }
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        check_dim(self.dimension, x.len())?;
        if x.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(SsgError::NonFinite { what: "input point", iteration: None })
        }
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(SsgError::DimensionMismatch { expected, got })
    }
}

fn finite(r: SubgradientResult, what: &'static str) -> Result<SubgradientResult> {
    if r.is_finite() {
        Ok(r)
    } else {
        Err(SsgError::NonFinite { what, iteration: None })
    }
}
