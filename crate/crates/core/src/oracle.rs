//! First-order oracle contracts.

use crate::linalg::DenseVector;
use crate::rng::RngStream;
use std::fmt;
use std::sync::Arc;

/// A function value together with one element of the subdifferential.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientResult {
    pub value: f64,
    pub subgradient: DenseVector,
}

impl SubgradientResult {
    pub fn new(value: f64, subgradient: DenseVector) -> Self {
        Self { value, subgradient }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.subgradient.is_finite()
    }
}

/// One draw from a stochastic oracle: a value sample ω and a subgradient sample ξ.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticSample {
    pub value_sample: f64,
    pub subgradient_sample: DenseVector,
}

/// Deterministic value and subgradient oracle.
///
/// Implementations must be pure: identical inputs give identical outputs.
/// At kinks the convention is to return the zero slope for separable pieces.
pub trait Oracle: Send + Sync {
    fn dimension(&self) -> usize;

    fn evaluate(&self, x: &[f64]) -> SubgradientResult;

    fn value(&self, x: &[f64]) -> f64 {
        self.evaluate(x).value
    }
}

/// Unbiased stochastic oracle. Randomness only comes from the passed stream.
pub trait StochasticOracle: Send + Sync {
    fn dimension(&self) -> usize;

    fn sample_value(&self, x: &[f64], rng: &mut RngStream) -> f64;

    fn sample_subgradient(&self, x: &[f64], rng: &mut RngStream) -> DenseVector;

    fn sample(
        &self,
        x: &[f64],
        value_rng: &mut RngStream,
        subgradient_rng: &mut RngStream,
    ) -> StochasticSample {
        StochasticSample {
            value_sample: self.sample_value(x, value_rng),
            subgradient_sample: self.sample_subgradient(x, subgradient_rng),
        }
    }
}

/// Oracle backed by a closure returning `(value, subgradient)`.
pub struct FnOracle<F> {
    dim: usize,
    f: F,
}

impl<F> FnOracle<F>
where
    F: Fn(&[f64]) -> (f64, DenseVector) + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> Oracle for FnOracle<F>
where
    F: Fn(&[f64]) -> (f64, DenseVector) + Send + Sync,
{
    fn dimension(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, x: &[f64]) -> SubgradientResult {
        let (value, subgradient) = (self.f)(x);
        SubgradientResult { value, subgradient }
    }
}

impl<F> fmt::Debug for FnOracle<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnOracle").field("dim", &self.dim).finish()
    }
}

/// Adds independent Gaussian noise to an exact oracle.
///
/// Value noise has standard deviation `value_sd`; each subgradient coordinate
/// gets noise with standard deviation `subgradient_sd`.
#[derive(Clone)]
pub struct GaussianNoise {
    pub base: Arc<dyn Oracle>,
    pub value_sd: f64,
    pub subgradient_sd: f64,
}

impl StochasticOracle for GaussianNoise {
    fn dimension(&self) -> usize {
        self.base.dimension()
    }

    fn sample_value(&self, x: &[f64], rng: &mut RngStream) -> f64 {
        let v = self.base.value(x);
        if self.value_sd == 0.0 {
            v
        } else {
            v + self.value_sd * rng.standard_normal()
        }
    }

    fn sample_subgradient(&self, x: &[f64], rng: &mut RngStream) -> DenseVector {
        let mut g = self.base.evaluate(x).subgradient;
        if self.subgradient_sd != 0.0 {
            for gi in g.iter_mut() {
                *gi += self.subgradient_sd * rng.standard_normal();
            }
        }
        g
    }
}

/// Noise-free sampler: returns the exact oracle output and consumes no randomness.
#[derive(Clone)]
pub struct ExactSampler(pub Arc<dyn Oracle>);

impl StochasticOracle for ExactSampler {
    fn dimension(&self) -> usize {
        self.0.dimension()
    }

    fn sample_value(&self, x: &[f64], _rng: &mut RngStream) -> f64 {
        self.0.value(x)
    }

    fn sample_subgradient(&self, x: &[f64], _rng: &mut RngStream) -> DenseVector {
        self.0.evaluate(x).subgradient
    }
}
