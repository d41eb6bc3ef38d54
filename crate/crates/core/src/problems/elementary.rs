//! Small closed-form oracles used by the synthetic instances and tests.

use crate::linalg::{dist, dot, DenseVector};
use crate::oracle::{Oracle, SubgradientResult};

/// Sign with the kink convention `sign(0) = 0`.
pub fn sign0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `‖x − a‖₁`
#[derive(Debug, Clone)]
pub struct L1Distance {
    pub center: DenseVector,
}

impl Oracle for L1Distance {
    fn dimension(&self) -> usize {
        self.center.len()
    }

    fn evaluate(&self, x: &[f64]) -> SubgradientResult {
        let mut value = 0.0;
        let g = x
            .iter()
            .zip(self.center.iter())
            .map(|(xi, ai)| {
                value += (xi - ai).abs();
                sign0(xi - ai)
            })
            .collect();
        SubgradientResult::new(value, g)
    }
}

/// `‖x − c‖² − r²`
#[derive(Debug, Clone)]
pub struct SquaredDistance {
    pub center: DenseVector,
    pub radius: f64,
}

impl Oracle for SquaredDistance {
    fn dimension(&self) -> usize {
        self.center.len()
    }

    fn evaluate(&self, x: &[f64]) -> SubgradientResult {
        let g: DenseVector = x.iter().zip(self.center.iter()).map(|(xi, ci)| 2.0 * (xi - ci)).collect();
        let value = 0.25 * g.norm_sq() - self.radius * self.radius;
        SubgradientResult::new(value, g)
    }
}

/// `‖x − c‖ − r`, with zero subgradient at the center.
#[derive(Debug, Clone)]
pub struct NormDistance {
    pub center: DenseVector,
    pub radius: f64,
}

impl Oracle for NormDistance {
    fn dimension(&self) -> usize {
        self.center.len()
    }

    fn evaluate(&self, x: &[f64]) -> SubgradientResult {
        let r = dist(x, &self.center);
        let g = if r > 0.0 {
            x.iter().zip(self.center.iter()).map(|(xi, ci)| (xi - ci) / r).collect()
        } else {
            DenseVector::zeros(x.len())
        };
        SubgradientResult::new(r - self.radius, g)
    }
}

/// `cᵀx + b`
#[derive(Debug, Clone)]
pub struct Affine {
    pub coefficients: DenseVector,
    pub offset: f64,
}

impl Oracle for Affine {
    fn dimension(&self) -> usize {
        self.coefficients.len()
    }

    fn evaluate(&self, x: &[f64]) -> SubgradientResult {
        SubgradientResult::new(dot(&self.coefficients, x) + self.offset, self.coefficients.clone())
    }
}

/// A constant function.
#[derive(Debug, Clone)]
pub struct Constant {
    pub dim: usize,
    pub value: f64,
}

impl Oracle for Constant {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, _x: &[f64]) -> SubgradientResult {
        SubgradientResult::new(self.value, DenseVector::zeros(self.dim))
    }
}
