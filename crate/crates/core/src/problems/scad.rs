//! The SCAD sparsity penalty, a bounded and 2-weakly convex separable function.

use crate::linalg::DenseVector;
use crate::oracle::{Oracle, SubgradientResult};
use crate::problems::elementary::sign0;

/// Scalar penalty: `2|z|` up to 1, `−z² + 4|z| − 1` up to 2, then 3.
pub fn scad_scalar(z: f64) -> f64 {
    let a = z.abs();
    if a <= 1.0 {
        2.0 * a
    } else if a <= 2.0 {
        -a * a + 4.0 * a - 1.0
    } else {
        3.0
    }
}

/// Derivative of [`scad_scalar`], 0 at the origin.
pub fn scad_scalar_derivative(z: f64) -> f64 {
    let a = z.abs();
    let slope = if a <= 1.0 {
        2.0
    } else if a <= 2.0 {
        -2.0 * a + 4.0
    } else {
        0.0
    };
    sign0(z) * slope
}

pub fn scad(x: &[f64]) -> SubgradientResult {
    let value = x.iter().map(|&z| scad_scalar(z)).sum();
    let g: DenseVector = x.iter().map(|&z| scad_scalar_derivative(z)).collect();
    SubgradientResult::new(value, g)
}

/// SCAD over ℝ^d as an oracle.
#[derive(Debug, Clone, Copy)]
pub struct Scad {
    pub dim: usize,
}

impl Scad {
    /// Weak convexity modulus.
    pub const RHO: f64 = 2.0;

    /// Bound on the subgradient norm: each coordinate slope is at most 2.
    pub fn lipschitz(&self) -> f64 {
        2.0 * (self.dim as f64).sqrt()
    }
}

impl Oracle for Scad {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, x: &[f64]) -> SubgradientResult {
        scad(x)
    }
}
