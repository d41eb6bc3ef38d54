//! Euclidean projections onto simple closed convex sets.

use crate::linalg::{dist, DenseVector};

/// Projection onto a closed convex set X.
pub trait Projection: Send + Sync {
    fn project_in_place(&self, x: &mut [f64]);

    /// Diameter of X, when bounded.
    fn diameter(&self) -> Option<f64>;

    fn project(&self, x: &[f64]) -> DenseVector {
        let mut y = DenseVector::from(x);
        self.project_in_place(&mut y);
        y
    }

    fn contains(&self, x: &[f64], tol: f64) -> bool {
        dist(&self.project(x), x) <= tol
    }
}

/// X = ℝ^d.
#[derive(Debug, Clone, Copy, Default)]
pub struct Whole;

impl Projection for Whole {
    fn project_in_place(&self, _x: &mut [f64]) {}

    fn diameter(&self) -> Option<f64> {
        None
    }
}

/// Closed Euclidean ball.
#[derive(Debug, Clone)]
pub struct Ball {
    pub center: DenseVector,
    pub radius: f64,
}

impl Ball {
    pub fn centered(dim: usize, radius: f64) -> Self {
        Self {
            center: DenseVector::zeros(dim),
            radius,
        }
    }
}

impl Projection for Ball {
    fn project_in_place(&self, x: &mut [f64]) {
        let r = dist(x, &self.center);
        if r > self.radius {
            let s = self.radius / r;
            for (xi, ci) in x.iter_mut().zip(self.center.iter()) {
                *xi = ci + s * (*xi - ci);
            }
        }
    }

    fn diameter(&self) -> Option<f64> {
        Some(2.0 * self.radius)
    }
}

/// Axis-aligned box `lower ≤ x ≤ upper`.
#[derive(Debug, Clone)]
pub struct BoxSet {
    pub lower: DenseVector,
    pub upper: DenseVector,
}

impl BoxSet {
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Self {
            lower: DenseVector::new(vec![lo; dim]),
            upper: DenseVector::new(vec![hi; dim]),
        }
    }
}

impl Projection for BoxSet {
    fn project_in_place(&self, x: &mut [f64]) {
        for ((xi, lo), hi) in x.iter_mut().zip(self.lower.iter()).zip(self.upper.iter()) {
            *xi = xi.clamp(*lo, *hi);
        }
    }

    fn diameter(&self) -> Option<f64> {
        Some(dist(&self.lower, &self.upper))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_scales_radially() {
        let b = Ball::centered(2, 1.0);
        let y = b.project(&[3.0, 4.0]);
        assert!((y[0] - 0.6).abs() < 1e-15 && (y[1] - 0.8).abs() < 1e-15);
        assert_eq!(Ball::centered(2, 2.0).project(&[0.0, 0.0]).as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn box_is_identity_inside() {
        let b = BoxSet::cube(3, -2.0, 2.0);
        let x = [1.0, -1.5, 2.0];
        assert_eq!(b.project(&x).as_slice(), &x);
        assert_eq!(b.project(&[5.0, -9.0, 0.0]).as_slice(), &[2.0, -2.0, 0.0]);
    }
}
