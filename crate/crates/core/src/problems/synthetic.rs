//! Low-dimensional instances with known geometry.

use crate::error::{Result, SsgError};
use crate::linalg::{dist, dist_sq, DenseVector};
use crate::oracle::{GaussianNoise, Oracle, SubgradientResult};
use crate::problem::{Constants, ProblemInstance};
use crate::problems::elementary::{Affine, L1Distance, SquaredDistance};
use crate::projection::{Ball, BoxSet};
use std::sync::Arc;

/// `g(x) = min(‖x−c₁‖², ‖x−c₂‖²) − r²`, whose feasible set is a union of two balls.
///
/// g is smooth and convex on each side of the bisector of c₁c₂; the
/// declared ρ = 2 covers each piece. Across the bisector g has a concave
/// kink, so it is not weakly convex there; the bisector never lies within
/// the sharpness band of S when the balls are well separated.
#[derive(Debug, Clone)]
pub struct TwoBall {
    pub c1: DenseVector,
    pub c2: DenseVector,
    pub radius: f64,
}

impl TwoBall {
    pub const RHO: f64 = 2.0;

    pub fn new(c1: DenseVector, c2: DenseVector, radius: f64) -> Result<Self> {
        if c1.len() != c2.len() {
            return Err(SsgError::DimensionMismatch { expected: c1.len(), got: c2.len() });
        }
        if !(radius > 0.0) {
            return Err(SsgError::Contract(format!("radius must be positive, got {radius}")));
        }
        Ok(Self { c1, c2, radius })
    }

    fn nearest(&self, x: &[f64]) -> &DenseVector {
        if dist_sq(x, &self.c1) <= dist_sq(x, &self.c2) {
            &self.c1
        } else {
            &self.c2
        }
    }

    /// Euclidean distance from x to S.
    pub fn distance(&self, x: &[f64]) -> f64 {
        (dist(x, self.nearest(x)) - self.radius).max(0.0)
    }

    /// Smallest ‖∇g‖ over `samples` points spread on both spheres, skipping
    /// points that fall inside the other ball.
    pub fn calibrated_nu(&self, samples: usize) -> f64 {
        let d = self.c1.len();
        let mut best = f64::INFINITY;
        for (c, other) in [(&self.c1, &self.c2), (&self.c2, &self.c1)] {
            for k in 0..samples {
                let mut x = c.clone();
                // Spread directions over the circle in the first two coordinates.
                let phi = std::f64::consts::TAU * k as f64 / samples as f64;
                x[0] += self.radius * phi.cos();
                if d > 1 {
                    x[1] += self.radius * phi.sin();
                }
                if dist(&x, other) < self.radius {
                    continue;
                }
                best = best.min(self.evaluate(&x).subgradient.norm());
            }
        }
        best
    }

    /// The instance with linear objective `cᵀx` over the box `[−h, h]^d`.
    pub fn problem(&self, objective: DenseVector, half_width: f64) -> Result<ProblemInstance> {
        let d = self.c1.len();
        if objective.len() != d {
            return Err(SsgError::DimensionMismatch { expected: d, got: objective.len() });
        }
        let far = (d as f64).sqrt() * half_width + self.c1.norm().max(self.c2.norm());
        let m = objective.norm().max(2.0 * far);
        let mut k = Constants::new(m, Self::RHO);
        k.x_feas = Some(self.c1.clone());
        k.constraint_convex = false;
        ProblemInstance::new(
            "two-ball",
            Affine { coefficients: objective, offset: 0.0 },
            self.clone(),
            Arc::new(BoxSet::cube(d, -half_width, half_width)),
            k,
        )
    }
}

impl Oracle for TwoBall {
    fn dimension(&self) -> usize {
        self.c1.len()
    }

    fn evaluate(&self, x: &[f64]) -> SubgradientResult {
        let c = self.nearest(x);
        let g: DenseVector = x.iter().zip(c.iter()).map(|(xi, ci)| 2.0 * (xi - ci)).collect();
        SubgradientResult::new(0.25 * g.norm_sq() - self.radius * self.radius, g)
    }
}

/// Two-ball instance with a box of half-width `max‖c‖∞ + 3r`.
pub fn synthetic_two_ball(c1: DenseVector, c2: DenseVector, radius: f64, objective: DenseVector) -> Result<ProblemInstance> {
    let w = c1.iter().chain(c2.iter()).fold(0.0f64, |m, v| m.max(v.abs())) + 3.0 * radius;
    TwoBall::new(c1, c2, radius)?.problem(objective, w)
}

/// `min ‖x − a‖₁  s.t.  ‖x‖² − 1 ≤ 0,  ‖x‖ ≤ outer`.
///
/// Convex, and the constraint is 2-strongly convex. The origin is a Slater
/// point with g = −1.
pub fn l1_over_unit_disk(a: DenseVector, outer: f64) -> Result<ProblemInstance> {
    let d = a.len();
    let m = (d as f64).sqrt().max(2.0 * outer);
    let mut k = Constants::new(m, 0.0);
    k.x_feas = Some(DenseVector::zeros(d));
    k.mu = Some(2.0);
    k.constraint_convex = true;
    ProblemInstance::new(
        "l1-disk",
        L1Distance { center: a },
        SquaredDistance { center: DenseVector::zeros(d), radius: 1.0 },
        Arc::new(Ball::centered(d, outer)),
        k,
    )
}

/// [`l1_over_unit_disk`] with Gaussian noise on both subgradient oracles.
/// Function values stay exact.
pub fn noisy_l1_over_unit_disk(a: DenseVector, outer: f64, subgradient_sd: f64) -> Result<ProblemInstance> {
    let p = l1_over_unit_disk(a, outer)?;
    let f = p.objective().exact().clone();
    let g = p.constraint().exact().clone();
    p.with_objective_sampler(Arc::new(GaussianNoise { base: f, value_sd: 0.0, subgradient_sd }))?
        .with_constraint_sampler(Arc::new(GaussianNoise { base: g, value_sd: 0.0, subgradient_sd }))
}
