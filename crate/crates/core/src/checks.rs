//! Numerical certificates for oracle contracts: finite differences,
//! weak convexity along segments, projection nonexpansiveness.

use crate::linalg::{dist, dot, DenseVector};
use crate::oracle::Oracle;
use crate::projection::Projection;

/// Result of comparing a subgradient against central differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FdOutcome {
    /// One-sided slopes disagree along some axis; the point is treated as a kink.
    Kink { axis: usize },
    /// `‖fd − ζ‖ / max(‖ζ‖, 1)`
    Checked { relative_error: f64 },
}

/// Central differences with step `h` along every axis.
///
/// Axes where the forward and backward slopes differ by more than
/// `kink_tol` are reported as kinks instead of compared.
pub fn finite_difference_check(oracle: &dyn Oracle, x: &[f64], h: f64, kink_tol: f64) -> FdOutcome {
    let r = oracle.evaluate(x);
    let mut y = DenseVector::from(x);
    let mut err_sq = 0.0;
    for i in 0..x.len() {
        y[i] = x[i] + h;
        let fp = oracle.value(&y);
        y[i] = x[i] - h;
        let fm = oracle.value(&y);
        y[i] = x[i];
        let forward = (fp - r.value) / h;
        let backward = (r.value - fm) / h;
        if (forward - backward).abs() > kink_tol {
            return FdOutcome::Kink { axis: i };
        }
        let central = (fp - fm) / (2.0 * h);
        err_sq += (central - r.subgradient[i]).powi(2);
    }
    FdOutcome::Checked { relative_error: err_sq.sqrt() / r.subgradient.norm().max(1.0) }
}

/// `φ(tx + (1−t)y) − tφ(x) − (1−t)φ(y)` with `φ = h + (ρ/2)‖·‖²`.
///
/// Nonpositive (up to rounding) whenever h is ρ-weakly convex.
pub fn weak_convexity_gap(oracle: &dyn Oracle, rho: f64, x: &[f64], y: &[f64], t: f64) -> f64 {
    let phi = |z: &[f64]| oracle.value(z) + 0.5 * rho * dot(z, z);
    let z: DenseVector = x.iter().zip(y).map(|(a, b)| t * a + (1.0 - t) * b).collect();
    phi(&z) - t * phi(x) - (1.0 - t) * phi(y)
}

/// `‖P(x) − P(y)‖ / ‖x − y‖`, which must not exceed 1.
pub fn nonexpansiveness_ratio(projection: &dyn Projection, x: &[f64], y: &[f64]) -> f64 {
    let d = dist(x, y);
    if d == 0.0 {
        return 0.0;
    }
    dist(&projection.project(x), &projection.project(y)) / d
}

/// Largest `‖ζ(x)‖ − M` over the points; nonpositive when M bounds the subgradients.
pub fn subgradient_bound_excess<'a>(oracle: &dyn Oracle, m: f64, points: impl IntoIterator<Item = &'a [f64]>) -> f64 {
    points
        .into_iter()
        .map(|x| oracle.evaluate(x).subgradient.norm() - m)
        .fold(f64::NEG_INFINITY, f64::max)
}
