//! Linear classifiers: training data, the hinge loss and threshold grids.

use crate::error::{Result, SsgError};
use crate::linalg::{DenseVector, FeatureRows, SparseVector};
use crate::oracle::{Oracle, SubgradientResult};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Labelled examples `(a_i, b_i)` plus the feature-only group sets D_p and D_u.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinearClassifierData {
    pub dim: usize,
    pub features: Vec<SparseVector>,
    /// Each label is −1 or +1.
    pub labels: Vec<f64>,
    pub group_p: Vec<SparseVector>,
    pub group_u: Vec<SparseVector>,
}

impl LinearClassifierData {
    pub fn new(dim: usize, features: Vec<SparseVector>, labels: Vec<f64>) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(SsgError::Contract(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        if let Some(b) = labels.iter().find(|b| **b != 1.0 && **b != -1.0) {
            return Err(SsgError::Contract(format!("label {b} is not ±1")));
        }
        if let Some(a) = features.iter().find(|a| a.min_dimension() > dim) {
            return Err(SsgError::DimensionMismatch { expected: dim, got: a.min_dimension() });
        }
        Ok(Self { dim, features, labels, group_p: Vec::new(), group_u: Vec::new() })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn has_groups(&self) -> bool {
        !self.group_p.is_empty() && !self.group_u.is_empty()
    }

    /// Largest score scale `max_i ‖a_i‖`.
    pub fn max_feature_norm(&self) -> f64 {
        self.features.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

/// Empirical hinge loss `L(x) = (1/n) Σ (1 − b_i xᵀa_i)_+`.
#[derive(Debug, Clone)]
pub struct HingeLoss {
    data: Arc<LinearClassifierData>,
    rows: Arc<FeatureRows>,
}

pub fn hinge_erm_oracle(data: Arc<LinearClassifierData>) -> Result<HingeLoss> {
    if data.is_empty() {
        return Err(SsgError::EmptyData("hinge loss needs at least one example".into()));
    }
    let rows = Arc::new(FeatureRows::new(&data.features, data.dim));
    Ok(HingeLoss { data, rows })
}

impl HingeLoss {
    /// `(1/n) Σ ‖a_i‖`, a bound on every subgradient norm.
    pub fn lipschitz(&self) -> f64 {
        self.data.features.iter().map(|a| a.norm()).sum::<f64>() / self.data.len() as f64
    }
}

impl Oracle for HingeLoss {
    fn dimension(&self) -> usize {
        self.data.dim
    }

    fn evaluate(&self, x: &[f64]) -> SubgradientResult {
        let n = self.data.len() as f64;
        let labels = &self.data.labels;
        let mut value = 0.0;
        let mut g = DenseVector::zeros(self.data.dim);
        self.rows.scan(x, &mut g, |i, s| {
            let margin = labels[i] * s;
            if margin < 1.0 {
                value += 1.0 - margin;
                -labels[i]
            } else {
                0.0
            }
        });
        g.scale(1.0 / n);
        SubgradientResult::new(value / n, g)
    }
}

/// Unconstrained subgradient descent on the hinge loss from x = 0 with
/// `η_t = eta/√(t+1)`. Returns the best value seen and its point.
pub fn erm_pretrain(data: Arc<LinearClassifierData>, iters: usize, eta: f64) -> Result<(f64, DenseVector)> {
    let oracle = hinge_erm_oracle(data)?;
    let mut x = DenseVector::zeros(oracle.dimension());
    let mut best = (f64::INFINITY, x.clone());
    for t in 0..=iters {
        let r = oracle.evaluate(&x);
        if r.value < best.0 {
            best = (r.value, x.clone());
        }
        if t == iters {
            break;
        }
        x.axpy(-eta / ((t + 1) as f64).sqrt(), &r.subgradient);
    }
    Ok(best)
}

/// Decision thresholds Θ, strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaGrid {
    pub thresholds: Vec<f64>,
    #[serde(default)]
    pub warning: Option<String>,
}

pub const THETA_GRID_SIZE: usize = 400;

/// 400 equally spaced thresholds covering the score range of `x_erm` on D,
/// widened by half its length on each side.
pub fn theta_grid(data: &LinearClassifierData, x_erm: &[f64]) -> Result<ThetaGrid> {
    if data.is_empty() {
        return Err(SsgError::EmptyData("threshold grid needs scores".into()));
    }
    let scores: Vec<f64> = data.features.iter().map(|a| a.dot(x_erm)).collect();
    Ok(theta_grid_from_scores(&scores))
}

pub fn theta_grid_from_scores(scores: &[f64]) -> ThetaGrid {
    let lo = scores.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return ThetaGrid {
            thresholds: vec![lo],
            warning: Some(format!("all scores equal {lo}; threshold grid collapses to one point")),
        };
    }
    let span = hi - lo;
    let a = lo - 0.5 * span;
    let b = hi + 0.5 * span;
    let n = THETA_GRID_SIZE;
    let step = (b - a) / (n - 1) as f64;
    let mut thresholds: Vec<f64> = (0..n).map(|k| a + step * k as f64).collect();
    thresholds[n - 1] = b;
    ThetaGrid { thresholds, warning: None }
}
