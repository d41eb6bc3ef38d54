//! Smoothed group-fairness measures comparing predicted-positive rates.

use crate::error::{Result, SsgError};
use crate::linalg::{DenseVector, FeatureRows, SparseVector};
use crate::oracle::{Oracle, SubgradientResult};
use crate::problems::classifier::{LinearClassifierData, ThetaGrid};
use crate::problems::elementary::sign0;
use std::sync::Arc;

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `max_{θ∈Θ} |mean_p σ(xᵀa − θ) − mean_u σ(xᵀa − θ)|`.
///
/// With Θ = {0} this is the demographic parity gap.
#[derive(Debug, Clone)]
pub struct FairnessGap {
    dim: usize,
    group_p: Arc<FeatureRows>,
    group_u: Arc<FeatureRows>,
    thresholds: Vec<f64>,
}

fn groups(data: &LinearClassifierData) -> Result<(Arc<FeatureRows>, Arc<FeatureRows>)> {
    if data.group_p.is_empty() {
        return Err(SsgError::EmptyData("protected group is empty".into()));
    }
    if data.group_u.is_empty() {
        return Err(SsgError::EmptyData("unprotected group is empty".into()));
    }
    Ok((Arc::new(FeatureRows::new(&data.group_p, data.dim)), Arc::new(FeatureRows::new(&data.group_u, data.dim))))
}

pub fn roc_fairness_oracle(data: &LinearClassifierData, grid: &ThetaGrid) -> Result<FairnessGap> {
    if grid.thresholds.is_empty() {
        return Err(SsgError::Contract("empty threshold grid".into()));
    }
    let (group_p, group_u) = groups(data)?;
    Ok(FairnessGap { dim: data.dim, group_p, group_u, thresholds: grid.thresholds.clone() })
}

pub fn dp_oracle(data: &LinearClassifierData) -> Result<FairnessGap> {
    let (group_p, group_u) = groups(data)?;
    Ok(FairnessGap { dim: data.dim, group_p, group_u, thresholds: vec![0.0] })
}

fn mean_sigmoid(scores: &[f64], theta: f64) -> f64 {
    scores.iter().map(|s| sigmoid(s - theta)).sum::<f64>() / scores.len() as f64
}

/// `e^{−s}` per score, so that `σ(s − θ) = 1/(1 + e^θ e^{−s})` costs a
/// division instead of an exponential for every threshold.
struct ExpScores {
    p: Vec<f64>,
    u: Vec<f64>,
}

impl ExpScores {
    /// Beyond this magnitude the product form could hit 0·∞.
    const RANGE: f64 = 700.0;

    fn new(sp: &[f64], su: &[f64], thresholds: &[f64]) -> Option<Self> {
        let ok = |v: &f64| v.abs() <= Self::RANGE;
        if !(sp.iter().all(ok) && su.iter().all(ok) && thresholds.iter().all(ok)) {
            return None;
        }
        let e = |s: &[f64]| s.iter().map(|v| (-v).exp()).collect();
        Some(Self { p: e(sp), u: e(su) })
    }

    fn mean(e: &[f64], scale: f64) -> f64 {
        e.iter().map(|v| 1.0 / (1.0 + scale * v)).sum::<f64>() / e.len() as f64
    }

    fn gap_abs(&self, theta: f64) -> f64 {
        let k = theta.exp();
        (Self::mean(&self.p, k) - Self::mean(&self.u, k)).abs()
    }
}

impl FairnessGap {
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    fn scores(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let collect = |rows: &FeatureRows| {
            let mut out = Vec::with_capacity(rows.len());
            rows.scan(x, &mut [], |_, s| {
                out.push(s);
                0.0
            });
            out
        };
        (collect(&self.group_p), collect(&self.group_u))
    }

    /// Signed gap `h_θ(x) = mean_p σ(xᵀa − θ) − mean_u σ(xᵀa − θ)` and its gradient.
    pub fn signed_gap(&self, x: &[f64], theta: f64) -> SubgradientResult {
        let mut value = 0.0;
        let mut g = DenseVector::zeros(self.dim);
        for (rows, sign) in [(&self.group_p, 1.0), (&self.group_u, -1.0)] {
            let w = sign / rows.len() as f64;
            let mut mean = 0.0;
            rows.scan(x, &mut g, |_, s| {
                let p = sigmoid(s - theta);
                mean += p;
                w * p * (1.0 - p)
            });
            value += w * mean;
        }
        SubgradientResult::new(value, g)
    }

    /// Index into Θ of the maximizing threshold (lowest index on ties).
    pub fn active_threshold(&self, x: &[f64]) -> usize {
        let (sp, su) = self.scores(x);
        self.argmax(&sp, &su).0
    }

    fn gap_abs(sp: &[f64], su: &[f64], theta: f64) -> f64 {
        (mean_sigmoid(sp, theta) - mean_sigmoid(su, theta)).abs()
    }

    /// Coarse pass over every `⌊√|Θ|⌋`-th threshold, then only the thresholds
    /// whose Lipschitz upper bound from the nearest coarse values can still
    /// beat the best found. Each mean sigmoid moves by at most |Δθ|/4, so the
    /// gap is 1/4-Lipschitz in θ and the result equals the exhaustive scan.
    fn argmax(&self, sp: &[f64], su: &[f64]) -> (usize, f64) {
        const LIPSCHITZ: f64 = 0.25;
        const SLACK: f64 = 1e-12;
        let th = &self.thresholds;
        let n = th.len();
        let fast = ExpScores::new(sp, su, th);
        let gap = |theta: f64| match &fast {
            Some(f) => f.gap_abs(theta),
            None => Self::gap_abs(sp, su, theta),
        };
        let stride = ((n as f64).sqrt() as usize).max(1);
        let mut vals: Vec<Option<f64>> = vec![None; n];
        let mut best = f64::NEG_INFINITY;
        for k in (0..n).step_by(stride) {
            let v = gap(th[k]);
            vals[k] = Some(v);
            best = best.max(v);
        }
        for k in 0..n {
            if vals[k].is_some() {
                continue;
            }
            let left = k - k % stride;
            let right = left + stride;
            let mut ub = vals[left].unwrap_or(f64::INFINITY) + LIPSCHITZ * (th[k] - th[left]);
            if let Some(Some(v)) = vals.get(right) {
                ub = ub.min(v + LIPSCHITZ * (th[right] - th[k]));
            }
            if ub + SLACK >= best {
                let v = gap(th[k]);
                vals[k] = Some(v);
                best = best.max(v);
            }
        }
        let mut out = (0usize, f64::NEG_INFINITY);
        for (k, v) in vals.iter().enumerate() {
            if let Some(v) = *v {
                if v > out.1 {
                    out = (k, v);
                }
            }
        }
        out
    }

    /// Exhaustive version of the threshold search, kept for tests.
    #[cfg(test)]
    fn argmax_exhaustive(&self, sp: &[f64], su: &[f64]) -> (usize, f64) {
        let mut best = (0usize, f64::NEG_INFINITY);
        for (k, &theta) in self.thresholds.iter().enumerate() {
            let v = Self::gap_abs(sp, su, theta);
            if v > best.1 {
                best = (k, v);
            }
        }
        best
    }

    /// Gap between the best and second-best threshold values; small means near a tie.
    pub fn tie_margin(&self, x: &[f64]) -> f64 {
        let (sp, su) = self.scores(x);
        let mut vals: Vec<f64> = self
            .thresholds
            .iter()
            .map(|&t| (mean_sigmoid(&sp, t) - mean_sigmoid(&su, t)).abs())
            .collect();
        if vals.len() < 2 {
            return f64::INFINITY;
        }
        vals.sort_by(|a, b| b.total_cmp(a));
        vals[0] - vals[1]
    }
}

impl Oracle for FairnessGap {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, x: &[f64]) -> SubgradientResult {
        let k = if self.thresholds.len() == 1 {
            0
        } else {
            let (sp, su) = self.scores(x);
            self.argmax(&sp, &su).0
        };
        let mut r = self.signed_gap(x, self.thresholds[k]);
        let s = sign0(r.value);
        r.value = r.value.abs();
        r.subgradient.scale(s);
        r
    }
}

/// `α = (1/(4n_p)) Σ‖a^p‖ + (1/(4n_u)) Σ‖a^u‖` and `β`, the same with squared norms.
///
/// α bounds the gradient of each signed gap and β its Lipschitz constant.
pub fn lipschitz_constants(data: &LinearClassifierData) -> Result<(f64, f64)> {
    let (p, u) = (&data.group_p, &data.group_u);
    if p.is_empty() || u.is_empty() {
        return Err(SsgError::EmptyData("both groups must be nonempty".into()));
    }
    let avg = |rows: &[SparseVector], f: &dyn Fn(&SparseVector) -> f64| {
        rows.iter().map(f).sum::<f64>() / (4.0 * rows.len() as f64)
    };
    let alpha = avg(p, &|a| a.norm()) + avg(u, &|a| a.norm());
    let beta = avg(p, &|a| a.norm_sq()) + avg(u, &|a| a.norm_sq());
    Ok((alpha, beta))
}
