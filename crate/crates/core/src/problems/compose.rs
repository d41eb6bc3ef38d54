//! Combinators that build new oracles from existing ones.

use crate::error::{Result, SsgError};
use crate::linalg::{dot, DenseVector};
use crate::oracle::{Oracle, SubgradientResult};
use crate::problems::elementary::sign0;
use std::sync::Arc;

/// `g(x) = max_i g_i(x)`. Ties go to the lowest index.
#[derive(Clone)]
pub struct MaxOracle {
    components: Vec<Arc<dyn Oracle>>,
}

pub fn max_constraint(components: Vec<Arc<dyn Oracle>>) -> Result<MaxOracle> {
    let first = components
        .first()
        .ok_or_else(|| SsgError::Contract("max of an empty family".into()))?;
    let dim = first.dimension();
    for c in &components {
        if c.dimension() != dim {
            return Err(SsgError::DimensionMismatch { expected: dim, got: c.dimension() });
        }
    }
    Ok(MaxOracle { components })
}

impl Oracle for MaxOracle {
    fn dimension(&self) -> usize {
        self.components[0].dimension()
    }

    fn evaluate(&self, x: &[f64]) -> SubgradientResult {
        let mut best = self.components[0].evaluate(x);
        for c in &self.components[1..] {
            let r = c.evaluate(x);
            if r.value > best.value {
                best = r;
            }
        }
        best
    }
}

/// `‖Ax − b‖_∞`, with subgradient `sign(r_k) A_k` at the lowest maximizing row.
#[derive(Debug, Clone)]
pub struct InfNormResidual {
    rows: Vec<DenseVector>,
    rhs: DenseVector,
}

impl InfNormResidual {
    pub fn new(rows: Vec<DenseVector>, rhs: DenseVector) -> Result<Self> {
        if rows.is_empty() || rows.len() != rhs.len() {
            return Err(SsgError::Contract(format!(
                "{} rows against a right-hand side of length {}",
                rows.len(),
                rhs.len()
            )));
        }
        let d = rows[0].len();
        if let Some(r) = rows.iter().find(|r| r.len() != d) {
            return Err(SsgError::DimensionMismatch { expected: d, got: r.len() });
        }
        Ok(Self { rows, rhs })
    }
}

impl Oracle for InfNormResidual {
    fn dimension(&self) -> usize {
        self.rows[0].len()
    }

    fn evaluate(&self, x: &[f64]) -> SubgradientResult {
        let mut best = (f64::NEG_INFINITY, 0usize, 0.0);
        for (k, (row, b)) in self.rows.iter().zip(self.rhs.iter()).enumerate() {
            let r = dot(row, x) - b;
            if r.abs() > best.0 {
                best = (r.abs(), k, r);
            }
        }
        let (value, k, r) = best;
        let mut g = self.rows[k].clone();
        g.scale(sign0(r));
        SubgradientResult::new(value, g)
    }
}

/// Folds affine equalities `Ax = b` into an inequality: `max{h(x), ‖Ax − b‖_∞}`.
pub fn equality_reduction(h: Arc<dyn Oracle>, rows: Vec<DenseVector>, rhs: DenseVector) -> Result<MaxOracle> {
    let residual = InfNormResidual::new(rows, rhs)?;
    max_constraint(vec![h, Arc::new(residual)])
}

/// `Σ_k w_k f_k(x)`
#[derive(Clone)]
pub struct WeightedSum {
    terms: Vec<(f64, Arc<dyn Oracle>)>,
}

impl WeightedSum {
    pub fn new(terms: Vec<(f64, Arc<dyn Oracle>)>) -> Result<Self> {
        let dim = terms
            .first()
            .ok_or_else(|| SsgError::Contract("empty sum".into()))?
            .1
            .dimension();
        if let Some((_, t)) = terms.iter().find(|(_, t)| t.dimension() != dim) {
            return Err(SsgError::DimensionMismatch { expected: dim, got: t.dimension() });
        }
        Ok(Self { terms })
    }
}

impl Oracle for WeightedSum {
    fn dimension(&self) -> usize {
        self.terms[0].1.dimension()
    }

    fn evaluate(&self, x: &[f64]) -> SubgradientResult {
        let mut value = 0.0;
        let mut g = DenseVector::zeros(x.len());
        for (w, t) in &self.terms {
            if *w == 0.0 {
                continue;
            }
            let r = t.evaluate(x);
            value += w * r.value;
            g.axpy(*w, &r.subgradient);
        }
        SubgradientResult::new(value, g)
    }
}

/// `f(x) + offset`
#[derive(Clone)]
pub struct Shifted {
    pub base: Arc<dyn Oracle>,
    pub offset: f64,
}

impl Oracle for Shifted {
    fn dimension(&self) -> usize {
        self.base.dimension()
    }

    fn evaluate(&self, x: &[f64]) -> SubgradientResult {
        let mut r = self.base.evaluate(x);
        r.value += self.offset;
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::elementary::{Affine, Constant};

    fn affine(c: f64, b: f64) -> Arc<dyn Oracle> {
        Arc::new(Affine { coefficients: DenseVector::from([c]), offset: b })
    }

    #[test]
    fn max_tie_goes_to_first() {
        let g = max_constraint(vec![affine(1.0, -1.0), affine(-1.0, -1.0)]).unwrap();
        let r = g.evaluate(&[0.0]);
        assert_eq!(r.value, -1.0);
        assert_eq!(r.subgradient.as_slice(), &[1.0]);
    }

    #[test]
    fn inf_norm_residual() {
        let rows = vec![DenseVector::from([1.0, 0.0]), DenseVector::from([0.0, 1.0])];
        let r = InfNormResidual::new(rows, DenseVector::zeros(2)).unwrap().evaluate(&[1.0, -2.0]);
        assert_eq!(r.value, 2.0);
        assert_eq!(r.subgradient.as_slice(), &[0.0, -1.0]);
    }

    #[test]
    fn satisfied_equalities_select_the_residual() {
        let h: Arc<dyn Oracle> = Arc::new(Constant { dim: 2, value: -0.5 });
        let rows = vec![DenseVector::from([1.0, 1.0])];
        let g = equality_reduction(h, rows, DenseVector::from([0.0])).unwrap();
        let r = g.evaluate(&[1.0, -1.0]);
        assert_eq!(r.value, 0.0);
        assert_eq!(r.subgradient.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn empty_max_is_rejected() {
        assert!(max_constraint(vec![]).is_err());
    }
}
