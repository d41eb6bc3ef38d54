//! Dense and sparse vectors of 64-bit reals.

use serde::{Deserialize, Serialize};
use std::ops::{Deref, DerefMut};

/// A point or direction in ℝ^d.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn new(entries: Vec<f64>) -> Self {
        Self(entries)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &[f64]) {
        axpy(&mut self.0, a, x);
    }

    pub fn scale(&mut self, a: f64) {
        self.0.iter_mut().for_each(|v| *v *= a);
    }
}

impl Deref for DenseVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for DenseVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for DenseVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl From<&[f64]> for DenseVector {
    fn from(v: &[f64]) -> Self {
        Self(v.to_vec())
    }
}

impl<const N: usize> From<[f64; N]> for DenseVector {
    fn from(v: [f64; N]) -> Self {
        Self(v.to_vec())
    }
}

impl FromIterator<f64> for DenseVector {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// A sparse feature vector with 0-based, strictly increasing indices.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVector {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Builds from (index, value) pairs in any order. Duplicates are summed.
    pub fn from_pairs(mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut indices = Vec::with_capacity(pairs.len());
        let mut values: Vec<f64> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            if indices.last() == Some(&i) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(i);
                values.push(v);
            }
        }
        Self { indices, values }
    }

    pub fn from_dense(x: &[f64]) -> Self {
        let pairs = x
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .collect();
        Self::from_pairs(pairs)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    /// One past the largest stored index, or 0 when empty.
    pub fn min_dimension(&self) -> usize {
        self.indices.last().map_or(0, |i| i + 1)
    }

    /// Value at coordinate `i` (0 when not stored).
    pub fn get(&self, i: usize) -> f64 {
        match self.indices.binary_search(&i) {
            Ok(k) => self.values[k],
            Err(_) => 0.0,
        }
    }

    /// Inner product with a dense vector. Indices beyond `x.len()` are ignored.
    pub fn dot(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            if let Some(xi) = x.get(i) {
                s += v * xi;
            }
        }
        s
    }

    /// `y += a * self`
    pub fn add_scaled_to(&self, a: f64, y: &mut [f64]) {
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            if let Some(yi) = y.get_mut(i) {
                *yi += a * v;
            }
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    /// Copy without coordinate `i`.
    pub fn without(&self, i: usize) -> Self {
        let (indices, values) = self
            .indices
            .iter()
            .zip(&self.values)
            .filter(|(j, _)| **j != i)
            .map(|(j, v)| (*j, *v))
            .unzip();
        Self { indices, values }
    }

    pub fn to_dense(&self, dim: usize) -> DenseVector {
        let mut out = DenseVector::zeros(dim);
        self.add_scaled_to(1.0, &mut out);
        out
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

/// `y += a * x`
pub fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> DenseVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn midpoint(a: &[f64], b: &[f64]) -> DenseVector {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

/// Feature rows stored densely when that is cheaper to scan, sparsely otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureRows {
    Dense { dim: usize, values: Vec<f64> },
    Sparse(Vec<SparseVector>),
}

impl FeatureRows {
    /// Dense storage is used once a quarter of the entries are nonzero.
    pub const DENSE_FILL: f64 = 0.25;

    pub fn new(rows: &[SparseVector], dim: usize) -> Self {
        let nnz: usize = rows.iter().map(|a| a.nnz()).sum();
        let cells = rows.len() * dim;
        if cells > 0 && nnz as f64 >= Self::DENSE_FILL * cells as f64 {
            let mut values = vec![0.0; cells];
            for (a, chunk) in rows.iter().zip(values.chunks_exact_mut(dim)) {
                a.add_scaled_to(1.0, chunk);
            }
            FeatureRows::Dense { dim, values }
        } else {
            FeatureRows::Sparse(rows.to_vec())
        }
    }

    pub fn len(&self) -> usize {
        match self {
            FeatureRows::Dense { dim, values } => values.len().checked_div(*dim).unwrap_or(0),
            FeatureRows::Sparse(rows) => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Calls `f(i, aᵢᵀx)` for each row; a nonzero return `w` adds `w·aᵢ` to `y`.
    pub fn scan(&self, x: &[f64], y: &mut [f64], mut f: impl FnMut(usize, f64) -> f64) {
        match self {
            FeatureRows::Dense { dim, values } => {
                for (i, row) in values.chunks_exact(*dim).enumerate() {
                    let w = f(i, dot(row, x));
                    if w != 0.0 {
                        for (yi, ai) in y.iter_mut().zip(row) {
                            *yi += w * ai;
                        }
                    }
                }
            }
            FeatureRows::Sparse(rows) => {
                for (i, a) in rows.iter().enumerate() {
                    let w = f(i, a.dot(x));
                    if w != 0.0 {
                        a.add_scaled_to(w, y);
                    }
                }
            }
        }
    }
}
