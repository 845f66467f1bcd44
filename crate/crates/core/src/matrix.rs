//! Row-major dense matrices.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A row-major `n × d` matrix of finite `f64` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major data, rejecting empty shapes and
    /// non-finite entries.
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("matrix has no rows"));
        }
        if d == 0 {
            return Err(Error::Empty("matrix has no columns"));
        }
        if data.len() != n * d {
            return Err(Error::Dimension {
                expected: n * d,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / d,
                col: pos % d,
            });
        }
        Ok(Self { n, d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * d);
        for r in rows {
            if r.len() != d {
                return Err(Error::Dimension {
                    expected: d,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(n, d, data)
    }

    /// Builds a matrix entry by entry. Panics if an entry is not finite.
    pub fn from_fn(n: usize, d: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * d);
        for i in 0..n {
            for j in 0..d {
                data.push(f(i, j));
            }
        }
        Self::new(n, d, data).expect("from_fn produced an invalid matrix")
    }

    /// Internal constructor that allows zero rows (sub-problems may be empty).
    pub(crate) fn from_raw(n: usize, d: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * d);
        Self { n, d, data }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_fn(d, d, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d.max(1)).take(self.n)
    }

    #[inline]
    pub fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        dot(self.row(i), x)
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.d, "matvec: dimension mismatch");
        self.rows().map(|r| dot(r, x)).collect()
    }

    /// `Aᵀ y`.
    pub fn t_matvec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.n, "t_matvec: dimension mismatch");
        let mut out = vec![0.0; self.d];
        for (r, &yi) in self.rows().zip(y) {
            if yi != 0.0 {
                axpy(yi, r, &mut out);
            }
        }
        out
    }

    /// Rows at `idx`, in order (repeats allowed).
    pub fn select_rows(&self, idx: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.d);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self::from_raw(idx.len(), self.d, data)
    }

    /// Rows at `idx`, row `k` multiplied by `scale[k]`.
    pub fn select_scaled(&self, idx: &[usize], scale: &[f64]) -> DenseMatrix {
        assert_eq!(idx.len(), scale.len());
        let mut data = Vec::with_capacity(idx.len() * self.d);
        for (&i, &s) in idx.iter().zip(scale) {
            data.extend(self.row(i).iter().map(|v| v * s));
        }
        Self::from_raw(idx.len(), self.d, data)
    }

    /// Each row multiplied by the matching entry of `scale`.
    pub fn scale_rows(&self, scale: &[f64]) -> DenseMatrix {
        assert_eq!(scale.len(), self.n);
        let mut data = self.data.clone();
        for (chunk, &s) in data.chunks_exact_mut(self.d).zip(scale) {
            chunk.iter_mut().for_each(|v| *v *= s);
        }
        Self::from_raw(self.n, self.d, data)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &DenseMatrix) -> DenseMatrix {
        let (n1, d1, n2, d2) = (self.n, self.d, other.n, other.d);
        let mut data = Vec::with_capacity(n1 * n2 * d1 * d2);
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for j1 in 0..d1 {
                    let a = self.get(i1, j1);
                    data.extend(other.row(i2).iter().map(|b| a * b));
                }
            }
        }
        Self::from_raw(n1 * n2, d1 * d2, data)
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.d != other.d {
            return Err(Error::Dimension {
                expected: self.d,
                found: other.d,
            });
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self::from_raw(self.n + other.n, self.d, data))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| if v.abs() > m { v.abs() } else { m })
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
