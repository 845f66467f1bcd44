//! Sparse nonnegative row weights and the weighted M-norm.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::loss::LossDescriptor;

/// Sparse per-row weights over `0..n`. Stored weights are strictly positive
/// and finite, indices strictly increasing; absent rows have weight zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    n: usize,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl WeightVector {
    /// All-ones weights.
    pub fn ones(n: usize) -> Self {
        Self {
            n,
            idx: (0..n).collect(),
            val: vec![1.0; n],
        }
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            idx: Vec::new(),
            val: Vec::new(),
        }
    }

    /// Builds weights from `(index, weight)` pairs. Repeated indices are summed;
    /// zero weights are dropped.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut pairs: Vec<(usize, f64)> = pairs.into_iter().collect();
        for &(i, w) in &pairs {
            if i >= n {
                return Err(Error::Dimension {
                    expected: n,
                    found: i + 1,
                });
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidWeight {
                    index: i,
                    value: w,
                    reason: "weights must be finite and nonnegative",
                });
            }
        }
        pairs.sort_unstable_by_key(|p| p.0);
        let mut idx = Vec::with_capacity(pairs.len());
        let mut val: Vec<f64> = Vec::with_capacity(pairs.len());
        for (i, w) in pairs {
            if idx.last() == Some(&i) {
                *val.last_mut().unwrap() += w;
            } else {
                idx.push(i);
                val.push(w);
            }
        }
        let (idx, val) = idx.into_iter().zip(val).filter(|p| p.1 > 0.0).unzip();
        Ok(Self { n, idx, val })
    }

    /// Dense weights; zeros are dropped.
    pub fn from_dense(w: &[f64]) -> Result<Self> {
        Self::from_pairs(w.len(), w.iter().copied().enumerate())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.idx.len()
    }

    pub fn support(&self) -> &[usize] {
        &self.idx
    }

    pub fn values(&self) -> &[f64] {
        &self.val
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.idx.iter().copied().zip(self.val.iter().copied())
    }

    pub fn get(&self, i: usize) -> f64 {
        match self.idx.binary_search(&i) {
            Ok(k) => self.val[k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, w) in self.iter() {
            out[i] = w;
        }
        out
    }

    pub fn max(&self) -> f64 {
        self.val.iter().copied().fold(0.0, f64::max)
    }

    pub fn total(&self) -> f64 {
        self.val.iter().sum()
    }
}

/// `(Σ wᵢ M(|yᵢ|))^{1/p_M}`.
pub fn mnorm(y: &[f64], m: &LossDescriptor, w: &WeightVector) -> Result<f64> {
    if y.len() != w.len() {
        return Err(Error::Dimension {
            expected: w.len(),
            found: y.len(),
        });
    }
    if let Some(pos) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: pos, col: 0 });
    }
    Ok(mloss_sparse(y, m, w).powf(1.0 / m.p_m))
}

/// `Σ wᵢ M(|yᵢ|)` over the support of `w`.
pub fn mloss_sparse(y: &[f64], m: &LossDescriptor, w: &WeightVector) -> f64 {
    w.iter().map(|(i, wi)| wi * m.eval(y[i])).sum()
}

/// `Σ wᵢ M(|yᵢ|)` with dense weights (`None` means all ones).
pub fn mloss(y: &[f64], m: &LossDescriptor, w: Option<&[f64]>) -> f64 {
    match w {
        Some(w) => y
            .iter()
            .zip(w)
            .map(|(v, wi)| if *wi > 0.0 { wi * m.eval(*v) } else { 0.0 })
            .sum(),
        None => y.iter().map(|v| m.eval(*v)).sum(),
    }
}

/// Dense version of [`mnorm`] without validation.
pub fn mnorm_dense(y: &[f64], m: &LossDescriptor, w: Option<&[f64]>) -> f64 {
    mloss(y, m, w).powf(1.0 / m.p_m)
}

/// Plain `‖y‖_p`.
pub fn lp_norm(y: &[f64], p: f64) -> f64 {
    y.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}
