//! Orlicz norms `‖y‖_{G,w} = inf{t > 0 : Σ wᵢ G(|yᵢ|/t) ≤ 1}` and two-stage
//! sensitivity-sampling embeddings for them.

#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::loss::LossDescriptor;
use crate::matrix::DenseMatrix;
use crate::rng::RngStream;
use crate::sensitivity::{m_sensitivities, oversampling_for, sensitivity_sample, weighted_m_sensitivities, SensConfig};
use crate::weights::WeightVector;

/// Relative bracket width at which [`orlicz_norm`] stops.
pub const ORLICZ_TOL: f64 = 1e-12;

/// Rejects gauges that are not strictly increasing from `G(0) = 0` on a
/// geometric probe grid.
pub fn check_gauge(g: &LossDescriptor) -> Result<()> {
    let unsupported = |missing| Error::UnsupportedLoss {
        name: g.name.clone(),
        missing,
    };
    if g.eval(0.0) != 0.0 {
        return Err(unsupported("G(0) = 0"));
    }
    let mut prev = 0.0;
    for k in -40..=40 {
        let v = g.eval(2f64.powi(k));
        if !(v > prev) || !v.is_finite() {
            return Err(unsupported("strictly increasing"));
        }
        prev = v;
    }
    Ok(())
}

/// `x` with `G(x) = level`, by doubling then bisection.
fn inverse(g: &LossDescriptor, level: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    while g.eval(hi) < level {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > ORLICZ_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if g.eval(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// [`orlicz_norm_tol`] at the default tolerance.
pub fn orlicz_norm(y: &[f64], g: &LossDescriptor, w: &WeightVector) -> Result<f64> {
    orlicz_norm_tol(y, g, w, ORLICZ_TOL)
}

/// Orlicz norm by bisection on `t`, stopping once the bracket is narrower
/// than `rel_tol · t`.
pub fn orlicz_norm_tol(y: &[f64], g: &LossDescriptor, w: &WeightVector, rel_tol: f64) -> Result<f64> {
    if y.len() != w.len() {
        return Err(Error::Dimension {
            expected: w.len(),
            found: y.len(),
        });
    }
    if !(rel_tol > 0.0) {
        return Err(invalid("rel_tol", rel_tol, "must be positive"));
    }
    check_gauge(g)?;
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 0 });
    }
    let lead = w
        .iter()
        .filter(|&(i, _)| y[i] != 0.0)
        .max_by(|a, b| y[a.0].abs().total_cmp(&y[b.0].abs()));
    let Some((k, wk)) = lead else {
        return Ok(0.0);
    };
    let f = |t: f64| -> f64 { w.iter().map(|(i, wi)| wi * g.eval(y[i].abs() / t)).sum() };
    // the largest entry alone already reaches the unit level at `lo`
    let mut lo = y[k].abs() / inverse(g, 1.0 / wk);
    while f(lo) < 1.0 {
        lo *= 0.5;
    }
    // G(x/s) ≤ G(x)/s for s ≥ 1 when G is convex
    let mut hi = lo * f(lo).max(1.0);
    while f(hi) > 1.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Knobs of [`orlicz_subspace_embedding`].
#[derive(Debug, Clone, PartialEq)]
pub struct OrliczConfig {
    pub sens: SensConfig,
    /// Stage-1 sensitivity floor; `None` means `min(d³, n/2)`.
    pub tau1: Option<f64>,
    /// Expected rows `c_rows · d^{max(1,p_G/2)} · ln n · ln(1/ε) / ε²`.
    pub c_rows: f64,
    /// First-stage rows as a multiple of the final rows.
    pub stage1_factor: f64,
}

impl Default for OrliczConfig {
    fn default() -> Self {
        Self {
            sens: SensConfig::default(),
            tau1: None,
            c_rows: 1.0,
            stage1_factor: 2.0,
        }
    }
}

impl OrliczConfig {
    pub fn rows(&self, n: usize, d: usize, eps: f64, g: &LossDescriptor) -> f64 {
        self.c_rows * (d as f64).powf((g.p_m / 2.0).max(1.0)) * (n as f64).ln().max(1.0) * (1.0 / eps).ln().max(1.0)
            / (eps * eps)
    }
}

/// Weights of an Orlicz embedding together with per-stage diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct OrliczEmbedding {
    pub weights: WeightVector,
    /// `nnz` after each stage.
    pub stage_nnz: [usize; 2],
    /// `Σ s̃` of each stage.
    pub sens_totals: [f64; 2],
}

/// Weights `w′` with `‖Ax‖_{G,w′} ≈ ‖Ax‖_G`: sensitivity sampling at
/// `τ = τ₁`, then weighted sensitivities at `τ = d` on the first sample.
pub fn orlicz_subspace_embedding(
    a: &DenseMatrix,
    g: &LossDescriptor,
    eps: f64,
    cfg: &OrliczConfig,
    stream: &RngStream,
) -> Result<OrliczEmbedding> {
    check_gauge(g)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("eps", eps, "must lie in (0, 1)"));
    }
    let (n, d) = (a.nrows() as f64, a.ncols() as f64);
    let rows = cfg.rows(a.nrows(), a.ncols(), eps, g);
    let tau1 = cfg.tau1.unwrap_or((d * d * d).min(n / 2.0)).clamp(1.0, n);
    let est1 = m_sensitivities(a, g, tau1, &cfg.sens, &stream.child(0))?;
    let m1 = oversampling_for(&est1, rows * cfg.stage1_factor);
    let w = sensitivity_sample(&WeightVector::ones(a.nrows()), &est1, m1, &stream.child(1));
    let tau2 = d.clamp(1.0, w.nnz().max(1) as f64);
    let est2 = weighted_m_sensitivities(a, g, &w, tau2, &cfg.sens, &stream.child(2))?;
    let m2 = oversampling_for(&est2, rows);
    let w2 = sensitivity_sample(&w, &est2, m2, &stream.child(3));
    Ok(OrliczEmbedding {
        stage_nnz: [w.nnz(), w2.nnz()],
        sens_totals: [est1.total, est2.total],
        weights: w2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::lp_norm;
    use alloc::vec::Vec;
    use rand::Rng;

    #[test]
    fn power_gauge_is_lp_norm() {
        let y = [3.0, -4.0];
        let two = LossDescriptor::lp(2.0).unwrap();
        assert!((orlicz_norm(&y, &two, &WeightVector::ones(2)).unwrap() - 5.0).abs() < 1e-10);
        let mut rng = RngStream::new(1).rng();
        for p in [1.0, 1.5, 3.0] {
            let g = LossDescriptor::lp(p).unwrap();
            let y: Vec<f64> = (0..50).map(|_| rng.random::<f64>() * 10.0 - 5.0).collect();
            let v = orlicz_norm(&y, &g, &WeightVector::ones(50)).unwrap();
            assert!((v / lp_norm(&y, p) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_vector_and_bad_input() {
        let g = LossDescriptor::huber(1.0).unwrap();
        assert_eq!(orlicz_norm(&[0.0; 4], &g, &WeightVector::ones(4)).unwrap(), 0.0);
        assert!(orlicz_norm(&[1.0, f64::NAN], &g, &WeightVector::ones(2)).is_err());
        let flat = LossDescriptor::tukey_lp(1.0, 2.0).unwrap();
        assert!(orlicz_norm(&[1.0, 2.0], &flat, &WeightVector::ones(2)).is_err());
    }

    #[test]
    fn weights_enter_the_level_sum() {
        let g = LossDescriptor::lp(2.0).unwrap();
        let w = WeightVector::from_dense(&[4.0, 0.0]).unwrap();
        let v = orlicz_norm(&[3.0, 100.0], &g, &w).unwrap();
        assert!((v - 6.0).abs() < 1e-10);
    }

    #[test]
    fn embedding_keeps_fewer_rows_on_tall_input() {
        let mut rng = RngStream::new(4).rng();
        let a = DenseMatrix::from_fn(6000, 2, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let g = LossDescriptor::huber(1.0).unwrap();
        let e = orlicz_subspace_embedding(&a, &g, 0.5, &OrliczConfig::default(), &RngStream::new(5)).unwrap();
        assert!(e.weights.nnz() < 6000);
        assert!(e.weights.iter().all(|(_, v)| v >= 1.0));
    }
}
