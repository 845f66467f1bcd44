//! Active regression for general M-estimators by two-stage sensitivity
//! sampling: a constant-factor solution first, then a second sample fitted to
//! the residual target.

use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::loss::LossDescriptor;
use crate::matrix::DenseMatrix;
use crate::oracle::{Labels, Shifted};
use crate::rng::RngStream;
use crate::sensitivity::{
    m_sensitivities, oversampling_for, sensitivity_sample, weighted_m_sensitivities, SensConfig, SensitivityEstimates,
};
use crate::solvers::{solve_weighted_mloss, SolveOptions, SolveResult};
use crate::weights::WeightVector;

/// Sample sizes and knobs of the M-estimator pipelines. Sizes are expected
/// row counts; the oversampling factor is derived from the estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct MActiveConfig {
    pub sens: SensConfig,
    pub solve: SolveOptions,
    /// Stage-1 sensitivity floor; `None` means `min(d³, n/2)`.
    pub tau1: Option<f64>,
    /// Constant-factor sample: `c_cf · d^{max(1,p_M/2)} · ln n` rows.
    pub c_cf: f64,
    /// Relative-error sample: `c_rel · d · ln(1/ε) · ln(1/δ) / ε^{e}` rows.
    pub c_rel: f64,
    /// The exponent `e` above; `None` means `2 + p_M`.
    pub eps_exponent: Option<f64>,
    /// First-stage rows as a multiple of the second-stage rows.
    pub stage1_factor: f64,
}

impl Default for MActiveConfig {
    fn default() -> Self {
        Self {
            sens: SensConfig::default(),
            solve: SolveOptions::default(),
            tau1: None,
            c_cf: 4.0,
            c_rel: 1.0,
            eps_exponent: None,
            stage1_factor: 2.0,
        }
    }
}

impl MActiveConfig {
    pub fn cf_rows(&self, n: usize, d: usize, loss: &LossDescriptor) -> f64 {
        self.c_cf * (d as f64).powf((loss.p_m / 2.0).max(1.0)) * (n as f64).ln().max(1.0)
    }

    pub fn rel_rows(&self, d: usize, eps: f64, delta: f64, loss: &LossDescriptor) -> f64 {
        let e = self.eps_exponent.unwrap_or(2.0 + loss.p_m);
        self.c_rel * d as f64 * (1.0 / eps).ln().max(1.0) * (1.0 / delta).ln().max(1.0) / eps.powf(e)
    }
}

/// Outcome of an M-estimator pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct MActiveResult {
    pub solve: SolveResult,
    /// Sorted distinct indices of `b` that were read.
    pub queried: Vec<usize>,
    /// The constant-factor solution the relative stage started from.
    pub x_c: Option<Vec<f64>>,
    /// `nnz` after each sampling stage, in order.
    pub stage_nnz: Vec<usize>,
    /// `Σ s̃` of each sensitivity computation, in order.
    pub sens_totals: Vec<f64>,
}

impl MActiveResult {
    pub fn queries(&self) -> usize {
        self.queried.len()
    }
}

/// Rejects losses the sampling guarantees do not cover.
pub fn check_admissible(loss: &LossDescriptor) -> Result<()> {
    let missing = if !loss.monotone {
        Some("monotone")
    } else if !loss.bounded && !loss.root_subadditive {
        Some("subadditive root")
    } else if !loss.bounded && loss.q_m.is_none() {
        Some("lower growth bound")
    } else {
        None
    };
    match missing {
        Some(m) => Err(Error::UnsupportedLoss {
            name: loss.name.clone(),
            missing: m,
        }),
        None => Ok(()),
    }
}

struct TwoStage {
    weights: WeightVector,
    nnz: [usize; 2],
    totals: [f64; 1],
}

/// `w` from stage-1 estimates, then `w′` from weighted sensitivities with
/// `τ = d`.
fn two_stage(
    a: &DenseMatrix,
    loss: &LossDescriptor,
    est1: &SensitivityEstimates,
    rows: f64,
    cfg: &MActiveConfig,
    stream: &RngStream,
) -> Result<TwoStage> {
    let n = a.nrows();
    let m1 = oversampling_for(est1, rows * cfg.stage1_factor);
    let w = sensitivity_sample(&WeightVector::ones(n), est1, m1, &stream.child(0));
    let tau = (a.ncols() as f64).clamp(1.0, w.nnz().max(1) as f64);
    let est2 = weighted_m_sensitivities(a, loss, &w, tau, &cfg.sens, &stream.child(1))?;
    let m2 = oversampling_for(&est2, rows);
    let w2 = sensitivity_sample(&w, &est2, m2, &stream.child(2));
    Ok(TwoStage {
        nnz: [w.nnz(), w2.nnz()],
        totals: [est2.total],
        weights: w2,
    })
}

fn solve_on(
    a: &DenseMatrix,
    labels: &dyn Labels,
    loss: &LossDescriptor,
    w: &WeightVector,
    opts: &SolveOptions,
) -> SolveResult {
    let idx = w.support();
    let sub = a.select_rows(idx);
    let b: Vec<f64> = idx.iter().map(|&i| labels.get(i)).collect();
    solve_weighted_mloss(&sub, &b, Some(w.values()), loss, opts)
}

fn stage1(
    a: &DenseMatrix,
    loss: &LossDescriptor,
    cfg: &MActiveConfig,
    stream: &RngStream,
) -> Result<SensitivityEstimates> {
    let n = a.nrows() as f64;
    let d = a.ncols() as f64;
    let tau = cfg.tau1.unwrap_or((d * d * d).min(n / 2.0)).clamp(1.0, n);
    m_sensitivities(a, loss, tau, &cfg.sens, stream)
}

fn constant_factor_with(
    a: &DenseMatrix,
    labels: &dyn Labels,
    loss: &LossDescriptor,
    est1: &SensitivityEstimates,
    cfg: &MActiveConfig,
    stream: &RngStream,
) -> Result<MActiveResult> {
    let rows = cfg.cf_rows(a.nrows(), a.ncols(), loss);
    let ts = two_stage(a, loss, est1, rows, cfg, stream)?;
    let solve = solve_on(a, labels, loss, &ts.weights, &cfg.solve);
    Ok(MActiveResult {
        solve,
        queried: ts.weights.support().to_vec(),
        x_c: None,
        stage_nnz: ts.nnz.to_vec(),
        sens_totals: [est1.total, ts.totals[0]].to_vec(),
    })
}

/// Constant-factor solution from two rounds of sensitivity sampling; `b`
/// is read only on the final sample.
pub fn m_constant_factor_active(
    a: &DenseMatrix,
    labels: &dyn Labels,
    loss: &LossDescriptor,
    cfg: &MActiveConfig,
    stream: &RngStream,
) -> Result<MActiveResult> {
    check_admissible(loss)?;
    let est1 = stage1(a, loss, cfg, &stream.child(0))?;
    constant_factor_with(a, labels, loss, &est1, cfg, &stream.child(1))
}

/// Relative-error solution `x_c + x̄`, where `x̄` fits the residual target
/// `b − A x_c` on a second, larger sensitivity sample. Entries read for
/// `x_c` are not charged again.
pub fn m_relative_active(
    a: &DenseMatrix,
    labels: &dyn Labels,
    loss: &LossDescriptor,
    eps: f64,
    delta: f64,
    cfg: &MActiveConfig,
    stream: &RngStream,
) -> Result<MActiveResult> {
    check_admissible(loss)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid("eps", eps, "must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", delta, "must lie in (0, 1)"));
    }
    let est1 = stage1(a, loss, cfg, &stream.child(0))?;
    let cf = constant_factor_with(a, labels, loss, &est1, cfg, &stream.child(1))?;
    if eps >= 1.0 {
        return Ok(cf);
    }
    let xc = cf.solve.x.clone();
    let residual = Shifted::new(labels, a.matvec(&xc));
    let rows = cfg.rel_rows(a.ncols(), eps, delta, loss);
    let ts = two_stage(a, loss, &est1, rows, cfg, &stream.child(2))?;
    let bar = solve_on(a, &residual, loss, &ts.weights, &cfg.solve);
    let x: Vec<f64> = xc.iter().zip(&bar.x).map(|(u, v)| u + v).collect();
    let mut queried = cf.queried;
    queried.extend_from_slice(ts.weights.support());
    queried.sort_unstable();
    queried.dedup();
    let mut stage_nnz = cf.stage_nnz;
    stage_nnz.extend_from_slice(&ts.nnz);
    let mut sens_totals = cf.sens_totals;
    sens_totals.push(ts.totals[0]);
    Ok(MActiveResult {
        solve: SolveResult { x, ..bar },
        queried,
        x_c: Some(xc),
        stage_nnz,
        sens_totals,
    })
}

/// Relative-error regression under the ℓp Tukey loss with threshold `τ`.
#[allow(clippy::too_many_arguments)]
pub fn tukey_relative_active(
    a: &DenseMatrix,
    labels: &dyn Labels,
    tau: f64,
    p: f64,
    eps: f64,
    delta: f64,
    cfg: &MActiveConfig,
    stream: &RngStream,
) -> Result<MActiveResult> {
    let loss = LossDescriptor::tukey_lp(tau, p)?;
    m_relative_active(a, labels, &loss, eps, delta, cfg, stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::TargetOracle;
    use rand::Rng;

    fn instance(n: usize, d: usize, seed: u64) -> (DenseMatrix, Vec<f64>) {
        let mut rng = RngStream::new(seed).rng();
        let a = DenseMatrix::from_fn(n, d, |_, _| rng.random::<f64>() * 2.0 - 1.0);
        let b = (0..n)
            .map(|i| a.row(i).iter().sum::<f64>() + rng.random::<f64>() - 0.5)
            .collect();
        (a, b)
    }

    #[test]
    fn zero_target_gives_zero() {
        let (a, _) = instance(800, 3, 1);
        let b = alloc::vec![0.0; 800];
        let o = TargetOracle::from_slice(&b);
        let loss = LossDescriptor::huber(1.0).unwrap();
        let out = m_constant_factor_active(&a, &o, &loss, &MActiveConfig::default(), &RngStream::new(2)).unwrap();
        assert!(out.solve.x.iter().all(|v| v.abs() < 1e-9));
        assert_eq!(out.solve.objective, 0.0);
        assert_eq!(o.count(), out.queries());
    }

    #[test]
    fn rejects_inadmissible_loss() {
        let (a, b) = instance(100, 2, 1);
        let o = TargetOracle::from_slice(&b);
        let loss = LossDescriptor::gamma_p(1.0, 3.0).unwrap();
        assert!(m_constant_factor_active(&a, &o, &loss, &MActiveConfig::default(), &RngStream::new(2)).is_err());
    }

    #[test]
    fn huge_eps_is_constant_factor_path() {
        let (a, b) = instance(600, 2, 4);
        let loss = LossDescriptor::huber(1.0).unwrap();
        let cfg = MActiveConfig::default();
        let s = RngStream::new(5);
        let o1 = TargetOracle::from_slice(&b);
        let r = m_relative_active(&a, &o1, &loss, 2.0, 0.1, &cfg, &s).unwrap();
        assert!(r.x_c.is_none());
        assert_eq!(r.stage_nnz.len(), 2);
    }

    #[test]
    fn query_set_ignores_b_values() {
        let (a, b1) = instance(1500, 3, 6);
        let b2: Vec<f64> = b1.iter().map(|v| -3.0 * v + 100.0).collect();
        let loss = LossDescriptor::huber(1.0).unwrap();
        let cfg = MActiveConfig {
            c_rel: 0.02,
            ..MActiveConfig::default()
        };
        let s = RngStream::new(7);
        let r1 = m_relative_active(&a, &TargetOracle::from_slice(&b1), &loss, 0.5, 0.1, &cfg, &s).unwrap();
        let r2 = m_relative_active(&a, &TargetOracle::from_slice(&b2), &loss, 0.5, 0.1, &cfg, &s).unwrap();
        assert_eq!(r1.queried, r2.queried);
        assert!(r1.queries() < 1500);
    }
}
