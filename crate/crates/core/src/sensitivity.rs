//! Sensitivity upper bounds for M-estimators and sensitivity sampling.
//!
//! [`m_sensitivities`] hashes rows into `10·2^r` buckets for each scale
//! `r = 1..⌈log₂(n/τ)⌉`, repeats each scale `⌈c_rep ln n⌉` times, and computes
//! ℓ_{p_M} Lewis weights inside every bucket. A row whose in-bucket Lewis
//! weight reaches the threshold `θ` is certified to have sensitivity at most
//! `2/2^r` at that scale, and its bound is raised accordingly. Every row
//! starts at the floor `2τ/n` (clamped to 1).

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::lewis::lewis_or_leverage;
use crate::linalg::rank;
use crate::loss::{LossDescriptor, LossKind};
use crate::matrix::DenseMatrix;
use crate::rng::RngStream;
use crate::weights::WeightVector;

/// Knobs of the hashing algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct SensConfig {
    /// Repetitions per scale are `⌈c_rep · ln n⌉`.
    pub c_rep: f64,
    /// In-bucket Lewis weight threshold. `None` uses
    /// `(1/3) · d^{-max(0, p_M/2 − 1)}`.
    pub theta: Option<f64>,
    /// One hash per scale instead of `⌈c_rep ln n⌉`.
    pub single_hash: bool,
    pub lewis_tol: f64,
    pub lewis_max_iter: usize,
}

impl Default for SensConfig {
    fn default() -> Self {
        Self {
            c_rep: 2.0,
            theta: None,
            single_hash: false,
            lewis_tol: 1e-6,
            lewis_max_iter: 100,
        }
    }
}

impl SensConfig {
    pub fn threshold(&self, p_m: f64, d: usize) -> f64 {
        self.theta
            .unwrap_or_else(|| (d as f64).powf(-(p_m / 2.0 - 1.0).max(0.0)) / 3.0)
    }
}

/// Per-row sensitivity upper bounds over a set of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityEstimates {
    /// Rows covered, increasing.
    pub rows: Vec<usize>,
    /// Bound for each covered row, in `(0, 1]`.
    pub s: Vec<f64>,
    pub total: f64,
    /// `(r, repetition)` of the hash that last raised the row, if any.
    pub levels: Vec<Option<(u32, u32)>>,
    pub tau: f64,
}

impl SensitivityEstimates {
    /// Bound for row `i` (0 if not covered).
    pub fn get(&self, i: usize) -> f64 {
        match self.rows.binary_search(&i) {
            Ok(k) => self.s[k],
            Err(_) => 0.0,
        }
    }

    fn finish(mut self) -> Self {
        self.total = self.s.iter().sum();
        self
    }
}

const MERSENNE_61: u64 = (1 << 61) - 1;

/// Universal hash `((a·i + c) mod P) mod B`.
struct RowHash {
    a: u64,
    c: u64,
    buckets: u64,
}

impl RowHash {
    fn new<R: Rng + ?Sized>(rng: &mut R, buckets: usize) -> Self {
        Self {
            a: rng.random_range(1..MERSENNE_61),
            c: rng.random_range(0..MERSENNE_61),
            buckets: buckets as u64,
        }
    }

    fn bucket(&self, i: usize) -> usize {
        let v = (self.a as u128 * i as u128 + self.c as u128) % MERSENNE_61 as u128;
        (v as u64 % self.buckets) as usize
    }
}

/// Sensitivity upper bounds for all rows of `A`.
pub fn m_sensitivities(
    a: &DenseMatrix,
    loss: &LossDescriptor,
    tau: f64,
    cfg: &SensConfig,
    stream: &RngStream,
) -> Result<SensitivityEstimates> {
    let rows: Vec<usize> = (0..a.nrows()).collect();
    m_sensitivities_on(a, &rows, loss, tau, cfg, stream)
}

/// Sensitivity upper bounds for the restriction `A|rows`.
pub fn m_sensitivities_on(
    a: &DenseMatrix,
    rows: &[usize],
    loss: &LossDescriptor,
    tau: f64,
    cfg: &SensConfig,
    stream: &RngStream,
) -> Result<SensitivityEstimates> {
    if !loss.monotone {
        return Err(Error::UnsupportedLoss {
            name: loss.name.clone(),
            missing: "monotone",
        });
    }
    let n = rows.len();
    if n == 0 {
        return Ok(SensitivityEstimates {
            rows: Vec::new(),
            s: Vec::new(),
            total: 0.0,
            levels: Vec::new(),
            tau,
        });
    }
    if !(tau >= 1.0 && tau <= n as f64) {
        return Err(invalid("tau", tau, "must lie in [1, n]"));
    }
    if let LossKind::Sum(l, r) = &loss.kind {
        let sl = m_sensitivities_on(a, rows, l, tau, cfg, &stream.child(1))?;
        let sr = m_sensitivities_on(a, rows, r, tau, cfg, &stream.child(2))?;
        let s: Vec<f64> =
            sl.s.iter()
                .zip(&sr.s)
                .map(|(x, y)| (2.0 * x.max(*y)).min(1.0))
                .collect();
        let levels = sl.levels.iter().zip(&sr.levels).map(|(x, y)| x.or(*y)).collect();
        return Ok(SensitivityEstimates {
            rows: sl.rows,
            s,
            total: 0.0,
            levels,
            tau,
        }
        .finish());
    }

    let mut sorted = rows.to_vec();
    sorted.sort_unstable();
    let d = a.ncols();
    let nf = n as f64;
    let floor = (2.0 * tau / nf).min(1.0);
    let mut s = vec![floor; n];
    let mut levels = vec![None; n];
    let theta = cfg.threshold(loss.p_m, d);
    let r_max = (nf / tau).log2().ceil().max(0.0) as u32;
    let reps = if cfg.single_hash {
        1
    } else {
        ((cfg.c_rep * nf.ln()).ceil() as u32).max(1)
    };
    let mut rng = stream.rng();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for r in 1..=r_max {
        let buckets = 10usize << r;
        let value = (2.0 / (1u64 << r) as f64).min(1.0);
        for rep in 0..reps {
            let h = RowHash::new(&mut rng, buckets);
            members.iter_mut().for_each(Vec::clear);
            members.resize_with(buckets, Vec::new);
            for (k, &i) in sorted.iter().enumerate() {
                members[h.bucket(i)].push(k);
            }
            for bucket in members.iter().filter(|b| !b.is_empty()) {
                if bucket.iter().all(|&k| s[k] >= value) {
                    continue;
                }
                let idx: Vec<usize> = bucket.iter().map(|&k| sorted[k]).collect();
                let sub = a.select_rows(&idx);
                let w = if idx.len() <= d && rank(&sub) == idx.len() {
                    vec![1.0; idx.len()]
                } else if loss.p_m == 2.0 {
                    crate::lewis::leverage_scores(&sub)
                } else {
                    lewis_or_leverage(&sub, loss.p_m, cfg.lewis_tol, cfg.lewis_max_iter, None)
                };
                for (&k, wk) in bucket.iter().zip(w) {
                    if wk >= theta && value > s[k] {
                        s[k] = value;
                        levels[k] = Some((r, rep));
                    }
                }
            }
        }
    }
    Ok(SensitivityEstimates {
        rows: sorted,
        s,
        total: 0.0,
        levels,
        tau,
    }
    .finish())
}

/// Sensitivity bounds under weights `w ≥ 1`: rows are grouped into dyadic
/// level sets `w ∈ [2^{j−1}, 2^j)`, each set is handled separately, and the
/// bounds are doubled (then clamped to 1).
pub fn weighted_m_sensitivities(
    a: &DenseMatrix,
    loss: &LossDescriptor,
    w: &WeightVector,
    tau: f64,
    cfg: &SensConfig,
    stream: &RngStream,
) -> Result<SensitivityEstimates> {
    if w.len() != a.nrows() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            found: w.len(),
        });
    }
    for (i, v) in w.iter() {
        if v < 1.0 {
            return Err(Error::InvalidWeight {
                index: i,
                value: v,
                reason: "weighted sensitivities need w >= 1 on the support",
            });
        }
    }
    let levels = dyadic_levels(w);
    let mut pairs: Vec<(usize, f64, Option<(u32, u32)>)> = Vec::with_capacity(w.nnz());
    for (j, set) in levels.iter().enumerate() {
        if set.is_empty() {
            continue;
        }
        let t = tau.clamp(1.0, set.len() as f64);
        let est = m_sensitivities_on(a, set, loss, t, cfg, &stream.child(j as u64))?;
        for k in 0..est.rows.len() {
            pairs.push((est.rows[k], (2.0 * est.s[k]).min(1.0), est.levels[k]));
        }
    }
    pairs.sort_unstable_by_key(|p| p.0);
    Ok(SensitivityEstimates {
        rows: pairs.iter().map(|p| p.0).collect(),
        s: pairs.iter().map(|p| p.1).collect(),
        total: 0.0,
        levels: pairs.iter().map(|p| p.2).collect(),
        tau,
    }
    .finish())
}

/// Rows of `w` grouped by `⌊log₂ wᵢ⌋` (index `j−1` holds `[2^{j−1}, 2^j)`).
pub fn dyadic_levels(w: &WeightVector) -> Vec<Vec<usize>> {
    let mut levels: Vec<Vec<usize>> = Vec::new();
    for (i, v) in w.iter() {
        let j = v.log2().floor().max(0.0) as usize;
        if levels.len() <= j {
            levels.resize_with(j + 1, Vec::new);
        }
        levels[j].push(i);
    }
    levels
}

/// Keeps row `i` with probability `pᵢ = min{1, m s̃ᵢ}` and reweights it by
/// `1/pᵢ`. Rows without an estimate are dropped.
pub fn sensitivity_sample(w: &WeightVector, est: &SensitivityEstimates, m: f64, stream: &RngStream) -> WeightVector {
    let mut rng = stream.rng();
    let mut out = Vec::new();
    for (i, wi) in w.iter() {
        let s = est.get(i);
        let p = (m * s).min(1.0);
        if p > 0.0 && (p >= 1.0 || rng.random::<f64>() < p) {
            out.push((i, wi / p));
        }
    }
    WeightVector::from_pairs(w.len(), out).expect("sampled weights are positive")
}

/// Oversampling factor that makes the expected sample size about `rows`.
pub fn oversampling_for(est: &SensitivityEstimates, rows: f64) -> f64 {
    if est.total > 0.0 {
        rows / est.total
    } else {
        0.0
    }
}
