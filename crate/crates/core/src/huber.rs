//! Huber-loss subspace embeddings and active regression below `d²` rows.
//!
//! One step keeps every row whose Huber sensitivity may exceed `γ` and
//! samples the rest with probabilities built from ℓp Lewis weights over a
//! grid of `p ∈ [1, 2]`, oversampled by `γ⁻¹`. Repeating the step shrinks
//! the row count `n ↦ n^{β/(1+β)} · (d · polylog)` with `β = 3 − 2√2`.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::lewis::lewis_or_leverage;
use crate::loss::LossDescriptor;
use crate::matrix::DenseMatrix;
use crate::oracle::{Labels, Shifted};
use crate::rng::RngStream;
use crate::sensitivity::{dyadic_levels, m_sensitivities_on, SensConfig};
use crate::solvers::{solve_weighted_mloss, SolveOptions, SolveResult};
use crate::weights::{lp_norm, WeightVector};

/// `3 − 2√2`.
pub fn huber_beta() -> f64 {
    3.0 - 2.0 * 2f64.sqrt()
}

/// `n^{−β/(1+β)}`.
pub fn huber_gamma(n: usize) -> f64 {
    let b = huber_beta();
    (n.max(1) as f64).powf(-b / (1.0 + b))
}

/// `{1, 1+h, 1+2h, …, 2}` with `h = max(1/ln n, 1/(cap−1))`, so the grid has
/// at most `cap` points.
pub fn p_grid(n: usize, cap: usize) -> Vec<f64> {
    let ln = (n.max(3) as f64).ln();
    let h = (1.0 / ln).max(1.0 / (cap.max(2) - 1) as f64);
    let k = (1.0 / h).floor() as usize;
    let mut g: Vec<f64> = (0..=k).map(|j| 1.0 + h * j as f64).collect();
    if 2.0 - g[k] > 1e-12 {
        g.push(2.0);
    }
    g.truncate(cap.max(2));
    g
}

/// The affine recurrence `a_{i+1} = λ a_i + b` in closed form.
pub fn affine_recurrence(a0: f64, lambda: f64, b: f64, i: u32) -> f64 {
    (b - lambda.powi(i as i32) * (b - (1.0 - lambda) * a0)) / (1.0 - lambda)
}

/// Knobs of the Huber embedding and regression.
#[derive(Debug, Clone, PartialEq)]
pub struct HuberConfig {
    /// Knee of the Huber loss.
    pub tau: f64,
    pub eps: f64,
    pub delta: f64,
    /// Per-step oversampling `m = c_m · d · (ln(n‖w‖∞/δ)/ε)^{κ_m}`.
    pub c_m: f64,
    pub kappa_m: f64,
    /// Stopping size `C_h · d^{1+β} · (ln(n/δ)/ε)^{κ_h}`.
    pub c_h: f64,
    pub kappa_h: f64,
    /// Explicit stopping size, overriding the formula.
    pub target: Option<usize>,
    /// Largest number of grid points.
    pub grid_cap: usize,
    /// Extra oversampling of the residual steps in [`huber_active`].
    pub active_multiplier: f64,
    pub sens: SensConfig,
    pub lewis_tol: f64,
    pub lewis_max_iter: usize,
    pub solve: SolveOptions,
}

impl Default for HuberConfig {
    fn default() -> Self {
        Self {
            tau: 1.0,
            eps: 0.25,
            delta: 0.1,
            c_m: 1.0,
            kappa_m: 2.0,
            c_h: 10.0,
            kappa_h: 4.0,
            target: None,
            grid_cap: 24,
            active_multiplier: 4.0,
            sens: SensConfig::default(),
            lewis_tol: 1e-4,
            lewis_max_iter: 200,
            solve: SolveOptions::default(),
        }
    }
}

/// The quantities one step is run with.
#[derive(Debug, Clone, PartialEq)]
pub struct HuberStepConfig {
    pub beta: f64,
    pub gamma: f64,
    pub grid: Vec<f64>,
    pub m: f64,
    pub eps: f64,
    pub delta: f64,
}

impl HuberConfig {
    pub fn loss(&self) -> LossDescriptor {
        LossDescriptor::huber(self.tau).expect("knee must be positive")
    }

    /// Step parameters for `n` rows of dimension `d` with largest weight
    /// `w_max`.
    pub fn step(&self, n: usize, d: usize, w_max: f64) -> HuberStepConfig {
        let l = ((n as f64) * w_max.max(1.0) / self.delta).ln().max(1.0);
        HuberStepConfig {
            beta: huber_beta(),
            gamma: huber_gamma(n),
            grid: p_grid(n, self.grid_cap),
            m: self.c_m * d as f64 * (l / self.eps).powf(self.kappa_m),
            eps: self.eps,
            delta: self.delta,
        }
    }

    pub fn target(&self, n: usize, d: usize) -> usize {
        self.target.unwrap_or_else(|| {
            let l = ((n as f64) / self.delta).ln().max(1.0);
            let t = self.c_h * (d as f64).powf(1.0 + huber_beta()) * (l / self.eps).powf(self.kappa_h);
            t.min(usize::MAX as f64 / 2.0).ceil() as usize
        })
    }

    /// `⌈log₂ log₂ n⌉ + 3`.
    pub fn step_cap(&self, n: usize) -> usize {
        (n.max(4) as f64).log2().log2().ceil() as usize + 3
    }
}

/// Result of one Huber sampling step.
#[derive(Debug, Clone, PartialEq)]
pub struct HuberStep {
    pub weights: WeightVector,
    /// Rows kept at full weight because their sensitivity bound exceeds `γ`.
    pub kept: Vec<usize>,
    /// Expected number of sampled rows.
    pub expected_sampled: f64,
}

/// Samples one weight bucket, appending `(row, weight)` pairs to `out`;
/// returns the expected number of sampled rows.
#[allow(clippy::too_many_arguments)]
fn bucket_step(
    a: &DenseMatrix,
    rows: &[usize],
    w: &WeightVector,
    cfg: &HuberConfig,
    m_scale: f64,
    stream: &RngStream,
    out: &mut Vec<(usize, f64)>,
    kept_out: &mut Vec<usize>,
) -> Result<f64> {
    let nj = rows.len();
    let d = a.ncols();
    let st = cfg.step(nj, d, w.max());
    let m = st.m * m_scale;
    if nj <= d {
        for &i in rows {
            out.push((i, w.get(i)));
            kept_out.push(i);
        }
        return Ok(0.0);
    }
    let gamma = st.gamma;
    let tau = (gamma * nj as f64 / 2.0).clamp(1.0, nj as f64);
    let floor = 2.0 * tau / nj as f64;
    let est = m_sensitivities_on(a, rows, &cfg.loss(), tau, &cfg.sens, &stream.child(0))?;
    let thr = gamma.max(floor) * (1.0 + 1e-12);
    let mut small = Vec::new();
    for (k, &i) in est.rows.iter().enumerate() {
        if est.s[k] > thr {
            out.push((i, w.get(i)));
            kept_out.push(i);
        } else {
            small.push(i);
        }
    }
    if small.is_empty() {
        return Ok(0.0);
    }
    let sub_t = a.select_rows(rows);
    let sub_s = a.select_rows(&small);
    let pos: Vec<usize> = {
        let mut j = 0;
        small
            .iter()
            .map(|&i| {
                while rows[j] != i {
                    j += 1;
                }
                j
            })
            .collect()
    };
    let mut score = vec![1.0 / nj as f64; small.len()];
    let mut warm_t: Option<Vec<f64>> = None;
    let mut warm_s: Option<Vec<f64>> = None;
    for &p in &st.grid {
        let wt = lewis_or_leverage(&sub_t, p, cfg.lewis_tol, cfg.lewis_max_iter, warm_t.as_deref());
        let ws = lewis_or_leverage(&sub_s, p, cfg.lewis_tol, cfg.lewis_max_iter, warm_s.as_deref());
        for k in 0..small.len() {
            score[k] += (wt[pos[k]] + ws[k]) / d as f64;
        }
        warm_t = Some(wt);
        warm_s = Some(ws);
    }
    let mut rng = stream.child(1).rng();
    let mut expected = 0.0;
    for (k, &i) in small.iter().enumerate() {
        let pi = (m / gamma * score[k]).min(1.0);
        expected += pi;
        if pi >= 1.0 || rng.random::<f64>() < pi {
            out.push((i, w.get(i) / pi));
        }
    }
    Ok(expected)
}

fn step_scaled(
    a: &DenseMatrix,
    w: &WeightVector,
    cfg: &HuberConfig,
    m_scale: f64,
    stream: &RngStream,
) -> Result<HuberStep> {
    if w.len() != a.nrows() {
        return Err(crate::error::Error::Dimension {
            expected: a.nrows(),
            found: w.len(),
        });
    }
    for (i, v) in w.iter() {
        if v < 1.0 {
            return Err(crate::error::Error::InvalidWeight {
                index: i,
                value: v,
                reason: "Huber steps need w >= 1 on the support",
            });
        }
    }
    let mut out = Vec::with_capacity(w.nnz());
    let mut kept = Vec::new();
    let mut expected = 0.0;
    for (j, rows) in dyadic_levels(w).iter().enumerate() {
        if rows.is_empty() {
            continue;
        }
        expected += bucket_step(a, rows, w, cfg, m_scale, &stream.child(j as u64), &mut out, &mut kept)?;
    }
    kept.sort_unstable();
    Ok(HuberStep {
        weights: WeightVector::from_pairs(w.len(), out)?,
        kept,
        expected_sampled: expected,
    })
}

/// One sampling step on the weighted rows `w ≥ 1`, bucket by dyadic weight
/// level.
pub fn huber_embed_step(a: &DenseMatrix, w: &WeightVector, cfg: &HuberConfig, stream: &RngStream) -> Result<HuberStep> {
    step_scaled(a, w, cfg, 1.0, stream)
}

/// Result of [`huber_subspace_embedding`].
#[derive(Debug, Clone, PartialEq)]
pub struct HuberEmbedding {
    pub weights: WeightVector,
    /// `nnz` before the first step and after each step.
    pub nnz_history: Vec<usize>,
    pub target: usize,
    pub reached_target: bool,
}

impl HuberEmbedding {
    pub fn steps(&self) -> usize {
        self.nnz_history.len() - 1
    }
}

/// Repeats [`huber_embed_step`] from `w` until `nnz ≤ target` or the step
/// cap is hit.
pub fn huber_embedding_from(
    a: &DenseMatrix,
    w: WeightVector,
    cfg: &HuberConfig,
    stream: &RngStream,
) -> Result<HuberEmbedding> {
    if !(cfg.eps > 0.0 && cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(invalid("eps/delta", cfg.eps, "need eps > 0 and delta in (0, 1)"));
    }
    let n = a.nrows();
    let target = cfg.target(n, a.ncols());
    let cap = cfg.step_cap(n);
    let mut w = w;
    let mut hist = vec![w.nnz()];
    let mut step = 0;
    while w.nnz() > target && step < cap {
        w = huber_embed_step(a, &w, cfg, &stream.child(step as u64))?.weights;
        hist.push(w.nnz());
        step += 1;
    }
    Ok(HuberEmbedding {
        reached_target: w.nnz() <= target,
        weights: w,
        nnz_history: hist,
        target,
    })
}

/// Huber subspace embedding of `A`.
pub fn huber_subspace_embedding(a: &DenseMatrix, cfg: &HuberConfig, stream: &RngStream) -> Result<HuberEmbedding> {
    huber_embedding_from(a, WeightVector::ones(a.nrows()), cfg, stream)
}

/// Outcome of [`huber_active`].
#[derive(Debug, Clone, PartialEq)]
pub struct HuberActiveResult {
    pub solve: SolveResult,
    pub queried: Vec<usize>,
    pub depth: usize,
    /// `nnz` of the weights entering each recursion level.
    pub level_nnz: Vec<usize>,
}

impl HuberActiveResult {
    pub fn queries(&self) -> usize {
        self.queried.len()
    }
}

fn solve_weighted(a: &DenseMatrix, labels: &dyn Labels, w: &WeightVector, cfg: &HuberConfig) -> SolveResult {
    let idx = w.support();
    let sub = a.select_rows(idx);
    let b: Vec<f64> = idx.iter().map(|&i| labels.get(i)).collect();
    solve_weighted_mloss(&sub, &b, Some(w.values()), &cfg.loss(), &cfg.solve)
}

struct Level<'a> {
    a: &'a DenseMatrix,
    cfg: &'a HuberConfig,
    target: usize,
    cap: usize,
    queried: Vec<usize>,
    level_nnz: Vec<usize>,
}

impl Level<'_> {
    fn record(&mut self, w: &WeightVector) {
        self.queried.extend_from_slice(w.support());
    }

    fn run(
        &mut self,
        labels: &dyn Labels,
        w: WeightVector,
        depth: usize,
        stream: &RngStream,
    ) -> Result<(SolveResult, usize)> {
        self.level_nnz.push(w.nnz());
        if w.nnz() <= self.target || depth >= self.cap {
            self.record(&w);
            return Ok((solve_weighted(self.a, labels, &w, self.cfg), depth));
        }
        let emb = huber_embedding_from(self.a, w.clone(), self.cfg, &stream.child(0))?;
        self.record(&emb.weights);
        let xc = solve_weighted(self.a, labels, &emb.weights, self.cfg).x;
        let z = Shifted::new(labels, self.a.matvec(&xc));
        let next = step_scaled(self.a, &w, self.cfg, self.cfg.active_multiplier, &stream.child(1))?.weights;
        let (inner, reached) = self.run(&z, next, depth + 1, &stream.child(2))?;
        let x: Vec<f64> = inner.x.iter().zip(&xc).map(|(u, v)| u + v).collect();
        Ok((SolveResult { x, ..inner }, reached))
    }
}

/// Relative-error Huber regression: embed, solve for `x_c`, then recurse on
/// the residual target with a freshly sampled weight vector.
pub fn huber_active(
    a: &DenseMatrix,
    labels: &dyn Labels,
    cfg: &HuberConfig,
    stream: &RngStream,
) -> Result<HuberActiveResult> {
    let n = a.nrows();
    let mut lv = Level {
        a,
        cfg,
        target: cfg.target(n, a.ncols()),
        cap: cfg.step_cap(n),
        queried: Vec::new(),
        level_nnz: Vec::new(),
    };
    let (solve, depth) = lv.run(labels, WeightVector::ones(n), 0, stream)?;
    let mut queried = lv.queried;
    queried.sort_unstable();
    queried.dedup();
    Ok(HuberActiveResult {
        solve,
        queried,
        depth,
        level_nnz: lv.level_nnz,
    })
}

/// Which side of the two-branch inequality held.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// The restriction to small-loss coordinates is comparable to some ℓp.
    Restricted,
    /// The whole vector is comparable to ℓ₁ or ℓ₂ (ℓq or ℓ₂).
    Whole,
}

/// Ratios `lhs / rhs` of both branches, before the constant `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCheck {
    pub restricted: f64,
    pub whole: f64,
    pub branch: Option<Branch>,
}

impl InequalityCheck {
    pub fn holds(&self) -> bool {
        self.branch.is_some()
    }
}

/// `β_q = [(2/q + 1) − 2√(2/q)] / (2/q − 1)`; equals `3 − 2√2` at `q = 1`.
pub fn l2lq_beta(q: f64) -> f64 {
    let r = 2.0 / q;
    (r + 1.0 - 2.0 * r.sqrt()) / (r - 1.0)
}

#[allow(clippy::too_many_arguments)]
fn check(
    y: &[f64],
    gamma: f64,
    c: f64,
    loss: &LossDescriptor,
    grid: &[f64],
    ends: [f64; 2],
    beta: f64,
    gamma_exp: f64,
) -> InequalityCheck {
    let n = y.len();
    let total: f64 = y.iter().map(|&v| loss.eval(v)).sum();
    if total == 0.0 {
        return InequalityCheck {
            restricted: f64::INFINITY,
            whole: f64::INFINITY,
            branch: Some(Branch::Whole),
        };
    }
    let yt: Vec<f64> = y
        .iter()
        .map(|&v| if loss.eval(v) <= gamma * total { v } else { 0.0 })
        .collect();
    let ht: f64 = yt.iter().map(|&v| loss.eval(v)).sum();
    let min_t = grid
        .iter()
        .map(|&p| lp_norm(&yt, p).powf(p))
        .fold(f64::INFINITY, f64::min);
    let restricted = if min_t == 0.0 {
        f64::INFINITY
    } else {
        ht * (gamma * n as f64).powf(beta) / min_t
    };
    let min_w = ends
        .iter()
        .map(|&p| lp_norm(y, p).powf(p))
        .fold(f64::INFINITY, f64::min);
    let whole = total / (gamma.powf(gamma_exp) * min_w);
    let branch = if restricted >= c {
        Some(Branch::Restricted)
    } else if whole >= c {
        Some(Branch::Whole)
    } else {
        None
    };
    InequalityCheck {
        restricted,
        whole,
        branch,
    }
}

/// The two-branch Huber inequality at knee 1 with the discretized grid of
/// exponents.
pub fn huber_inequality_check(y: &[f64], gamma: f64, c: f64) -> InequalityCheck {
    let loss = LossDescriptor::huber(1.0).expect("valid");
    let grid = p_grid(y.len(), 24);
    check(y, gamma, c, &loss, &grid, [1.0, 2.0], huber_beta(), 1.0)
}

/// The two-branch inequality for the ℓ₂-ℓq loss, `q ∈ (0, 2)`, minimizing
/// over a grid of `p ∈ [q, 2]` with step at most `1/ln n`.
pub fn l2lq_inequality_check(y: &[f64], gamma: f64, q: f64, c: f64) -> InequalityCheck {
    let loss = LossDescriptor::l2lq(q).expect("q must lie in (0, 2)");
    let k = ((2.0 - q) * (y.len().max(3) as f64).ln()).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=k).map(|j| q + (2.0 - q) * j as f64 / k as f64).collect();
    check(y, gamma, c, &loss, &grid, [q, 2.0], l2lq_beta(q), 2.0 / q - 1.0)
}
