//! Leverage scores, ℓp Lewis weights, row splitting and Lewis-weight samplers.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::linalg::{leverage_scores_raw, PivotedQr};
use crate::matrix::DenseMatrix;
use crate::oracle::Labels;
use crate::rng::RngStream;
use crate::weights::WeightVector;

/// Statistical leverage scores `aᵢᵀ (AᵀA)⁺ aᵢ`.
pub fn leverage_scores(a: &DenseMatrix) -> Vec<f64> {
    PivotedQr::from_matrix(a).leverage_scores()
}

/// Result of the Lewis weight fixed-point iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct LewisWeights {
    pub p: f64,
    pub w: Vec<f64>,
    pub sum_w: f64,
    /// `maxᵢ |wᵢ − uᵢ| / wᵢ` where `u` is the fixed-point map applied to `w`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub rank: usize,
}

const W_FLOOR: f64 = 1e-280;

/// One application of the fixed-point map; returns the update and the rank.
fn lewis_update(a: &DenseMatrix, p: f64, w: &[f64], live: &[usize]) -> (Vec<f64>, usize) {
    let d = a.ncols();
    let expo = 0.5 - 1.0 / p;
    let mut data = Vec::with_capacity(live.len() * d);
    for &i in live {
        let s = if expo == 0.0 { 1.0 } else { w[i].powf(expo) };
        data.extend(a.row(i).iter().map(|v| v * s));
    }
    let (lev, rank) = leverage_scores_raw(live.len(), d, &data);
    let mut u = vec![0.0; a.nrows()];
    for (k, &i) in live.iter().enumerate() {
        // lev = w^{1−2/p} · aᵢᵀ M⁺ aᵢ
        let quad = if expo == 0.0 {
            lev[k]
        } else {
            lev[k] / w[i].powf(2.0 * expo)
        };
        u[i] = quad.max(0.0).powf(p / 2.0).max(W_FLOOR);
    }
    (u, rank)
}

/// ℓp Lewis weights by fixed-point iteration from `wᵢ = d/n`.
///
/// For `p < 4` the map is iterated directly. For `p ≥ 4` each step is damped
/// geometrically, `w ← w^{1−η} u^η` with `η = min(1, 2/p)`. All-zero rows get
/// weight zero and do not enter the residual.
pub fn lewis_weights(a: &DenseMatrix, p: f64, tol: f64, max_iter: usize) -> Result<LewisWeights> {
    lewis_weights_from(a, p, tol, max_iter, None)
}

/// [`lewis_weights`] with an optional warm start.
pub fn lewis_weights_from(
    a: &DenseMatrix,
    p: f64,
    tol: f64,
    max_iter: usize,
    init: Option<&[f64]>,
) -> Result<LewisWeights> {
    if !(p.is_finite() && p > 0.0) {
        return Err(invalid("p", p, "must be positive and finite"));
    }
    if !(tol > 0.0) {
        return Err(invalid("tol", tol, "must be positive"));
    }
    let (n, d) = (a.nrows(), a.ncols());
    let live: Vec<usize> = (0..n).filter(|&i| a.row(i).iter().any(|v| *v != 0.0)).collect();
    let mut w = vec![0.0; n];
    for &i in &live {
        w[i] = match init {
            Some(x) if x[i] > 0.0 && x[i].is_finite() => x[i],
            _ => d as f64 / n as f64,
        };
    }
    let eta = if p < 4.0 { 1.0 } else { (2.0 / p).min(1.0) };
    let mut residual = f64::INFINITY;
    let mut rank = 0;
    let mut iterations = 0;
    let mut converged = false;
    if live.is_empty() {
        return Ok(LewisWeights {
            p,
            w,
            sum_w: 0.0,
            residual: 0.0,
            iterations: 0,
            converged: true,
            rank: 0,
        });
    }
    while iterations < max_iter.max(1) {
        let (u, r) = lewis_update(a, p, &w, &live);
        rank = r;
        residual = live.iter().map(|&i| (w[i] - u[i]).abs() / w[i]).fold(0.0, f64::max);
        if residual <= tol {
            converged = true;
            break;
        }
        iterations += 1;
        if iterations >= max_iter {
            break;
        }
        for &i in &live {
            w[i] = if eta == 1.0 {
                u[i]
            } else {
                w[i].powf(1.0 - eta) * u[i].powf(eta)
            };
        }
    }
    let sum_w = w.iter().sum();
    Ok(LewisWeights {
        p,
        w,
        sum_w,
        residual,
        iterations,
        converged,
        rank,
    })
}

/// Lewis weights, falling back to leverage scores when the iteration does not
/// converge. Used where only constant-factor upper bounds are needed.
pub fn lewis_or_leverage(a: &DenseMatrix, p: f64, tol: f64, max_iter: usize, init: Option<&[f64]>) -> Vec<f64> {
    match lewis_weights_from(a, p, tol, max_iter, init) {
        Ok(lw) if lw.converged => lw.w,
        _ => leverage_scores(a),
    }
}

/// A matrix with heavy rows split into scaled copies.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitRows {
    pub matrix: DenseMatrix,
    /// Source row of each output row.
    pub parent: Vec<usize>,
    /// `k^{-1/p}` factor applied to each output row.
    pub scale: Vec<f64>,
}

/// Number of copies for a row with Lewis bound `wt` at threshold `thr`.
#[inline]
fn copies(wt: f64, thr: f64) -> usize {
    if wt > thr {
        (wt / thr).ceil() as usize
    } else {
        1
    }
}

/// Replaces every row with `w̃ᵢ > C₂d/n` by `k = ⌈w̃ᵢ/(C₂d/n)⌉` copies of
/// `aᵢ/k^{1/p}`, which leaves `‖Ax‖_p` unchanged.
pub fn split_rows(a: &DenseMatrix, wt: &[f64], p: f64, c2: f64) -> SplitRows {
    let (n, d) = (a.nrows(), a.ncols());
    assert_eq!(wt.len(), n);
    let thr = c2 * d as f64 / n as f64;
    let mut parent = Vec::with_capacity(n);
    let mut scale = Vec::with_capacity(n);
    for (i, &w) in wt.iter().enumerate() {
        let k = copies(w, thr);
        let s = if k == 1 { 1.0 } else { (k as f64).powf(-1.0 / p) };
        for _ in 0..k {
            parent.push(i);
            scale.push(s);
        }
    }
    let matrix = a.select_scaled(&parent, &scale);
    SplitRows { matrix, parent, scale }
}

/// Keeps each row independently with probability 1/2, scaled by `2^{1/p}`.
/// Returns the kept rows and their indices; the result may be empty.
pub fn split_and_sample<R: Rng + ?Sized>(a: &DenseMatrix, p: f64, rng: &mut R) -> (DenseMatrix, Vec<usize>) {
    let kept: Vec<usize> = (0..a.nrows()).filter(|_| rng.random::<bool>()).collect();
    let s = 2f64.powf(1.0 / p);
    let scale = vec![s; kept.len()];
    (a.select_scaled(&kept, &scale), kept)
}

/// Whether a plan came from one-shot or halving sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    OneShot,
    Half,
}

/// Independent row-sampling probabilities with `p_i^{-1/p}` rescaling.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub probabilities: Vec<f64>,
    pub rescale_exponent: f64,
    pub mode: SamplingMode,
}

impl SamplingPlan {
    pub fn expected_rows(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// `p_i = min{1, m · d^{max(0, p/2−1)} · w̃_i}`.
pub fn lewis_sampling_plan(wt: &[f64], p: f64, m: f64, d: usize) -> SamplingPlan {
    let boost = (d as f64).powf((p / 2.0 - 1.0).max(0.0));
    let probabilities = wt.iter().map(|&w| (m * boost * w).clamp(0.0, 1.0)).collect();
    SamplingPlan {
        probabilities,
        rescale_exponent: 1.0 / p,
        mode: SamplingMode::OneShot,
    }
}

/// Output of [`apply_plan`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledRows {
    pub indices: Vec<usize>,
    /// Sampled rows scaled by `p_i^{-1/p}`.
    pub rows: DenseMatrix,
    /// Objective weights `1/p_i`.
    pub weights: Vec<f64>,
    /// Scaled labels at the sampled indices, when labels were supplied.
    pub b: Option<Vec<f64>>,
}

/// Draws the rows of a plan. When labels are given, exactly the sampled
/// indices are read.
pub fn apply_plan<R: Rng + ?Sized>(
    a: &DenseMatrix,
    labels: Option<&dyn Labels>,
    plan: &SamplingPlan,
    rng: &mut R,
) -> SampledRows {
    let mut indices = Vec::new();
    let mut weights = Vec::new();
    let mut scale = Vec::new();
    for (i, &pi) in plan.probabilities.iter().enumerate() {
        if pi > 0.0 && (pi >= 1.0 || rng.random::<f64>() < pi) {
            indices.push(i);
            weights.push(1.0 / pi);
            scale.push(pi.powf(-plan.rescale_exponent));
        }
    }
    let rows = a.select_scaled(&indices, &scale);
    let b = labels.map(|l| indices.iter().zip(&scale).map(|(&i, s)| s * l.get(i)).collect());
    SampledRows {
        indices,
        rows,
        weights,
        b,
    }
}

/// A multiset of (possibly rescaled) copies of rows of a fixed matrix.
/// Copy `j` stands for the row `c_j^{1/p} · a_{parent_j}`, contributing
/// `c_j |aᵀx − b|^p` to the objective.
#[derive(Debug, Clone, PartialEq)]
pub struct RowCopies {
    pub parent: Vec<usize>,
    pub c: Vec<f64>,
}

impl RowCopies {
    pub fn identity(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            c: vec![1.0; n],
        }
    }

    pub fn from_weights(w: &WeightVector) -> Self {
        Self {
            parent: w.support().to_vec(),
            c: w.values().to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// The scaled matrix `diag(c^{1/p}) A_parent`.
    pub fn matrix(&self, a: &DenseMatrix, p: f64) -> DenseMatrix {
        let s: Vec<f64> = self.c.iter().map(|c| c.powf(1.0 / p)).collect();
        a.select_scaled(&self.parent, &s)
    }

    /// Per-source-row weights, summing over copies.
    pub fn to_weights(&self, n: usize) -> WeightVector {
        WeightVector::from_pairs(n, self.parent.iter().copied().zip(self.c.iter().copied()))
            .expect("row copies hold valid weights")
    }

    /// Distinct source rows, sorted.
    pub fn distinct_parents(&self) -> Vec<usize> {
        let mut v = self.parent.clone();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Knobs of the split-and-sample loop.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbedConfig {
    /// Constant in front of the row target.
    pub c_se: f64,
    /// Splitting threshold constant.
    pub c2: f64,
    pub lewis_tol: f64,
    pub lewis_max_iter: usize,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self {
            c_se: 4.0,
            c2: 6.0,
            lewis_tol: 1e-3,
            lewis_max_iter: 100,
        }
    }
}

/// Outcome of repeated split-and-sample rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Halving {
    pub rows: RowCopies,
    pub rounds: usize,
    pub reached_target: bool,
}

/// Repeats {Lewis weights → split → keep half} until at most `target` copies
/// remain or `max_rounds` is hit. Empty draws are redrawn.
pub fn lewis_halving(
    a: &DenseMatrix,
    p: f64,
    start: RowCopies,
    target: usize,
    max_rounds: usize,
    cfg: &EmbedConfig,
    stream: &RngStream,
) -> Halving {
    let mut rng = stream.rng();
    let d = a.ncols();
    let mut rows = start;
    let mut rounds = 0;
    let mut prev_w: Option<Vec<f64>> = None;
    while rows.len() > target.max(1) {
        if rounds >= max_rounds {
            return Halving {
                rows,
                rounds,
                reached_target: false,
            };
        }
        let m = rows.matrix(a, p);
        let init = prev_w.as_deref().filter(|w| w.len() == rows.len());
        let w = lewis_or_leverage(&m, p, cfg.lewis_tol, cfg.lewis_max_iter, init);
        let thr = cfg.c2 * d as f64 / rows.len() as f64;
        let mut split = RowCopies {
            parent: Vec::with_capacity(rows.len()),
            c: Vec::with_capacity(rows.len()),
        };
        let mut split_w = Vec::with_capacity(rows.len());
        for j in 0..rows.len() {
            let k = copies(w[j], thr);
            for _ in 0..k {
                split.parent.push(rows.parent[j]);
                split.c.push(rows.c[j] / k as f64);
                split_w.push(w[j] / k as f64);
            }
        }
        let (next, next_w) = loop {
            let mut next = RowCopies {
                parent: Vec::with_capacity(split.len() / 2 + 1),
                c: Vec::with_capacity(split.len() / 2 + 1),
            };
            let mut nw = Vec::with_capacity(split.len() / 2 + 1);
            for j in 0..split.len() {
                if rng.random::<bool>() {
                    next.parent.push(split.parent[j]);
                    next.c.push(split.c[j] * 2.0);
                    nw.push(split_w[j] * 2.0);
                }
            }
            if !next.is_empty() {
                break (next, nw);
            }
        };
        rows = next;
        prev_w = Some(next_w);
        rounds += 1;
    }
    Halving {
        rows,
        rounds,
        reached_target: true,
    }
}

/// `C_se · (d^{max(1,p/2)}/ε²) · ((ln d)² ln n + ln 1/δ)`, at least `d`.
pub fn embedding_row_target(n: usize, d: usize, p: f64, eps: f64, delta: f64, c_se: f64) -> usize {
    let df = d as f64;
    let ld = df.ln();
    let r = c_se * df.powf((p / 2.0).max(1.0)) / (eps * eps) * (ld * ld * (n as f64).ln() + (1.0 / delta).ln());
    (r.ceil() as usize).max(d)
}

/// A subspace embedding given as per-row weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub weights: WeightVector,
    pub rounds: usize,
    pub target: usize,
    pub reached_target: bool,
}

/// ℓp subspace embedding by iterated split-and-sample.
pub fn lp_subspace_embedding(
    a: &DenseMatrix,
    p: f64,
    eps: f64,
    delta: f64,
    cfg: &EmbedConfig,
    stream: &RngStream,
) -> Result<Embedding> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(invalid("eps", eps, "must lie in (0, 1/2]"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", delta, "must lie in (0, 1)"));
    }
    let n = a.nrows();
    let target = embedding_row_target(n, a.ncols(), p, eps, delta, cfg.c_se);
    let cap = 4 * (usize::BITS - n.leading_zeros()) as usize + 8;
    let h = lewis_halving(a, p, RowCopies::identity(n), target, cap, cfg, stream);
    Ok(Embedding {
        weights: h.rows.to_weights(n),
        rounds: h.rounds,
        target,
        reached_target: h.reached_target,
    })
}
