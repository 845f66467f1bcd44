//! Empirical checks: distortion of a reweighted norm over many directions,
//! and brute-force sensitivities for small instances.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::PivotedQr;
use crate::loss::LossDescriptor;
use crate::matrix::DenseMatrix;
use crate::rng::RngStream;
use crate::weights::WeightVector;

/// How many directions a distortion probe tries.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub random: usize,
    /// Worst random directions that are refined by local ascent.
    pub refined: usize,
    pub ascent_steps: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            random: 10_000,
            refined: 50,
            ascent_steps: 40,
        }
    }
}

/// Result of a distortion probe.
#[derive(Debug, Clone, PartialEq)]
pub struct Distortion {
    /// `max |sketch(x)/full(x) − 1|` over all directions tried.
    pub max: f64,
    /// The same maximum over the random directions only.
    pub random_max: f64,
    /// Direction attaining `max`.
    pub worst: Vec<f64>,
}

fn gaussian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

/// Compares two norms on Gaussian directions, then refines the worst ones
/// by accepting random perturbations that increase the distortion.
pub fn distortion_probe(
    full: &dyn Fn(&[f64]) -> f64,
    sketch: &dyn Fn(&[f64]) -> f64,
    d: usize,
    cfg: &ProbeConfig,
    stream: &RngStream,
) -> Distortion {
    let dist = |x: &[f64]| -> f64 {
        let f = full(x);
        if f > 0.0 {
            (sketch(x) / f - 1.0).abs()
        } else {
            0.0
        }
    };
    let mut rng = stream.rng();
    let mut scored: Vec<(f64, Vec<f64>)> = (0..cfg.random)
        .map(|_| {
            let x = gaussian(d, &mut rng);
            (dist(&x), x)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let random_max = scored.first().map_or(0.0, |s| s.0);
    let mut best = scored.first().cloned().unwrap_or((0.0, vec![0.0; d]));
    for (mut score, mut x) in scored.into_iter().take(cfg.refined) {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let mut step = 0.3 * norm;
        for _ in 0..cfg.ascent_steps {
            let y: Vec<f64> = x.iter().zip(gaussian(d, &mut rng)).map(|(u, g)| u + step * g).collect();
            let s = dist(&y);
            if s > score {
                score = s;
                x = y;
            } else {
                step *= 0.8;
            }
        }
        if score > best.0 {
            best = (score, x);
        }
    }
    Distortion {
        max: best.0,
        random_max,
        worst: best.1,
    }
}

/// `(Σ wᵢ M(|aᵢx|))^{1/p_M}` over the support of `w`, or over all rows.
pub fn weighted_norm(a: &DenseMatrix, loss: &LossDescriptor, w: Option<&WeightVector>, x: &[f64]) -> f64 {
    let total: f64 = match w {
        Some(w) => w.iter().map(|(i, v)| v * loss.eval(a.row_dot(i, x))).sum(),
        None => (0..a.nrows()).map(|i| loss.eval(a.row_dot(i, x))).sum(),
    };
    total.powf(1.0 / loss.p_m)
}

/// Distortion of the M-norm of `Ax` under weights `w` against unit weights.
/// For losses that are not scale invariant each direction is also tried at
/// the scales `2^k`, `k ∈ [−scale_range, scale_range]`, relative to
/// `‖Ax‖_∞ = 1`.
pub fn m_distortion(
    a: &DenseMatrix,
    loss: &LossDescriptor,
    w: &WeightVector,
    scale_range: i32,
    cfg: &ProbeConfig,
    stream: &RngStream,
) -> Distortion {
    let scales: Vec<f64> = if loss.scale_invariant {
        vec![1.0]
    } else {
        (-scale_range..=scale_range).map(|k| 2f64.powi(k)).collect()
    };
    let per_scale = ProbeConfig {
        random: cfg.random.div_ceil(scales.len()),
        ..cfg.clone()
    };
    let mut out: Option<Distortion> = None;
    for (k, &s) in scales.iter().enumerate() {
        let norm_to = |x: &[f64]| -> Vec<f64> {
            if loss.scale_invariant {
                return x.to_vec();
            }
            let m = (0..a.nrows()).map(|i| a.row_dot(i, x).abs()).fold(0.0, f64::max);
            let f = if m > 0.0 { s / m } else { 0.0 };
            x.iter().map(|v| v * f).collect()
        };
        let full = |x: &[f64]| weighted_norm(a, loss, None, &norm_to(x));
        let sketch = |x: &[f64]| weighted_norm(a, loss, Some(w), &norm_to(x));
        let d = distortion_probe(&full, &sketch, a.ncols(), &per_scale, &stream.child(k as u64));
        if out.as_ref().is_none_or(|o| d.max > o.max) {
            out = Some(d);
        }
    }
    out.expect("at least one scale")
}

/// Knobs of [`brute_force_sensitivities`].
#[derive(Debug, Clone, PartialEq)]
pub struct BruteConfig {
    pub directions: usize,
    /// Scales `2^k`, `k ∈ [−scale_range, scale_range]`, relative to
    /// `‖Ax‖_∞ = 1`; ignored for scale-invariant losses.
    pub scale_range: i32,
    pub ascent_steps: usize,
}

impl Default for BruteConfig {
    fn default() -> Self {
        Self {
            directions: 2000,
            scale_range: 8,
            ascent_steps: 60,
        }
    }
}

/// Lower estimates of `sup_x M(aᵢx) / Σⱼ M(aⱼx)` by search over random
/// directions, the ℓ₂-extremal directions `(AᵀA)⁺aᵢ`, and per-row local
/// ascent from the best point found.
pub fn brute_force_sensitivities(
    a: &DenseMatrix,
    loss: &LossDescriptor,
    cfg: &BruteConfig,
    stream: &RngStream,
) -> Vec<f64> {
    let (n, d) = (a.nrows(), a.ncols());
    let scales: Vec<f64> = if loss.scale_invariant {
        vec![1.0]
    } else {
        (-cfg.scale_range..=cfg.scale_range).map(|k| 2f64.powi(k)).collect()
    };
    let share = |x: &[f64], i: usize| -> f64 {
        let vals: Vec<f64> = (0..n).map(|j| loss.eval(a.row_dot(j, x))).collect();
        let t: f64 = vals.iter().sum();
        if t > 0.0 {
            vals[i] / t
        } else {
            0.0
        }
    };
    let mut best = vec![0.0; n];
    let mut arg: Vec<Vec<f64>> = vec![vec![0.0; d]; n];
    let consider = |x: Vec<f64>, best: &mut [f64], arg: &mut [Vec<f64>]| {
        let m = (0..n).map(|i| a.row_dot(i, &x).abs()).fold(0.0, f64::max);
        if !(m > 0.0) {
            return;
        }
        for &s in &scales {
            let y: Vec<f64> = x.iter().map(|v| v * s / m).collect();
            let vals: Vec<f64> = (0..n).map(|j| loss.eval(a.row_dot(j, &y))).collect();
            let t: f64 = vals.iter().sum();
            if t <= 0.0 {
                continue;
            }
            for i in 0..n {
                let r = vals[i] / t;
                if r > best[i] {
                    best[i] = r;
                    arg[i] = y.clone();
                }
            }
        }
    };
    let qr = PivotedQr::from_matrix(a);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        let x = qr.solve_lstsq(&e);
        consider(x, &mut best, &mut arg);
    }
    let mut rng = stream.rng();
    for _ in 0..cfg.directions {
        let x = gaussian(d, &mut rng);
        consider(x, &mut best, &mut arg);
    }
    for i in 0..n {
        let mut x = arg[i].clone();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            continue;
        }
        let mut step = 0.2 * norm;
        for _ in 0..cfg.ascent_steps {
            let y: Vec<f64> = x.iter().zip(gaussian(d, &mut rng)).map(|(u, g)| u + step * g).collect();
            let s = share(&y, i);
            if s > best[i] {
                best[i] = s;
                x = y;
            } else {
                step *= 0.85;
            }
        }
    }
    best
}
