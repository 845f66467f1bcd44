//! Weighted regression solvers for sampled sub-problems.
//!
//! Losses for which `t ↦ M(√t)` is concave are minimized by half-quadratic
//! IRLS: each step solves a weighted least-squares problem with weights
//! `wᵢ M'(sᵢ)/sᵢ`, `sᵢ = √(rᵢ² + μ)`, which majorizes the μ-smoothed
//! objective. For losses singular at the origin μ is annealed from the
//! residual scale down to `(tol · scale)²`. Losses growing faster than
//! quadratically use damped Newton steps. Nonconvex losses are solved from
//! several starts and the best local optimum is returned.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;

use crate::linalg::{solve_psd, weighted_lstsq};
use crate::loss::LossDescriptor;
use crate::matrix::{axpy, DenseMatrix};
use crate::weights::mloss;

/// Solver knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Relative tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Number of starts for nonconvex losses.
    pub starts: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 500,
            starts: 5,
        }
    }
}

/// A regression solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub x: Vec<f64>,
    /// `Σ wᵢ M(|aᵢᵀx − bᵢ|)`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The loss is nonconvex, so `x` is a local optimum.
    pub local: bool,
}

fn residuals(a: &DenseMatrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    a.rows().zip(b).map(|(r, bi)| crate::matrix::dot(r, x) - bi).collect()
}

/// Exact objective `Σ wᵢ M(|aᵢᵀx − bᵢ|)`.
pub fn objective(a: &DenseMatrix, b: &[f64], w: Option<&[f64]>, loss: &LossDescriptor, x: &[f64]) -> f64 {
    mloss(&residuals(a, b, x), loss, w)
}

fn weight_at(w: Option<&[f64]>, i: usize) -> f64 {
    w.map_or(1.0, |w| w[i])
}

fn smoothed(r: &[f64], w: Option<&[f64]>, loss: &LossDescriptor, mu: f64) -> f64 {
    r.iter()
        .enumerate()
        .map(|(i, ri)| {
            let wi = weight_at(w, i);
            if wi > 0.0 {
                wi * loss.eval((ri * ri + mu).sqrt())
            } else {
                0.0
            }
        })
        .sum()
}

fn rel_step(x: &[f64], y: &[f64]) -> f64 {
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let den: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    num / den.max(1e-300)
}

/// Half-quadratic IRLS from `x0`.
fn irls(
    a: &DenseMatrix,
    b: &[f64],
    w: Option<&[f64]>,
    loss: &LossDescriptor,
    x0: Vec<f64>,
    opts: &SolveOptions,
) -> (Vec<f64>, usize, bool) {
    let n = a.nrows();
    let mut x = x0;
    let mut r = residuals(a, b, &x);
    let scale = {
        let s: f64 = r.iter().map(|v| v.abs()).sum::<f64>() / n.max(1) as f64;
        let bs: f64 = b.iter().map(|v| v.abs()).sum::<f64>() / n.max(1) as f64;
        s.max(bs * 1e-12).max(1e-300)
    };
    let singular = loss.singular_at_zero();
    let mu_floor = if singular { (opts.tol * scale).powi(2) } else { 0.0 };
    let mut mu = if singular { scale * scale } else { 0.0 };
    let limit0 = loss.second(0.0);
    let mut f = smoothed(&r, w, loss, mu);
    let mut omega = vec![0.0; n];
    for it in 0..opts.max_iter {
        for i in 0..n {
            let wi = weight_at(w, i);
            if wi <= 0.0 {
                omega[i] = 0.0;
                continue;
            }
            let s = (r[i] * r[i] + mu).sqrt();
            omega[i] = wi * if s > 0.0 { loss.deriv(s) / s } else { limit0 };
        }
        if omega.iter().all(|v| *v <= 0.0) {
            return (x, it, true);
        }
        let x_new = weighted_lstsq(a, b, &omega);
        let r_new = residuals(a, b, &x_new);
        let f_new = smoothed(&r_new, w, loss, mu);
        let step = rel_step(&x_new, &x);
        let drop = (f - f_new) / f.abs().max(1e-300);
        let accept = f_new <= f * (1.0 + 1e-12) + 1e-300;
        if accept {
            x = x_new;
            r = r_new;
            f = f_new;
        }
        let level_done = !accept || step <= opts.tol || drop.abs() <= opts.tol * 1e-2;
        let coarse_done = mu > mu_floor && (step <= 1e-3 || drop.abs() <= 1e-4);
        if level_done || coarse_done {
            if mu > mu_floor {
                mu = (mu * 0.01).max(mu_floor);
                f = smoothed(&r, w, loss, mu);
            } else {
                return (x, it + 1, true);
            }
        }
    }
    (x, opts.max_iter, false)
}

/// Damped Newton from `x0`, for losses growing faster than quadratically.
fn newton(
    a: &DenseMatrix,
    b: &[f64],
    w: Option<&[f64]>,
    loss: &LossDescriptor,
    x0: Vec<f64>,
    opts: &SolveOptions,
) -> (Vec<f64>, usize, bool) {
    let (n, d) = (a.nrows(), a.ncols());
    let mut x = x0;
    let mut r = residuals(a, b, &x);
    let mut f = mloss(&r, loss, w);
    for it in 0..opts.max_iter {
        let mut g = vec![0.0; d];
        let mut h = vec![0.0; d * d];
        for i in 0..n {
            let wi = weight_at(w, i);
            if wi <= 0.0 {
                continue;
            }
            let row = a.row(i);
            let gi = wi * loss.deriv(r[i]) * r[i].signum();
            axpy(gi, row, &mut g);
            let hi = wi * loss.second(r[i]).max(0.0);
            if hi > 0.0 {
                for j in 0..d {
                    let hj = hi * row[j];
                    for k in 0..d {
                        h[j * d + k] += hj * row[k];
                    }
                }
            }
        }
        let diag_max = (0..d).map(|j| h[j * d + j]).fold(0.0, f64::max);
        for j in 0..d {
            h[j * d + j] += 1e-12 * diag_max.max(1e-300);
        }
        let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
        let step = solve_psd(&h, d, &neg_g);
        let decrement: f64 = -step.iter().zip(&g).map(|(s, gi)| s * gi).sum::<f64>();
        if !(decrement > opts.tol * opts.tol * f.max(1e-300)) {
            return (x, it, true);
        }
        let mut t = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi + t * si).collect();
            let rc = residuals(a, b, &cand);
            let fc = mloss(&rc, loss, w);
            if fc <= f - 1e-4 * t * decrement {
                let rel = (f - fc) / f.max(1e-300);
                x = cand;
                r = rc;
                f = fc;
                moved = true;
                if rel <= opts.tol * 1e-2 {
                    return (x, it + 1, true);
                }
                break;
            }
            t *= 0.5;
        }
        if !moved {
            return (x, it + 1, true);
        }
    }
    (x, opts.max_iter, false)
}

fn local_solve(
    a: &DenseMatrix,
    b: &[f64],
    w: Option<&[f64]>,
    loss: &LossDescriptor,
    x0: Vec<f64>,
    opts: &SolveOptions,
) -> SolveResult {
    let (x, iterations, converged) = if loss.half_quadratic() {
        irls(a, b, w, loss, x0, opts)
    } else {
        newton(a, b, w, loss, x0, opts)
    };
    let objective = objective(a, b, w, loss, &x);
    SolveResult {
        x,
        objective,
        iterations,
        converged,
        local: !loss.convex,
    }
}

fn least_squares(a: &DenseMatrix, b: &[f64], w: Option<&[f64]>) -> Vec<f64> {
    match w {
        Some(w) => weighted_lstsq(a, b, w),
        None => weighted_lstsq(a, b, &vec![1.0; a.nrows()]),
    }
}

/// Minimizes `Σ wᵢ M(|aᵢᵀx − bᵢ|)`; `w = None` means unit weights.
pub fn solve_weighted_mloss(
    a: &DenseMatrix,
    b: &[f64],
    w: Option<&[f64]>,
    loss: &LossDescriptor,
    opts: &SolveOptions,
) -> SolveResult {
    solve_weighted_mloss_from(a, b, w, loss, opts, &[])
}

/// As [`solve_weighted_mloss`], with extra user-supplied starting points.
pub fn solve_weighted_mloss_from(
    a: &DenseMatrix,
    b: &[f64],
    w: Option<&[f64]>,
    loss: &LossDescriptor,
    opts: &SolveOptions,
    extra_starts: &[Vec<f64>],
) -> SolveResult {
    assert_eq!(a.nrows(), b.len());
    if let Some(w) = w {
        assert_eq!(w.len(), b.len());
    }
    let d = a.ncols();
    if a.nrows() == 0 {
        return SolveResult {
            x: vec![0.0; d],
            objective: 0.0,
            iterations: 0,
            converged: true,
            local: !loss.convex,
        };
    }
    let ls = least_squares(a, b, w);
    if loss.lp_exponent() == Some(2.0) {
        let objective = objective(a, b, w, loss, &ls);
        return SolveResult {
            x: ls,
            objective,
            iterations: 1,
            converged: true,
            local: false,
        };
    }
    let mut best = local_solve(a, b, w, loss, ls.clone(), opts);
    if loss.convex && extra_starts.is_empty() {
        return best;
    }
    let mut starts: Vec<Vec<f64>> = extra_starts.to_vec();
    if !loss.convex {
        let l1 = LossDescriptor::lp(1.0).expect("valid");
        let l1_sol = local_solve(a, b, w, &l1, ls.clone(), opts).x;
        let huber_tau = {
            let mut r: Vec<f64> = residuals(a, b, &ls).iter().map(|v| v.abs()).collect();
            r.sort_by(|x, y| x.partial_cmp(y).unwrap());
            r[r.len() / 2].max(1e-12)
        };
        let hub = LossDescriptor::huber(huber_tau).expect("valid");
        let hub_sol = local_solve(a, b, w, &hub, l1_sol.clone(), opts).x;
        starts.push(l1_sol);
        starts.push(vec![0.0; d]);
        starts.push(hub_sol);
        starts.truncate(opts.starts.saturating_sub(1).max(extra_starts.len()));
    }
    for s in starts {
        let cand = local_solve(a, b, w, loss, s, opts);
        if cand.objective < best.objective {
            best = cand;
        }
    }
    best
}

/// Minimizes `Σ wᵢ |aᵢᵀx − bᵢ|^p`.
pub fn solve_weighted_lp(a: &DenseMatrix, b: &[f64], w: Option<&[f64]>, p: f64, opts: &SolveOptions) -> SolveResult {
    let loss = LossDescriptor::lp(p).expect("p must be positive");
    solve_weighted_mloss(a, b, w, &loss, opts)
}

/// Global search for one-dimensional problems: every breakpoint `bᵢ/aᵢ`,
/// a uniform grid spanning them, then golden-section refinement around the
/// best point.
pub fn brute_force_1d(col: &[f64], b: &[f64], loss: &LossDescriptor, w: Option<&[f64]>, grid: usize) -> SolveResult {
    assert_eq!(col.len(), b.len());
    let f = |t: f64| -> f64 {
        col.iter()
            .zip(b)
            .enumerate()
            .map(|(i, (ai, bi))| {
                let wi = weight_at(w, i);
                if wi > 0.0 {
                    wi * loss.eval(ai * t - bi)
                } else {
                    0.0
                }
            })
            .sum()
    };
    let mut cands: Vec<f64> = col
        .iter()
        .zip(b)
        .filter(|(ai, _)| **ai != 0.0)
        .map(|(ai, bi)| bi / ai)
        .collect();
    cands.push(0.0);
    cands.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cands.dedup();
    let lo = cands[0];
    let hi = *cands.last().unwrap();
    let span = (hi - lo).max(1e-12);
    let g = grid.max(2);
    let h = span / (g - 1) as f64;
    cands.extend((0..g).map(|k| lo + h * k as f64));
    let mut best_t = 0.0;
    let mut best_f = f64::INFINITY;
    for &t in &cands {
        let v = f(t);
        if v < best_f {
            best_f = v;
            best_t = t;
        }
    }
    // golden-section refinement on [best − h, best + h]
    let (mut l, mut r) = (best_t - h, best_t + h);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut iterations = 0;
    while r - l > 1e-12 * (1.0 + best_t.abs()) && iterations < 200 {
        let m1 = r - phi * (r - l);
        let m2 = l + phi * (r - l);
        if f(m1) <= f(m2) {
            r = m2;
        } else {
            l = m1;
        }
        iterations += 1;
    }
    let mid = 0.5 * (l + r);
    let fm = f(mid);
    if fm < best_f {
        best_f = fm;
        best_t = mid;
    }
    SolveResult {
        x: vec![best_t],
        objective: best_f,
        iterations,
        converged: true,
        local: false,
    }
}
