//! Active ℓp regression: sample rows using only `A`, read `b` on the sample,
//! solve the reweighted problem.
//!
//! Every pipeline works on a [`RowCopies`] sub-problem of a fixed matrix, so
//! a reduced problem (for example the output of one-shot Lewis sampling) can
//! be fed back in without materializing anything. Query sets depend on `A`,
//! the parameters and the seed only; `b` influences which candidate is
//! returned, never which entries are read.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;

use crate::error::{invalid, Result};
use crate::lewis::{
    embedding_row_target, lewis_halving, lewis_or_leverage, lewis_sampling_plan, EmbedConfig, RowCopies,
};
use crate::loss::LossDescriptor;
use crate::matrix::DenseMatrix;
use crate::oracle::Labels;
use crate::rng::RngStream;
use crate::solvers::{solve_weighted_mloss, SolveOptions, SolveResult};
use crate::weights::mnorm_dense;
use rand::Rng;

/// Constants of the query budget.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetConstants {
    /// Leading constant `C` of `m`.
    pub c: f64,
}

impl Default for BudgetConstants {
    fn default() -> Self {
        Self { c: 8.0 }
    }
}

/// A query budget and, for `p ∈ (1,2)`, the accuracy ladder `γ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveBudget {
    pub p: f64,
    pub d: usize,
    pub n: usize,
    pub eps: f64,
    pub delta: f64,
    pub m: usize,
    pub schedule: Option<Vec<f64>>,
}

/// `β_i = 2^i/(2^i − 1)` for `i = 1..=len`.
pub fn beta_ladder(len: usize) -> Vec<f64> {
    (1..=len)
        .map(|i| {
            let t = 2f64.powi(i as i32);
            t / (t - 1.0)
        })
        .collect()
}

/// `m = C · X · [(ln d)² ln(d/ε) + ln 1/δ] · ln 1/δ` with `X = d/ε²` for
/// `p ≤ 1`, `d/ε` for `1 < p ≤ 2` and `d^{p/2}/ε^p` above.
pub fn budget(p: f64, d: usize, n: usize, eps: f64, delta: f64, k: &BudgetConstants) -> Result<ActiveBudget> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(invalid("p", p, "must be positive and finite"));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid("eps", eps, "must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", delta, "must lie in (0, 1)"));
    }
    if d == 0 {
        return Err(invalid("d", 0.0, "must be at least 1"));
    }
    let df = d as f64;
    let x = if p <= 1.0 {
        df / (eps * eps)
    } else if p <= 2.0 {
        df / eps
    } else {
        df.powf(p / 2.0) / eps.powf(p)
    };
    let ld = df.ln();
    let li = (1.0 / delta).ln();
    let m = k.c * x * (ld * ld * (df / eps).ln().max(0.0) + li) * li;
    let schedule = (p > 1.0 && p < 2.0).then(|| {
        let len = if eps < 0.5 {
            (1.0 / eps).log2().log2().ceil().max(1.0) as usize
        } else {
            1
        };
        beta_ladder(len)
            .into_iter()
            .map(|b| eps.min(1.0).powf(2.0 / (1.0 + b)))
            .collect()
    });
    Ok(ActiveBudget {
        p,
        d,
        n,
        eps,
        delta,
        m: (m.ceil() as usize).max(d),
        schedule,
    })
}

/// Quasi-triangle constant of `‖·‖_p`: `2^{1/p−1}` below 1, else 1.
pub fn triangle_constant(p: f64) -> f64 {
    if p < 1.0 {
        2f64.powf(1.0 / p - 1.0)
    } else {
        1.0
    }
}

/// The boosted approximation factor `κα + 2κ³(α+1)`.
pub fn boost_factor(alpha: f64, kappa: f64) -> f64 {
    kappa * alpha + 2.0 * kappa.powi(3) * (alpha + 1.0)
}

/// Result of [`boost_candidates`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoostOutcome {
    pub index: usize,
    pub x: Vec<f64>,
    /// No candidate was close to half the others; the candidate with the
    /// smallest such distance was returned instead.
    pub fallback: bool,
    pub kappa: f64,
}

impl BoostOutcome {
    /// Guarantee of the selection when most candidates are `α`-good.
    pub fn factor(&self, alpha: f64) -> f64 {
        boost_factor(alpha, self.kappa)
    }
}

/// Picks a candidate close to most others in the norm `‖A(·)‖`.
///
/// With `ℓ` candidates, `τ` is the pairwise distance at sorted position
/// `⌊0.8 ℓ²⌋`; the first candidate within `τ` of at least `ℓ/2` candidates
/// (itself included) is returned. Only `A` is read.
pub fn boost_candidates(
    candidates: &[Vec<f64>],
    a: &DenseMatrix,
    norm: &LossDescriptor,
    kappa: f64,
) -> Result<BoostOutcome> {
    if candidates.is_empty() {
        return Err(crate::error::Error::Empty("boost candidates"));
    }
    let l = candidates.len();
    let images: Vec<Vec<f64>> = candidates.iter().map(|x| a.matvec(x)).collect();
    let mut dist = vec![0.0; l * l];
    let mut diff = vec![0.0; a.nrows()];
    for i in 0..l {
        for j in (i + 1)..l {
            for (k, v) in diff.iter_mut().enumerate() {
                *v = images[i][k] - images[j][k];
            }
            let dij = mnorm_dense(&diff, norm, None);
            dist[i * l + j] = dij;
            dist[j * l + i] = dij;
        }
    }
    let mut sorted = dist.clone();
    sorted.sort_by(|x, y| x.partial_cmp(y).expect("finite distances"));
    let tau = sorted[(l * l * 8 / 10).min(l * l - 1)];
    let need = l.div_ceil(2);
    for i in 0..l {
        let close = (0..l).filter(|&j| dist[i * l + j] <= tau).count();
        if close >= need {
            return Ok(BoostOutcome {
                index: i,
                x: candidates[i].clone(),
                fallback: false,
                kappa,
            });
        }
    }
    let ecc = |i: usize| {
        let mut row: Vec<f64> = dist[i * l..(i + 1) * l].to_vec();
        row.sort_by(|x, y| x.partial_cmp(y).expect("finite distances"));
        row[need - 1]
    };
    let mut best = 0;
    for i in 1..l {
        if ecc(i) < ecc(best) {
            best = i;
        }
    }
    Ok(BoostOutcome {
        index: best,
        x: candidates[best].clone(),
        fallback: true,
        kappa,
    })
}

/// Knobs shared by the active ℓp pipelines.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveConfig {
    pub budget: BudgetConstants,
    pub embed: EmbedConfig,
    pub solve: SolveOptions,
    /// Trials `ℓ = ⌈c_δ ln 1/δ⌉`.
    pub c_delta: f64,
    /// Share of the budget spent on the constant-factor stage.
    pub cf_share: f64,
    /// Rows per constant-factor trial when run on its own; defaults to the
    /// `ε = 1/2` embedding target.
    pub cf_rows: Option<usize>,
    /// Constant of the one-shot stage size `m₁`.
    pub c_one_shot: f64,
    /// Lewis tolerance of the one-shot stage.
    pub lewis_tol: f64,
}

impl Default for ActiveConfig {
    fn default() -> Self {
        Self {
            budget: BudgetConstants::default(),
            embed: EmbedConfig::default(),
            solve: SolveOptions::default(),
            c_delta: 3.0,
            cf_share: 0.25,
            cf_rows: None,
            c_one_shot: 1.0,
            lewis_tol: 1e-6,
        }
    }
}

impl ActiveConfig {
    pub fn trials(&self, delta: f64) -> usize {
        ((self.c_delta * (1.0 / delta).ln()).ceil() as usize).max(1)
    }
}

/// Outcome of an active regression pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveResult {
    pub solve: SolveResult,
    /// Sorted distinct indices of `b` that were read.
    pub queried: Vec<usize>,
    /// Declared query budget, when the pipeline has one.
    pub budget: Option<usize>,
    pub trials: usize,
    /// Boosting fell back to minimum eccentricity somewhere.
    pub fallback: bool,
    /// Every row reduction reached its target.
    pub reached_target: bool,
    /// Rows kept by the one-shot stage, if any.
    pub stage1_rows: Option<usize>,
}

impl ActiveResult {
    pub fn queries(&self) -> usize {
        self.queried.len()
    }
}

fn round_cap(n: usize) -> usize {
    4 * (usize::BITS - n.leading_zeros()) as usize + 8
}

fn merge(into: &mut Vec<usize>, more: &[usize]) {
    into.extend_from_slice(more);
    into.sort_unstable();
    into.dedup();
}

struct Trial {
    rows: RowCopies,
    b: Vec<f64>,
    solve: SolveResult,
    reached: bool,
}

/// Reduces `start` to at most `target` copies, reads `b` there and solves.
#[allow(clippy::too_many_arguments)]
fn sample_and_solve(
    a: &DenseMatrix,
    labels: &dyn Labels,
    loss: &LossDescriptor,
    p: f64,
    start: &RowCopies,
    target: usize,
    cfg: &ActiveConfig,
    stream: &RngStream,
) -> Trial {
    let h = lewis_halving(a, p, start.clone(), target, round_cap(start.len()), &cfg.embed, stream);
    let rows = h.rows;
    let b: Vec<f64> = rows.parent.iter().map(|&i| labels.get(i)).collect();
    let sub = a.select_rows(&rows.parent);
    let solve = solve_weighted_mloss(&sub, &b, Some(&rows.c), loss, &cfg.solve);
    Trial {
        rows,
        b,
        solve,
        reached: h.reached_target,
    }
}

fn lp_loss(p: f64) -> Result<LossDescriptor> {
    LossDescriptor::lp(p)
}

fn resolve(a: &DenseMatrix, loss: &LossDescriptor, x: Vec<f64>, t: &Trial) -> SolveResult {
    let sub = a.select_rows(&t.rows.parent);
    SolveResult {
        objective: crate::solvers::objective(&sub, &t.b, Some(&t.rows.c), loss, &x),
        x,
        ..t.solve.clone()
    }
}

#[allow(clippy::too_many_arguments)]
fn constant_factor_on(
    a: &DenseMatrix,
    labels: &dyn Labels,
    p: f64,
    trials: usize,
    rows_per_trial: usize,
    start: &RowCopies,
    cfg: &ActiveConfig,
    stream: &RngStream,
) -> Result<ActiveResult> {
    let loss = lp_loss(p)?;
    let mut runs = Vec::with_capacity(trials);
    let mut queried = Vec::new();
    for t in 0..trials {
        let trial = sample_and_solve(a, labels, &loss, p, start, rows_per_trial, cfg, &stream.child(t as u64));
        merge(&mut queried, &trial.rows.distinct_parents());
        runs.push(trial);
    }
    let cands: Vec<Vec<f64>> = runs.iter().map(|t| t.solve.x.clone()).collect();
    let sub = start.matrix(a, p);
    let pick = boost_candidates(&cands, &sub, &loss, triangle_constant(p))?;
    let solve = resolve(a, &loss, pick.x, &runs[pick.index]);
    Ok(ActiveResult {
        solve,
        queried,
        budget: Some(trials * rows_per_trial),
        trials,
        fallback: pick.fallback,
        reached_target: runs.iter().all(|t| t.reached),
        stage1_rows: None,
    })
}

/// Constant-factor solution: `ℓ = ⌈c_δ ln 1/δ⌉` independent `ε = 1/2`
/// embeddings, each solved on its own sample, then boosted.
pub fn constant_factor_lp(
    a: &DenseMatrix,
    labels: &dyn Labels,
    p: f64,
    delta: f64,
    cfg: &ActiveConfig,
    stream: &RngStream,
) -> Result<ActiveResult> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", delta, "must lie in (0, 1)"));
    }
    let n = a.nrows();
    let rows = cfg
        .cf_rows
        .unwrap_or_else(|| embedding_row_target(n, a.ncols(), p, 0.5, 0.1, cfg.embed.c_se));
    let start = RowCopies::identity(n);
    constant_factor_on(a, labels, p, cfg.trials(delta), rows, &start, cfg, stream)
}

/// Relative-error regression by repeated split-and-sample down to `m`
/// copies; `b` is read only on the final sample.
pub fn recursive_relative_lp(
    a: &DenseMatrix,
    labels: &dyn Labels,
    p: f64,
    m: usize,
    cfg: &ActiveConfig,
    stream: &RngStream,
) -> Result<ActiveResult> {
    recursive_relative_lp_on(a, labels, p, m, &RowCopies::identity(a.nrows()), cfg, stream)
}

/// [`recursive_relative_lp`] on a sub-problem given by row copies.
pub fn recursive_relative_lp_on(
    a: &DenseMatrix,
    labels: &dyn Labels,
    p: f64,
    m: usize,
    start: &RowCopies,
    cfg: &ActiveConfig,
    stream: &RngStream,
) -> Result<ActiveResult> {
    if m < a.ncols() {
        return Err(invalid("m", m as f64, "must be at least d"));
    }
    let loss = lp_loss(p)?;
    let t = sample_and_solve(a, labels, &loss, p, start, m, cfg, stream);
    Ok(ActiveResult {
        queried: t.rows.distinct_parents(),
        solve: t.solve,
        budget: Some(m),
        trials: 1,
        fallback: false,
        reached_target: t.reached,
        stage1_rows: None,
    })
}

/// Splits a budget of `m` queries between `ℓ` constant-factor trials and
/// `ℓ` relative-error trials. Returns `(ℓ, rows per cf trial, rows per
/// trial)` with `ℓ · (cf + rel) ≤ m`; `ℓ` shrinks when the budget cannot
/// give every trial `2d` rows.
pub fn split_budget(m: usize, trials: usize, cf_share: f64, d: usize) -> (usize, usize, usize) {
    let trials = trials.min(m / (2 * d).max(1)).max(1);
    let per = m / trials;
    let cf = ((per as f64 * cf_share).floor() as usize).max(d.min(per / 2)).min(per);
    (trials, cf, per - cf)
}

/// High-probability relative error: a boosted constant-factor `x_c`,
/// `ℓ` recursive trials ranked by their own sampled cost of `x_c`, the
/// costliest tenth discarded, the rest boosted.
pub fn high_prob_relative_lp(
    a: &DenseMatrix,
    labels: &dyn Labels,
    p: f64,
    eps: f64,
    delta: f64,
    cfg: &ActiveConfig,
    stream: &RngStream,
) -> Result<ActiveResult> {
    let b = budget(p, a.ncols(), a.nrows(), eps, delta, &cfg.budget)?;
    high_prob_relative_lp_on(a, labels, p, b.m, delta, &RowCopies::identity(a.nrows()), cfg, stream)
}

/// [`high_prob_relative_lp`] on a sub-problem, with an explicit query
/// budget `m` shared by all stages.
#[allow(clippy::too_many_arguments)]
pub fn high_prob_relative_lp_on(
    a: &DenseMatrix,
    labels: &dyn Labels,
    p: f64,
    m: usize,
    delta: f64,
    start: &RowCopies,
    cfg: &ActiveConfig,
    stream: &RngStream,
) -> Result<ActiveResult> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", delta, "must lie in (0, 1)"));
    }
    let d = a.ncols();
    let loss = lp_loss(p)?;
    let (trials, m_cf, m_rel) = split_budget(m, cfg.trials(delta), cfg.cf_share, d);
    let cf = constant_factor_on(a, labels, p, trials, m_cf, start, cfg, &stream.child(0))?;
    let xc = cf.solve.x.clone();
    let mut queried = cf.queried.clone();
    let mut reached = cf.reached_target;
    let rel_stream = stream.child(1);
    let mut runs = Vec::with_capacity(trials);
    for t in 0..trials {
        let run = sample_and_solve(a, labels, &loss, p, start, m_rel, cfg, &rel_stream.child(t as u64));
        merge(&mut queried, &run.rows.distinct_parents());
        reached &= run.reached;
        runs.push(run);
    }
    let mut ranked: Vec<(f64, usize)> = runs
        .iter()
        .enumerate()
        .map(|(t, run)| {
            let cost: f64 = run
                .rows
                .parent
                .iter()
                .zip(&run.rows.c)
                .zip(&run.b)
                .map(|((&i, &c), &bi)| c * (bi - a.row_dot(i, &xc)).abs().powf(p))
                .sum();
            (cost, t)
        })
        .collect();
    ranked.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite cost").then(x.1.cmp(&y.1)));
    let keep = trials - trials / 10;
    let mut kept: Vec<usize> = ranked[..keep].iter().map(|r| r.1).collect();
    kept.sort_unstable();
    let cands: Vec<Vec<f64>> = kept.iter().map(|&t| runs[t].solve.x.clone()).collect();
    let sub = start.matrix(a, p);
    let pick = boost_candidates(&cands, &sub, &loss, triangle_constant(p))?;
    let solve = resolve(a, &loss, pick.x, &runs[kept[pick.index]]);
    Ok(ActiveResult {
        solve,
        queried,
        budget: Some(m),
        trials,
        fallback: cf.fallback || pick.fallback,
        reached_target: reached,
        stage1_rows: None,
    })
}

/// `m₁ = C₁ d^{max(1,p/2)+1} ln(1/(εδ)) / ε^{2+p}`.
pub fn one_shot_rows(p: f64, d: usize, eps: f64, delta: f64, c1: f64) -> f64 {
    let df = d as f64;
    c1 * df.powf((p / 2.0).max(1.0) + 1.0) * (1.0 / (eps * delta)).ln() / eps.powf(2.0 + p)
}

/// Two-stage pipeline: one-shot Lewis sampling to about `m₁` rows (reading
/// nothing), then [`high_prob_relative_lp_on`] on the reweighted rows with
/// the full budget.
pub fn no_assumptions_lp(
    a: &DenseMatrix,
    labels: &dyn Labels,
    p: f64,
    eps: f64,
    delta: f64,
    cfg: &ActiveConfig,
    stream: &RngStream,
) -> Result<ActiveResult> {
    let n = a.nrows();
    let d = a.ncols();
    let b = budget(p, d, n, eps, delta, &cfg.budget)?;
    let m1 = one_shot_rows(p, d, eps, delta, cfg.c_one_shot);
    let start = if m1 >= n as f64 {
        RowCopies::identity(n)
    } else {
        let w = lewis_or_leverage(a, p, cfg.lewis_tol, 200, None);
        let df = d as f64;
        let m_param = m1 / (df * df.powf((p / 2.0 - 1.0).max(0.0)));
        let plan = lewis_sampling_plan(&w, p, m_param, d);
        let mut rng = stream.child(7).rng();
        let mut rows = RowCopies {
            parent: Vec::new(),
            c: Vec::new(),
        };
        for (i, &pi) in plan.probabilities.iter().enumerate() {
            if pi > 0.0 && (pi >= 1.0 || rng.random::<f64>() < pi) {
                rows.parent.push(i);
                rows.c.push(1.0 / pi);
            }
        }
        rows
    };
    let stage1 = start.len();
    let mut out = high_prob_relative_lp_on(a, labels, p, b.m, delta, &start, cfg, &stream.child(8))?;
    out.stage1_rows = Some(stage1);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Plain, TargetOracle};
    use crate::weights::lp_norm;

    fn gaussianish(n: usize, d: usize, seed: u64) -> DenseMatrix {
        let mut rng = RngStream::new(seed).rng();
        DenseMatrix::from_fn(n, d, |_, _| rng.random::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn beta_ladder_closed_form() {
        let mut b = 2.0;
        for (i, &v) in beta_ladder(6).iter().enumerate() {
            assert!((v - b).abs() < 1e-12, "step {i}");
            b = 2.0 * b / (1.0 + b);
        }
    }

    #[test]
    fn budget_branches() {
        let k = BudgetConstants::default();
        let b1 = budget(1.5, 1_000_000, 1000, 0.1, 0.1, &k).unwrap();
        let b2 = budget(1.5, 2_000_000, 1000, 0.1, 0.1, &k).unwrap();
        let r = b2.m as f64 / b1.m as f64;
        assert!((2.0..=2.4).contains(&r), "{r}");
        let s = b1.schedule.unwrap();
        assert_eq!(s.len(), 2);
        assert!((s[0] - 0.1f64.powf(2.0 / 3.0)).abs() < 1e-12);
        assert!(budget(3.0, 10, 1000, 0.1, 0.1, &k).unwrap().schedule.is_none());
        assert!(budget(1.0, 5, 10, 0.0, 0.1, &k).is_err());
        assert!(budget(1.0, 5, 10, 0.1, 1.0, &k).is_err());
    }

    #[test]
    fn budget_p3_scales_as_eps_cubed_times_logs() {
        let k = BudgetConstants::default();
        let raw = |eps: f64| {
            let ld = 10f64.ln();
            let li = 10f64.ln();
            8.0 * 10f64.powf(1.5) / eps.powi(3) * (ld * ld * (10.0 / eps).ln() + li) * li
        };
        for eps in [0.5, 0.2, 0.1] {
            let m = budget(3.0, 10, 1 << 20, eps, 0.1, &k).unwrap().m as f64;
            assert!((m - raw(eps).ceil()).abs() < 1.0);
        }
    }

    #[test]
    fn boost_identical_and_outlier() {
        let a = gaussianish(50, 3, 1);
        let loss = LossDescriptor::lp(1.0).unwrap();
        let same = vec![vec![1.0, 2.0, 3.0]; 5];
        let out = boost_candidates(&same, &a, &loss, 1.0).unwrap();
        assert_eq!(out.x, same[0]);
        assert!(!out.fallback);
        for pos in 0..10 {
            let mut c = vec![vec![1.0, 0.0, 0.0]; 10];
            c[pos] = vec![1e6, -1e6, 3.0];
            let out = boost_candidates(&c, &a, &loss, 1.0).unwrap();
            assert_ne!(out.index, pos);
        }
    }

    #[test]
    fn boost_factor_formula() {
        let k = triangle_constant(0.5);
        assert_eq!(k, 2.0);
        assert_eq!(boost_factor(3.0, k), 6.0 + 16.0 * 4.0);
        assert_eq!(boost_factor(3.0, 1.0), 3.0 + 8.0);
    }

    #[test]
    fn consistent_system_has_zero_cost() {
        let a = gaussianish(3000, 4, 2);
        let xs = vec![1.0, -2.0, 0.5, 3.0];
        let b = a.matvec(&xs);
        let o = TargetOracle::from_slice(&b);
        let out = constant_factor_lp(&a, &o, 1.5, 0.1, &ActiveConfig::default(), &RngStream::new(3)).unwrap();
        let r: Vec<f64> = a.matvec(&out.solve.x).iter().zip(&b).map(|(u, v)| u - v).collect();
        assert!(lp_norm(&r, 1.5) < 1e-6 * lp_norm(&b, 1.5));
        assert_eq!(o.count(), out.queries());
        assert!(out.queries() <= out.budget.unwrap());
    }

    #[test]
    fn recursive_pass_through_when_small() {
        let a = gaussianish(40, 3, 4);
        let b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let o = TargetOracle::from_slice(&b);
        let out = recursive_relative_lp(&a, &o, 1.5, 50, &ActiveConfig::default(), &RngStream::new(5)).unwrap();
        let full = crate::solvers::solve_weighted_lp(&a, &b, None, 1.5, &SolveOptions::default());
        assert!((out.solve.objective - full.objective).abs() < 1e-9 * full.objective);
        assert_eq!(o.count(), 40);
    }

    #[test]
    fn recursive_queries_at_most_m() {
        let a = gaussianish(4000, 3, 6);
        let b: Vec<f64> = (0..4000).map(|i| (i as f64 * 0.37).cos()).collect();
        for seed in 0..5 {
            let o = TargetOracle::from_slice(&b);
            let out = recursive_relative_lp(&a, &o, 1.0, 200, &ActiveConfig::default(), &RngStream::new(seed)).unwrap();
            assert!(o.count() <= 200);
            assert_eq!(o.count(), out.queries());
        }
    }

    #[test]
    fn query_set_ignores_b_values() {
        let a = gaussianish(3000, 3, 8);
        let b1: Vec<f64> = (0..3000).map(|i| (i as f64).sin()).collect();
        let b2: Vec<f64> = (0..3000).map(|i| if i % 17 == 0 { 1e5 } else { 0.0 }).collect();
        let cfg = ActiveConfig {
            budget: BudgetConstants { c: 0.05 },
            ..ActiveConfig::default()
        };
        let r1 = no_assumptions_lp(&a, &Plain(&b1), 1.5, 0.5, 0.1, &cfg, &RngStream::new(9)).unwrap();
        let r2 = no_assumptions_lp(&a, &Plain(&b2), 1.5, 0.5, 0.1, &cfg, &RngStream::new(9)).unwrap();
        assert_eq!(r1.queried, r2.queried);
        assert!(r1.queries() <= r1.budget.unwrap());
    }

    #[test]
    fn budget_split_fits() {
        for m in [1, 5, 40, 333, 10_000] {
            for trials in [1, 7, 20] {
                let (t, cf, rel) = split_budget(m, trials, 0.25, 4);
                assert!(t >= 1 && t <= trials);
                assert!(t * (cf + rel) <= m.max(1), "{m} {trials}");
            }
        }
    }

    #[test]
    fn high_prob_degenerates_to_one_trial() {
        let cfg = ActiveConfig::default();
        assert_eq!(cfg.trials(0.9), 1);
        let a = gaussianish(500, 2, 10);
        let b: Vec<f64> = (0..500).map(|i| (i as f64).cos()).collect();
        let out = high_prob_relative_lp_on(
            &a,
            &Plain(&b),
            2.0,
            100,
            0.9,
            &RowCopies::identity(500),
            &cfg,
            &RngStream::new(1),
        )
        .unwrap();
        assert_eq!(out.trials, 1);
        assert!(out.queries() <= 100);
    }
}
