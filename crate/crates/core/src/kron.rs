//! ℓp regression against a Kronecker product `A₁ ⊗ … ⊗ A_q` without forming
//! it. Lewis weights of the product are products of factor Lewis weights, so
//! a row can be drawn factor by factor from per-factor alias tables.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::lewis::{lewis_weights, LewisWeights};
use crate::lp_active::{budget, BudgetConstants};
use crate::matrix::DenseMatrix;
use crate::oracle::Labels;
use crate::rng::RngStream;
use crate::solvers::{solve_weighted_lp, SolveOptions, SolveResult};

/// Walker/Vose alias table for O(1) draws from a finite distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<usize>,
    /// Normalized input distribution.
    pub p: Vec<f64>,
}

impl AliasTable {
    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    /// Probability that [`alias_draw`] returns `i`, reconstructed from the
    /// table itself.
    pub fn induced(&self, i: usize) -> f64 {
        let n = self.len() as f64;
        let mut v = self.prob[i] / n;
        for (j, &a) in self.alias.iter().enumerate() {
            if a == i && j != i {
                v += (1.0 - self.prob[j]) / n;
            }
        }
        v
    }
}

/// Builds an alias table in linear time.
pub fn alias_build(probs: &[f64]) -> Result<AliasTable> {
    if probs.is_empty() {
        return Err(Error::Empty("alias probabilities"));
    }
    for &v in probs {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(invalid("probability", v, "must be finite and nonnegative"));
        }
    }
    let total: f64 = probs.iter().sum();
    if !(total > 0.0) {
        return Err(invalid("probability sum", total, "must be positive"));
    }
    let n = probs.len();
    let p: Vec<f64> = probs.iter().map(|v| v / total).collect();
    let mut scaled: Vec<f64> = p.iter().map(|v| v * n as f64).collect();
    let mut prob = vec![1.0; n];
    let mut alias: Vec<usize> = (0..n).collect();
    let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| scaled[i] < 1.0);
    while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
        prob[s] = scaled[s];
        alias[s] = l;
        scaled[l] -= 1.0 - scaled[s];
        if scaled[l] < 1.0 {
            large.pop();
            small.push(l);
        }
    }
    for i in large.into_iter().chain(small) {
        prob[i] = 1.0;
    }
    Ok(AliasTable { prob, alias, p })
}

/// One draw from the table.
pub fn alias_draw<R: Rng + ?Sized>(t: &AliasTable, rng: &mut R) -> usize {
    let i = rng.random_range(0..t.len());
    if rng.random::<f64>() < t.prob[i] {
        i
    } else {
        t.alias[i]
    }
}

/// Per-factor Lewis weights; the product over a multi-index is the Lewis
/// weight of the corresponding row of the Kronecker product.
pub fn kron_lewis_weights(factors: &[DenseMatrix], p: f64, tol: f64, max_iter: usize) -> Result<Vec<LewisWeights>> {
    if factors.is_empty() {
        return Err(Error::Empty("Kronecker factors"));
    }
    factors.iter().map(|f| lewis_weights(f, p, tol, max_iter)).collect()
}

/// Row-major flat index of a multi-index.
pub fn flat_index(dims: &[usize], idx: &[usize]) -> usize {
    idx.iter().zip(dims).fold(0, |acc, (&i, &n)| acc * n + i)
}

/// Multi-index of a row-major flat index.
pub fn multi_index(dims: &[usize], mut flat: usize) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for (k, &n) in dims.iter().enumerate().rev() {
        out[k] = flat % n;
        flat /= n;
    }
    out
}

/// Row `(i₁, …, i_q)` of the product, computed from the factor rows.
pub fn kron_row(factors: &[DenseMatrix], idx: &[usize]) -> Vec<f64> {
    let mut row = vec![1.0];
    for (f, &i) in factors.iter().zip(idx) {
        let r = f.row(i);
        let mut next = Vec::with_capacity(row.len() * r.len());
        for &u in &row {
            next.extend(r.iter().map(|v| u * v));
        }
        row = next;
    }
    row
}

/// A regression problem against a Kronecker product; `b` is addressed by
/// the row-major flat index.
pub struct KronProblem<'a> {
    pub factors: Vec<DenseMatrix>,
    pub labels: &'a dyn Labels,
    pub p: f64,
}

impl KronProblem<'_> {
    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.nrows()).collect()
    }

    pub fn nrows(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn ncols(&self) -> usize {
        self.factors.iter().map(|f| f.ncols()).product()
    }
}

/// Knobs of [`kron_regress`].
#[derive(Debug, Clone, PartialEq)]
pub struct KronConfig {
    pub budget: BudgetConstants,
    /// Explicit number of draws, overriding the budget formula.
    pub draws: Option<usize>,
    pub lewis_tol: f64,
    pub lewis_max_iter: usize,
    pub solve: SolveOptions,
}

impl Default for KronConfig {
    fn default() -> Self {
        Self {
            budget: BudgetConstants::default(),
            draws: None,
            lewis_tol: 1e-8,
            lewis_max_iter: 200,
            solve: SolveOptions::default(),
        }
    }
}

/// Outcome of [`kron_regress`].
#[derive(Debug, Clone, PartialEq)]
pub struct KronResult {
    pub solve: SolveResult,
    /// Sorted distinct flat indices of `b` that were read.
    pub queried: Vec<usize>,
    /// Number of with-replacement draws.
    pub draws: usize,
}

impl KronResult {
    pub fn queries(&self) -> usize {
        self.queried.len()
    }
}

/// Draws `m` multi-indices with replacement, each factor independently in
/// proportion to its Lewis weights. Returns sorted distinct flat indices and
/// their summed importance weights `1/(m π)`.
pub fn kron_sample(
    factors: &[DenseMatrix],
    p: f64,
    m: usize,
    cfg: &KronConfig,
    stream: &RngStream,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let dims: Vec<usize> = factors.iter().map(|f| f.nrows()).collect();
    let lw = kron_lewis_weights(factors, p, cfg.lewis_tol, cfg.lewis_max_iter)?;
    let tables = lw.iter().map(|l| alias_build(&l.w)).collect::<Result<Vec<_>>>()?;
    let mut rng = stream.rng();
    let mut hits: Vec<(usize, f64)> = Vec::with_capacity(m);
    for _ in 0..m {
        let idx: Vec<usize> = tables.iter().map(|t| alias_draw(t, &mut rng)).collect();
        let pi: f64 = idx.iter().zip(&tables).map(|(&i, t)| t.p[i]).product();
        hits.push((flat_index(&dims, &idx), 1.0 / (m as f64 * pi)));
    }
    hits.sort_unstable_by_key(|h| h.0);
    let mut flat: Vec<usize> = Vec::new();
    let mut w: Vec<f64> = Vec::new();
    for (i, v) in hits {
        if flat.last() == Some(&i) {
            *w.last_mut().expect("nonempty") += v;
        } else {
            flat.push(i);
            w.push(v);
        }
    }
    Ok((flat, w))
}

/// Samples with [`kron_sample`] and solves the importance-weighted problem,
/// reading `b` only on the sampled rows.
pub fn kron_regress(
    problem: &KronProblem,
    eps: f64,
    delta: f64,
    cfg: &KronConfig,
    stream: &RngStream,
) -> Result<KronResult> {
    let dims = problem.dims();
    let n = problem.nrows();
    if problem.labels.n() != n {
        return Err(Error::Dimension {
            expected: n,
            found: problem.labels.n(),
        });
    }
    let m = match cfg.draws {
        Some(m) => m,
        None => budget(problem.p, problem.ncols(), n, eps, delta, &cfg.budget)?.m,
    };
    let (flat, w) = kron_sample(&problem.factors, problem.p, m, cfg, stream)?;
    let d = problem.ncols();
    let mut data = Vec::with_capacity(flat.len() * d);
    for &i in &flat {
        data.extend(kron_row(&problem.factors, &multi_index(&dims, i)));
    }
    let a = DenseMatrix::new(flat.len(), d, data)?;
    let b: Vec<f64> = flat.iter().map(|&i| problem.labels.get(i)).collect();
    let solve = solve_weighted_lp(&a, &b, Some(&w), problem.p, &cfg.solve);
    Ok(KronResult {
        solve,
        queried: flat,
        draws: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lewis::leverage_scores;
    use crate::oracle::TargetOracle;

    fn factor(n: usize, d: usize, seed: u64) -> DenseMatrix {
        let mut rng = RngStream::new(seed).rng();
        DenseMatrix::from_fn(n, d, |_, _| rng.random::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn alias_reconstructs_distribution() {
        let probs = [0.1, 0.4, 0.0, 0.25, 0.25];
        let t = alias_build(&probs).unwrap();
        for (i, &p) in probs.iter().enumerate() {
            assert!((t.induced(i) - p).abs() < 1e-12);
        }
        let t = alias_build(&[0.5, 0.5, 0.0, 0.0]).unwrap();
        let mut rng = RngStream::new(3).rng();
        assert!((0..10_000).all(|_| alias_draw(&t, &mut rng) < 2));
        assert!(alias_build(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn index_round_trip() {
        let dims = [3, 5, 2];
        for f in 0..30 {
            assert_eq!(flat_index(&dims, &multi_index(&dims, f)), f);
        }
    }

    #[test]
    fn kron_row_matches_materialized() {
        let (a, b) = (factor(4, 2, 1), factor(3, 3, 2));
        let k = a.kron(&b);
        for i in 0..12 {
            assert_eq!(kron_row(&[a.clone(), b.clone()], &multi_index(&[4, 3], i)), k.row(i));
        }
    }

    #[test]
    fn product_of_identities() {
        let lw = kron_lewis_weights(&[DenseMatrix::identity(3), DenseMatrix::identity(2)], 1.5, 1e-10, 100).unwrap();
        assert!(lw.iter().all(|l| l.w.iter().all(|&v| (v - 1.0).abs() < 1e-12)));
    }

    #[test]
    fn leverage_product_identity() {
        let (a, b) = (factor(8, 3, 5), factor(6, 2, 6));
        let (la, lb) = (leverage_scores(&a), leverage_scores(&b));
        let lk = leverage_scores(&a.kron(&b));
        for i in 0..8 {
            for j in 0..6 {
                assert!((la[i] * lb[j] - lk[i * 6 + j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn consistent_system_recovered() {
        let fs = [factor(20, 2, 7), factor(16, 2, 8)];
        let k = fs[0].kron(&fs[1]);
        let xs = [1.0, -1.0, 0.5, 2.0];
        let b = k.matvec(&xs);
        let o = TargetOracle::from_slice(&b);
        let pr = KronProblem {
            factors: fs.to_vec(),
            labels: &o,
            p: 1.5,
        };
        let cfg = KronConfig {
            draws: Some(60),
            ..KronConfig::default()
        };
        let r = kron_regress(&pr, 0.3, 0.1, &cfg, &RngStream::new(1)).unwrap();
        for (u, v) in r.solve.x.iter().zip(&xs) {
            assert!((u - v).abs() < 1e-6);
        }
        assert_eq!(o.count(), r.queries());
        assert!(r.queries() <= 60);
    }
}
