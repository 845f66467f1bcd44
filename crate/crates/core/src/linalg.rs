//! Column-pivoted Householder QR, leverage scores and small dense solves.
//!
//! The factorization works on tall problems of any rank. Columns whose
//! remaining norm falls below `RANK_TOL · |R₀₀|` are treated as dependent, so
//! pseudo-inverse quantities (leverage scores, basic least-squares solutions)
//! are well defined without a full-rank assumption.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 methods shadow these when std is linked
use num_traits::Float;

use crate::matrix::DenseMatrix;

/// Relative pivot threshold used for rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Householder QR with column pivoting, `A P = Q R`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    m: usize,
    d: usize,
    /// Column-major working storage: `R` on and above the diagonal,
    /// Householder tails below it.
    cols: Vec<f64>,
    /// Leading entry of each Householder vector.
    v0: Vec<f64>,
    beta: Vec<f64>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    /// Factorizes an `m × d` row-major block.
    pub fn new(m: usize, d: usize, row_major: &[f64]) -> Self {
        assert_eq!(row_major.len(), m * d);
        let mut cols = vec![0.0; m * d];
        for i in 0..m {
            for j in 0..d {
                cols[j * m + i] = row_major[i * d + j];
            }
        }
        let mut perm: Vec<usize> = (0..d).collect();
        let steps = m.min(d);
        let mut v0 = Vec::with_capacity(steps);
        let mut beta = Vec::with_capacity(steps);
        let mut rank = 0;
        let mut r00 = 0.0;

        for k in 0..steps {
            let mut best = k;
            let mut best_norm = -1.0;
            for j in k..d {
                let c = &cols[j * m + k..(j + 1) * m];
                let s: f64 = c.iter().map(|v| v * v).sum();
                if s > best_norm {
                    best_norm = s;
                    best = j;
                }
            }
            if best != k {
                for i in 0..m {
                    cols.swap(k * m + i, best * m + i);
                }
                perm.swap(k, best);
            }
            let alpha = best_norm.sqrt();
            if k == 0 {
                r00 = alpha;
            }
            if alpha == 0.0 || alpha <= RANK_TOL * r00 {
                break;
            }
            let x0 = cols[k * m + k];
            let s = if x0 >= 0.0 { -alpha } else { alpha };
            let lead = x0 - s;
            let tail_sq: f64 = cols[k * m + k + 1..(k + 1) * m].iter().map(|v| v * v).sum();
            let vtv = lead * lead + tail_sq;
            let b = if vtv > 0.0 { 2.0 / vtv } else { 0.0 };
            for j in k + 1..d {
                let (left, right) = cols.split_at_mut(j * m);
                let hv = &left[k * m + k + 1..(k + 1) * m];
                let cj = &mut right[k..m];
                let mut t = lead * cj[0];
                for (a, c) in hv.iter().zip(&cj[1..]) {
                    t += a * c;
                }
                t *= b;
                cj[0] -= t * lead;
                for (a, c) in hv.iter().zip(cj[1..].iter_mut()) {
                    *c -= t * a;
                }
            }
            cols[k * m + k] = s;
            v0.push(lead);
            beta.push(b);
            rank = k + 1;
        }
        Self {
            m,
            d,
            cols,
            v0,
            beta,
            perm,
            rank,
        }
    }

    pub fn from_matrix(a: &DenseMatrix) -> Self {
        Self::new(a.nrows(), a.ncols(), a.data())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Entry `R[i][j]` of the triangular factor (columns in pivoted order).
    pub fn r(&self, i: usize, j: usize) -> f64 {
        if i > j {
            0.0
        } else {
            self.cols[j * self.m + i]
        }
    }

    fn apply_reflector(&self, k: usize, y: &mut [f64]) {
        let m = self.m;
        let tail = &self.cols[k * m + k + 1..(k + 1) * m];
        let lead = self.v0[k];
        let mut t = lead * y[k];
        for (a, c) in tail.iter().zip(&y[k + 1..]) {
            t += a * c;
        }
        t *= self.beta[k];
        y[k] -= t * lead;
        for (a, c) in tail.iter().zip(y[k + 1..].iter_mut()) {
            *c -= t * a;
        }
    }

    /// `Qᵀ y` in place.
    pub fn apply_qt(&self, y: &mut [f64]) {
        assert_eq!(y.len(), self.m);
        for k in 0..self.rank {
            self.apply_reflector(k, y);
        }
    }

    /// Thin orthonormal basis of the column span, row-major `m × rank`.
    pub fn thin_q(&self) -> Vec<f64> {
        let (m, r) = (self.m, self.rank);
        let mut q = vec![0.0; m * r];
        let mut col = vec![0.0; m];
        for j in 0..r {
            col.iter_mut().for_each(|v| *v = 0.0);
            col[j] = 1.0;
            for k in (0..r).rev() {
                self.apply_reflector(k, &mut col);
            }
            for i in 0..m {
                q[i * r + j] = col[i];
            }
        }
        q
    }

    /// Squared row norms of the thin `Q`, i.e. the leverage scores.
    pub fn leverage_scores(&self) -> Vec<f64> {
        let r = self.rank;
        if r == 0 {
            return vec![0.0; self.m];
        }
        self.thin_q()
            .chunks_exact(r)
            .map(|row| row.iter().map(|v| v * v).sum::<f64>().min(1.0))
            .collect()
    }

    /// Basic least-squares solution of `min ‖A x − b‖₂`; dependent columns get 0.
    pub fn solve_lstsq(&self, b: &[f64]) -> Vec<f64> {
        let mut y = b.to_vec();
        self.apply_qt(&mut y);
        let r = self.rank;
        let mut z = vec![0.0; r];
        for i in (0..r).rev() {
            let mut s = y[i];
            for j in i + 1..r {
                s -= self.r(i, j) * z[j];
            }
            z[i] = s / self.r(i, i);
        }
        let mut x = vec![0.0; self.d];
        for (k, zk) in z.into_iter().enumerate() {
            x[self.perm[k]] = zk;
        }
        x
    }
}

/// Leverage scores of the rows of an `m × d` row-major block.
pub fn leverage_scores_raw(m: usize, d: usize, data: &[f64]) -> (Vec<f64>, usize) {
    let qr = PivotedQr::new(m, d, data);
    (qr.leverage_scores(), qr.rank())
}

/// Numerical rank of `A`.
pub fn rank(a: &DenseMatrix) -> usize {
    PivotedQr::from_matrix(a).rank()
}

/// Solves `min Σ wᵢ (aᵢᵀx − bᵢ)²` for `w ≥ 0`.
pub fn weighted_lstsq(a: &DenseMatrix, b: &[f64], w: &[f64]) -> Vec<f64> {
    let (n, d) = (a.nrows(), a.ncols());
    assert_eq!(b.len(), n);
    assert_eq!(w.len(), n);
    let mut data = Vec::with_capacity(n * d);
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        let s = w[i].max(0.0).sqrt();
        data.extend(a.row(i).iter().map(|v| v * s));
        rhs.push(b[i] * s);
    }
    PivotedQr::new(n, d, &data).solve_lstsq(&rhs)
}

/// Solves the symmetric positive semidefinite system `H x = g` by Cholesky,
/// adding diagonal jitter until the factorization succeeds.
pub fn solve_psd(h: &[f64], d: usize, g: &[f64]) -> Vec<f64> {
    let scale = (0..d).map(|i| h[i * d + i].abs()).fold(0.0, f64::max).max(1e-300);
    let mut jitter = 0.0;
    loop {
        if let Some(x) = cholesky_solve(h, d, g, jitter) {
            return x;
        }
        jitter = if jitter == 0.0 { scale * 1e-14 } else { jitter * 100.0 };
    }
}

fn cholesky_solve(h: &[f64], d: usize, g: &[f64], jitter: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = h[i * d + j];
            if i == j {
                s += jitter;
            }
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    let mut y = vec![0.0; d];
    for i in 0..d {
        let mut s = g[i];
        for k in 0..i {
            s -= l[i * d + k] * y[k];
        }
        y[i] = s / l[i * d + i];
    }
    let mut x = vec![0.0; d];
    for i in (0..d).rev() {
        let mut s = y[i];
        for k in i + 1..d {
            s -= l[k * d + i] * x[k];
        }
        x[i] = s / l[i * d + i];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::dot;

    fn gram_inverse_quadratic(a: &DenseMatrix) -> Vec<f64> {
        // Dense normal-equations oracle for full-rank A.
        let d = a.ncols();
        let mut h = vec![0.0; d * d];
        for r in a.rows() {
            for i in 0..d {
                for j in 0..d {
                    h[i * d + j] += r[i] * r[j];
                }
            }
        }
        a.rows().map(|r| dot(r, &solve_psd(&h, d, r))).collect()
    }

    #[test]
    fn leverage_of_three_by_two() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let lev = PivotedQr::from_matrix(&a).leverage_scores();
        for v in lev {
            assert!((v - 2.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn leverage_matches_normal_equations() {
        let a = DenseMatrix::from_fn(9, 3, |i, j| ((i * 7 + j * 13) % 11) as f64 - 4.5 + 0.1 * j as f64);
        let lev = PivotedQr::from_matrix(&a).leverage_scores();
        let oracle = gram_inverse_quadratic(&a);
        for (x, y) in lev.iter().zip(&oracle) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn detects_rank_deficiency() {
        let a = DenseMatrix::from_fn(6, 3, |i, j| match j {
            0 => i as f64,
            1 => 1.0,
            _ => 2.0 * i as f64 - 3.0,
        });
        let qr = PivotedQr::from_matrix(&a);
        assert_eq!(qr.rank(), 2);
        let s: f64 = qr.leverage_scores().iter().sum();
        assert!((s - 2.0).abs() < 1e-10);
    }

    #[test]
    fn lstsq_recovers_consistent_solution() {
        let a = DenseMatrix::from_fn(7, 3, |i, j| ((i + 1) as f64).powi(j as i32));
        let x = [0.5, -1.0, 2.0];
        let b = a.matvec(&x);
        let sol = PivotedQr::from_matrix(&a).solve_lstsq(&b);
        for (s, t) in sol.iter().zip(&x) {
            assert!((s - t).abs() < 1e-9);
        }
    }

    #[test]
    fn weighted_lstsq_is_weighted_mean_in_one_dim() {
        let a = DenseMatrix::from_fn(3, 1, |_, _| 1.0);
        let x = weighted_lstsq(&a, &[1.0, 2.0, 4.0], &[1.0, 1.0, 2.0]);
        assert!((x[0] - 11.0 / 4.0).abs() < 1e-14);
    }
}
