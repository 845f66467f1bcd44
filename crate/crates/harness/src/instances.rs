//! Instance generators, including the hard instances behind the query lower
//! bounds.

use als_core::{DenseMatrix, Error, Result, RngStream};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Rejection attempts allowed when building a code.
pub const CODING_MAX_TRIES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InstanceKind {
    /// `A = 1_n` with `n = 100⌈ε⁻²⌉` and `bᵢ ~ Bernoulli(1/2 ± ε)`.
    Bernoulli { eps: f64, positive: bool },
    /// `count` random sign vectors of length `d` with pairwise
    /// `|⟨s,t⟩| ≤ c√d`; `b = d·e_I`.
    Coding { d: usize, count: usize, c: f64 },
    /// `A = 1_n`, `b = e_I`.
    Delta { n: usize },
    /// `d` disjoint blocks, each holding `2^i` entries `τ/2^i` for
    /// `i = 1, 2, …`; `b = A·1`.
    SpikedTukey { n: usize, d: usize, tau: f64 },
    /// Gaussian `A`, `b = Ax* + noise` with a fraction of entries shifted
    /// by `±scale`.
    GaussianOutlier {
        n: usize,
        d: usize,
        frac: f64,
        scale: f64,
        noise: f64,
    },
    /// Gaussian rows, each repeated `copies` times.
    Duplicated { n: usize, d: usize, copies: usize },
}

/// A generated problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    /// Planted coefficients, when the kind has them.
    pub x_star: Option<Vec<f64>>,
    /// Planted index `I` of the delta and coding kinds.
    pub planted: Option<usize>,
    /// Largest `|⟨s,t⟩|` between distinct code words.
    pub max_inner: Option<f64>,
}

impl Instance {
    fn plain(a: DenseMatrix, b: Vec<f64>) -> Self {
        Self {
            a,
            b,
            x_star: None,
            planted: None,
            max_inner: None,
        }
    }
}

fn ones(n: usize) -> DenseMatrix {
    DenseMatrix::new(n, 1, vec![1.0; n]).expect("finite")
}

fn gaussian_matrix<R: Rng>(n: usize, d: usize, rng: &mut R) -> DenseMatrix {
    DenseMatrix::from_fn(n, d, |_, _| StandardNormal.sample(rng))
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: v,
            reason: "must be positive",
        })
    }
}

fn nonzero(name: &'static str, v: usize) -> Result<()> {
    positive(name, v as f64)
}

/// Builds an instance; deterministic in `stream`.
pub fn gen_instance(kind: &InstanceKind, stream: &RngStream) -> Result<Instance> {
    let mut rng = stream.rng();
    match *kind {
        InstanceKind::Bernoulli { eps, positive: up } => {
            if !(eps > 0.0 && eps < 0.5) {
                return Err(Error::InvalidParameter {
                    name: "eps",
                    value: eps,
                    reason: "must lie in (0, 1/2)",
                });
            }
            let n = 100 * (1.0 / (eps * eps)).ceil() as usize;
            let bias = if up { 0.5 + eps } else { 0.5 - eps };
            let b = (0..n)
                .map(|_| f64::from(u8::from(rng.random::<f64>() < bias)))
                .collect();
            Ok(Instance::plain(ones(n), b))
        }
        InstanceKind::Coding { d, count, c } => {
            nonzero("d", d)?;
            nonzero("count", count)?;
            positive("c", c)?;
            let limit = c * (d as f64).sqrt();
            let mut words: Vec<Vec<f64>> = Vec::with_capacity(count);
            let mut tries = 0usize;
            let mut max_inner = 0.0f64;
            while words.len() < count {
                tries += 1;
                if tries > CODING_MAX_TRIES {
                    return Err(Error::Generation(format!(
                        "no {count} sign vectors of length {d} with pairwise |<s,t>| <= {limit:.3} after {CODING_MAX_TRIES} tries; \
                         found {}, try a smaller count",
                        words.len()
                    )));
                }
                let s: Vec<f64> = (0..d).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
                let worst = words
                    .iter()
                    .map(|t| t.iter().zip(&s).map(|(u, v)| u * v).sum::<f64>().abs())
                    .fold(0.0, f64::max);
                if worst <= limit {
                    max_inner = max_inner.max(worst);
                    words.push(s);
                }
            }
            let planted = rng.random_range(0..count);
            let mut b = vec![0.0; count];
            b[planted] = d as f64;
            Ok(Instance {
                a: DenseMatrix::from_rows(&words)?,
                b,
                x_star: None,
                planted: Some(planted),
                max_inner: Some(max_inner),
            })
        }
        InstanceKind::Delta { n } => {
            nonzero("n", n)?;
            let planted = rng.random_range(0..n);
            let mut b = vec![0.0; n];
            b[planted] = 1.0;
            Ok(Instance {
                planted: Some(planted),
                ..Instance::plain(ones(n), b)
            })
        }
        InstanceKind::SpikedTukey { n, d, tau } => {
            nonzero("d", d)?;
            positive("tau", tau)?;
            if n < 2 * d {
                return Err(Error::InvalidParameter {
                    name: "n",
                    value: n as f64,
                    reason: "needs at least two rows per block",
                });
            }
            let block = n / d;
            let a = DenseMatrix::from_fn(n, d, |i, j| {
                if (i / block).min(d - 1) != j {
                    return 0.0;
                }
                let k = i - j * block;
                let level = (k as f64 + 2.0).log2().floor();
                tau / level.exp2()
            });
            let b = a.matvec(&vec![1.0; d]);
            Ok(Instance::plain(a, b))
        }
        InstanceKind::GaussianOutlier {
            n,
            d,
            frac,
            scale,
            noise,
        } => {
            nonzero("n", n)?;
            nonzero("d", d)?;
            let a = gaussian_matrix(n, d, &mut rng);
            let x: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let mut b = a.matvec(&x);
            for v in b.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v += noise * z;
                if rng.random::<f64>() < frac {
                    *v += if rng.random::<bool>() { scale } else { -scale };
                }
            }
            Ok(Instance {
                x_star: Some(x),
                ..Instance::plain(a, b)
            })
        }
        InstanceKind::Duplicated { n, d, copies } => {
            nonzero("n", n)?;
            nonzero("copies", copies)?;
            let base = gaussian_matrix(n.div_ceil(copies), d, &mut rng);
            let a = DenseMatrix::from_fn(n, d, |i, j| base.get(i / copies, j));
            let b = a.matvec(&vec![1.0; d]);
            Ok(Instance::plain(a, b))
        }
    }
}
