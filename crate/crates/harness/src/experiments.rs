//! Experiment drivers. Each pipeline runs once per seed, in parallel, and
//! produces one [`TrialRecord`] per seed (or per size, for `sens`).

use std::path::PathBuf;
use std::time::Instant;

use als_core::diagnostics::{distortion_probe, m_distortion, ProbeConfig};
use als_core::huber::{huber_active, HuberConfig};
use als_core::kron::{alias_build, alias_draw, kron_regress, KronConfig, KronProblem};
use als_core::lewis::{lewis_weights, lp_subspace_embedding, EmbedConfig, RowCopies};
use als_core::lp_active::{
    budget, high_prob_relative_lp, high_prob_relative_lp_on, no_assumptions_lp, recursive_relative_lp, ActiveConfig,
    BudgetConstants,
};
use als_core::m_active::{m_relative_active, tukey_relative_active, MActiveConfig};
use als_core::orlicz::{orlicz_norm, orlicz_subspace_embedding, OrliczConfig};
use als_core::sensitivity::{m_sensitivities, SensConfig};
use als_core::solvers::{objective, solve_weighted_mloss, SolveOptions};
use als_core::{loss_catalog, DenseMatrix, Labels, LossDescriptor, RngStream, TargetOracle, WeightVector};
use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::instances::{gen_instance, Instance, InstanceKind};
use crate::io::{read_matrix, MatrixFormat};
use crate::report::{ExperimentReport, Summary, TrialRecord, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct LewisArgs {
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 20)]
    pub d: usize,
    #[arg(long, default_value_t = 1.5)]
    pub p: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EmbedArgs {
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub d: usize,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Rows scaled up by 100.
    #[arg(long, default_value_t = 5)]
    pub spikes: usize,
    #[arg(long, default_value_t = 4.0)]
    pub c_se: f64,
    #[arg(long, default_value_t = 10_000)]
    pub directions: usize,
    #[arg(long, default_value_t = 50)]
    pub refined: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OutlierArgs {
    #[arg(long, default_value_t = 20_000)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub d: usize,
    /// Fraction of entries of `b` shifted by `±outlier_scale`.
    #[arg(long, default_value_t = 0.02)]
    pub outliers: f64,
    #[arg(long, default_value_t = 1e4)]
    pub outlier_scale: f64,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
}

impl OutlierArgs {
    fn kind(&self) -> InstanceKind {
        InstanceKind::GaussianOutlier {
            n: self.n,
            d: self.d,
            frac: self.outliers,
            scale: self.outlier_scale,
            noise: self.noise,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RegressLpArgs {
    #[command(flatten)]
    pub data: OutlierArgs,
    #[arg(long, default_value_t = 1.5)]
    pub p: f64,
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Leading constant of the query budget.
    #[arg(long, default_value_t = 8.0)]
    pub budget_c: f64,
    /// Fixed budget overriding the formula; runs the single-trial sampler.
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RegressMArgs {
    #[command(flatten)]
    pub data: OutlierArgs,
    #[arg(long, default_value = "huber")]
    pub loss: String,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub params: Vec<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 4.0)]
    pub c_cf: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RegressHuberArgs {
    #[command(flatten)]
    pub data: OutlierArgs,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c_m: f64,
    #[arg(long, default_value_t = 2.0)]
    pub kappa_m: f64,
    #[arg(long, default_value_t = 10.0)]
    pub c_h: f64,
    #[arg(long, default_value_t = 4.0)]
    pub kappa_h: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RegressTukeyArgs {
    #[command(flatten)]
    pub data: OutlierArgs,
    #[arg(long, default_value_t = 2.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 4.0)]
    pub c_cf: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct KronArgs {
    /// Rows of each factor.
    #[arg(long, value_delimiter = ',', default_value = "64,64")]
    pub rows: Vec<usize>,
    /// Columns of each factor.
    #[arg(long, value_delimiter = ',', default_value = "4,4")]
    pub cols: Vec<usize>,
    #[arg(long, default_value_t = 1.5)]
    pub p: f64,
    #[arg(long, default_value_t = 0.3)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 8.0)]
    pub budget_c: f64,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    /// Factor matrix files, replacing the Gaussian factors.
    #[arg(long, value_delimiter = ',')]
    pub factors: Vec<PathBuf>,
    /// Flat row-major `b` as an `n×1` matrix file, replacing the planted
    /// generator.
    #[arg(long)]
    pub b: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OrliczArgs {
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 8)]
    pub d: usize,
    /// Knee of the Huber gauge `G`.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c_rows: f64,
    #[arg(long, default_value_t = 2000)]
    pub directions: usize,
    #[arg(long, default_value_t = 20)]
    pub refined: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Gaussian,
    Duplicated,
    SpikedTukey,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SensArgs {
    #[arg(long, value_enum, default_value_t = Family::SpikedTukey)]
    pub family: Family,
    #[arg(long, default_value = "huber")]
    pub loss: String,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub params: Vec<f64>,
    /// Sensitivity floor parameter; also the spike height of the spiked
    /// family.
    #[arg(long, default_value_t = 16.0)]
    pub tau: f64,
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000,8000")]
    pub ns: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    #[arg(long, default_value_t = 2.0)]
    pub c_rep: f64,
    #[arg(long, default_value_t = false)]
    pub single_hash: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HardKind {
    Delta,
    Bernoulli,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct HardnessArgs {
    #[arg(long, value_enum, default_value_t = HardKind::Delta)]
    pub kind: HardKind,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// Rows of the delta instance.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Query budget shared by both samplers.
    #[arg(long, default_value_t = 5)]
    pub m: usize,
    /// Bias of the Bernoulli instance.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.02)]
    pub budget_c: f64,
}

/// A pipeline and its parameters.
#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "pipeline", rename_all = "kebab-case")]
pub enum Pipeline {
    /// Lewis weights of a Gaussian matrix.
    Lewis(LewisArgs),
    /// ℓp subspace embedding and its measured distortion.
    Embed(EmbedArgs),
    /// Active ℓp regression against a full solve.
    RegressLp(RegressLpArgs),
    /// Active regression for a catalog M-estimator.
    RegressM(RegressMArgs),
    /// Active Huber regression.
    RegressHuber(RegressHuberArgs),
    /// Active ℓp-Tukey regression.
    RegressTukey(RegressTukeyArgs),
    /// ℓp regression against a Kronecker product.
    Kron(KronArgs),
    /// Orlicz-norm embedding and its measured distortion.
    Orlicz(OrliczArgs),
    /// Sensitivity sums across sizes.
    Sens(SensArgs),
    /// Naive versus boosted sampling on a hard instance.
    Hardness(HardnessArgs),
}

impl Pipeline {
    pub fn name(&self) -> &'static str {
        match self {
            Pipeline::Lewis(_) => "lewis",
            Pipeline::Embed(_) => "embed",
            Pipeline::RegressLp(_) => "regress-lp",
            Pipeline::RegressM(_) => "regress-m",
            Pipeline::RegressHuber(_) => "regress-huber",
            Pipeline::RegressTukey(_) => "regress-tukey",
            Pipeline::Kron(_) => "kron",
            Pipeline::Orlicz(_) => "orlicz",
            Pipeline::Sens(_) => "sens",
            Pipeline::Hardness(_) => "hardness",
        }
    }
}

/// A pipeline, the seeds to run it on, and the largest `n·d` for which a
/// full-solve baseline is computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub pipeline: Pipeline,
    pub seeds: Vec<u64>,
    pub baseline_limit: usize,
}

impl ExperimentSpec {
    pub fn new(pipeline: Pipeline, seeds: usize) -> Self {
        Self {
            pipeline,
            seeds: (0..seeds as u64).collect(),
            baseline_limit: 5_000_000,
        }
    }
}

/// Worker count from `ALS_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("ALS_THREADS")
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
}

/// Runs every seed of `spec` and summarizes.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = thread_cap() {
        pool = pool.num_threads(t);
    }
    let pool = pool.build().context("building the worker pool")?;
    let baseline = fits_baseline(&spec.pipeline, spec.baseline_limit);
    let runs: Vec<Vec<TrialRecord>> = pool.install(|| {
        spec.seeds
            .par_iter()
            .map(|&seed| run_seed(&spec.pipeline, seed, baseline))
            .collect::<Result<_>>()
    })?;
    let trials: Vec<TrialRecord> = runs.into_iter().flatten().collect();
    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION,
        pipeline: spec.pipeline.name().to_string(),
        config: serde_json::to_value(spec)?,
        seeds: spec.seeds.clone(),
        baseline_omitted: !baseline,
        summary: Summary::of(&trials),
        trials,
    })
}

fn fits_baseline(p: &Pipeline, limit: usize) -> bool {
    let size = match p {
        Pipeline::RegressLp(a) => a.data.n * a.data.d,
        Pipeline::RegressM(a) => a.data.n * a.data.d,
        Pipeline::RegressHuber(a) => a.data.n * a.data.d,
        Pipeline::RegressTukey(a) => a.data.n * a.data.d,
        Pipeline::Kron(a) => a.rows.iter().product::<usize>() * a.cols.iter().product::<usize>(),
        _ => 0,
    };
    size <= limit
}

/// `(f(x̂)/f(x*))^{1/p_M}`, with `0/0` read as 1.
pub fn cost_ratio(a: &DenseMatrix, b: &[f64], loss: &LossDescriptor, x: &[f64], opt: f64) -> f64 {
    let f = objective(a, b, None, loss, x);
    if opt <= 0.0 {
        return if f <= 1e-12 { 1.0 } else { f64::INFINITY };
    }
    (f / opt).powf(1.0 / loss.p_m)
}

fn baseline(a: &DenseMatrix, b: &[f64], loss: &LossDescriptor) -> f64 {
    let opts = SolveOptions {
        tol: 1e-10,
        ..SolveOptions::default()
    };
    solve_weighted_mloss(a, b, None, loss, &opts).objective
}

/// Gaussian matrix with its first `spikes` rows scaled by 100.
pub fn spiked_gaussian(n: usize, d: usize, spikes: usize, stream: &RngStream) -> Result<DenseMatrix> {
    let kind = InstanceKind::GaussianOutlier {
        n,
        d,
        frac: 0.0,
        scale: 0.0,
        noise: 0.0,
    };
    let a = gen_instance(&kind, stream)?.a;
    Ok(DenseMatrix::from_fn(
        n,
        d,
        |i, j| if i < spikes { 100.0 } else { 1.0 } * a.get(i, j),
    ))
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let t = Instant::now();
    let v = f()?;
    Ok((v, t.elapsed().as_secs_f64() * 1e3))
}

fn record(seed: u64) -> TrialRecord {
    TrialRecord {
        seed,
        ..TrialRecord::default()
    }
}

fn run_seed(p: &Pipeline, seed: u64, with_baseline: bool) -> Result<Vec<TrialRecord>> {
    let s = RngStream::new(seed);
    let data = s.child(1);
    let algo = s.child(2);
    let mut r = record(seed);
    match p {
        Pipeline::Lewis(c) => {
            let a = gen_instance(
                &InstanceKind::GaussianOutlier {
                    n: c.n,
                    d: c.d,
                    frac: 0.0,
                    scale: 0.0,
                    noise: 0.0,
                },
                &data,
            )?
            .a;
            let (lw, ms) = timed(|| Ok(lewis_weights(&a, c.p, c.tol, c.max_iter)?))?;
            r.wall_ms = ms;
            r.extra.insert("residual".into(), lw.residual);
            r.extra.insert("sum_w".into(), lw.sum_w);
            r.extra.insert("iterations".into(), lw.iterations as f64);
            r.extra.insert("converged".into(), f64::from(u8::from(lw.converged)));
        }
        Pipeline::Embed(c) => {
            let a = spiked_gaussian(c.n, c.d, c.spikes, &data)?;
            let cfg = EmbedConfig {
                c_se: c.c_se,
                ..EmbedConfig::default()
            };
            let (e, ms) = timed(|| Ok(lp_subspace_embedding(&a, c.p, c.eps, c.delta, &cfg, &algo)?))?;
            let probe = ProbeConfig {
                random: c.directions,
                refined: c.refined,
                ..ProbeConfig::default()
            };
            let loss = LossDescriptor::lp(c.p)?;
            let dist = m_distortion(&a, &loss, &e.weights, 0, &probe, &s.child(3));
            r.wall_ms = ms;
            r.nnz = Some(e.weights.nnz());
            r.distortion = Some(dist.max);
            r.extra.insert("target".into(), e.target as f64);
        }
        Pipeline::RegressLp(c) => {
            let inst = gen_instance(&c.data.kind(), &data)?;
            let loss = LossDescriptor::lp(c.p)?;
            let cfg = ActiveConfig {
                budget: BudgetConstants { c: c.budget_c },
                ..ActiveConfig::default()
            };
            let oracle = TargetOracle::from_slice(&inst.b);
            let (res, ms) = timed(|| {
                Ok(match c.m {
                    Some(m) => recursive_relative_lp(&inst.a, &oracle, c.p, m, &cfg, &algo)?,
                    None => no_assumptions_lp(&inst.a, &oracle, c.p, c.eps, c.delta, &cfg, &algo)?,
                })
            })?;
            r.wall_ms = ms;
            r.queries = Some(oracle.count());
            r.budget = res.budget;
            if with_baseline {
                r.cost_ratio = Some(cost_ratio(
                    &inst.a,
                    &inst.b,
                    &loss,
                    &res.solve.x,
                    baseline(&inst.a, &inst.b, &loss),
                ));
            }
        }
        Pipeline::RegressM(c) => {
            let inst = gen_instance(&c.data.kind(), &data)?;
            let loss = loss_catalog(&c.loss, &c.params)?;
            let cfg = MActiveConfig {
                c_cf: c.c_cf,
                c_rel: c.c_rel,
                ..MActiveConfig::default()
            };
            let oracle = TargetOracle::from_slice(&inst.b);
            let (res, ms) = timed(|| Ok(m_relative_active(&inst.a, &oracle, &loss, c.eps, c.delta, &cfg, &algo)?))?;
            finish_m(&mut r, &inst, &loss, &res.solve.x, oracle.count(), ms, with_baseline);
        }
        Pipeline::RegressHuber(c) => {
            let inst = gen_instance(&c.data.kind(), &data)?;
            let cfg = HuberConfig {
                tau: c.tau,
                eps: c.eps,
                delta: c.delta,
                c_m: c.c_m,
                kappa_m: c.kappa_m,
                c_h: c.c_h,
                kappa_h: c.kappa_h,
                ..HuberConfig::default()
            };
            let loss = cfg.loss();
            let oracle = TargetOracle::from_slice(&inst.b);
            let (res, ms) = timed(|| Ok(huber_active(&inst.a, &oracle, &cfg, &algo)?))?;
            finish_m(&mut r, &inst, &loss, &res.solve.x, oracle.count(), ms, with_baseline);
            r.extra.insert("depth".into(), res.depth as f64);
        }
        Pipeline::RegressTukey(c) => {
            let inst = gen_instance(&c.data.kind(), &data)?;
            let loss = LossDescriptor::tukey_lp(c.tau, c.p)?;
            let cfg = MActiveConfig {
                c_cf: c.c_cf,
                c_rel: c.c_rel,
                ..MActiveConfig::default()
            };
            let oracle = TargetOracle::from_slice(&inst.b);
            let (res, ms) = timed(|| {
                Ok(tukey_relative_active(
                    &inst.a, &oracle, c.tau, c.p, c.eps, c.delta, &cfg, &algo,
                )?)
            })?;
            finish_m(&mut r, &inst, &loss, &res.solve.x, oracle.count(), ms, with_baseline);
        }
        Pipeline::Kron(c) => {
            let factors = kron_factors(c, &data)?;
            let whole = factors[1..].iter().fold(factors[0].clone(), |acc, f| acc.kron(f));
            let b = match &c.b {
                Some(path) => {
                    let m = read_matrix(path, MatrixFormat::from_path(path))?;
                    if m.ncols() != 1 || m.nrows() != whole.nrows() {
                        bail!(
                            "{}: expected a {}x1 matrix, found {}x{}",
                            path.display(),
                            whole.nrows(),
                            m.nrows(),
                            m.ncols()
                        );
                    }
                    m.data().to_vec()
                }
                None => {
                    let mut rng = data.child(99).rng();
                    let x: Vec<f64> = (0..whole.ncols()).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
                    whole
                        .matvec(&x)
                        .into_iter()
                        .map(|v| v + c.noise * (rng.random::<f64>() * 2.0 - 1.0))
                        .collect()
                }
            };
            let oracle = TargetOracle::from_slice(&b);
            let problem = KronProblem {
                factors,
                labels: &oracle,
                p: c.p,
            };
            let cfg = KronConfig {
                budget: BudgetConstants { c: c.budget_c },
                ..KronConfig::default()
            };
            let (res, ms) = timed(|| Ok(kron_regress(&problem, c.eps, c.delta, &cfg, &algo)?))?;
            r.wall_ms = ms;
            r.queries = Some(oracle.count());
            r.budget = Some(res.draws);
            if with_baseline {
                let loss = LossDescriptor::lp(c.p)?;
                r.cost_ratio = Some(cost_ratio(&whole, &b, &loss, &res.solve.x, baseline(&whole, &b, &loss)));
            }
        }
        Pipeline::Orlicz(c) => {
            let a = spiked_gaussian(c.n, c.d, 0, &data)?;
            let g = LossDescriptor::huber(c.tau)?;
            let cfg = OrliczConfig {
                c_rows: c.c_rows,
                ..OrliczConfig::default()
            };
            let (e, ms) = timed(|| Ok(orlicz_subspace_embedding(&a, &g, c.eps, &cfg, &algo)?))?;
            let ones = WeightVector::ones(c.n);
            let full = |x: &[f64]| orlicz_norm(&a.matvec(x), &g, &ones).expect("finite");
            let sketch = |x: &[f64]| orlicz_norm(&a.matvec(x), &g, &e.weights).expect("finite");
            let probe = ProbeConfig {
                random: c.directions,
                refined: c.refined,
                ..ProbeConfig::default()
            };
            let dist = distortion_probe(&full, &sketch, c.d, &probe, &s.child(3));
            r.wall_ms = ms;
            r.nnz = Some(e.weights.nnz());
            r.distortion = Some(dist.max);
        }
        Pipeline::Sens(c) => return sens_seed(c, seed),
        Pipeline::Hardness(c) => hardness_seed(c, seed, &mut r)?,
    }
    Ok(vec![r])
}

/// Factors from files, or Gaussian ones of the requested shapes.
pub fn kron_factors(c: &KronArgs, stream: &RngStream) -> Result<Vec<DenseMatrix>> {
    if !c.factors.is_empty() {
        return c
            .factors
            .iter()
            .map(|p| Ok(read_matrix(p, MatrixFormat::from_path(p))?))
            .collect();
    }
    if c.rows.len() != c.cols.len() || c.rows.is_empty() {
        bail!("--rows and --cols must list the same, nonzero number of factors");
    }
    c.rows
        .iter()
        .zip(&c.cols)
        .enumerate()
        .map(|(k, (&n, &d))| {
            let kind = InstanceKind::GaussianOutlier {
                n,
                d,
                frac: 0.0,
                scale: 0.0,
                noise: 0.0,
            };
            Ok(gen_instance(&kind, &stream.child(k as u64))?.a)
        })
        .collect()
}

fn finish_m(
    r: &mut TrialRecord,
    inst: &Instance,
    loss: &LossDescriptor,
    x: &[f64],
    queries: usize,
    ms: f64,
    with_baseline: bool,
) {
    r.wall_ms = ms;
    r.queries = Some(queries);
    if with_baseline {
        r.cost_ratio = Some(cost_ratio(&inst.a, &inst.b, loss, x, baseline(&inst.a, &inst.b, loss)));
    }
}

/// Matrix of a sensitivity family.
pub fn family_matrix(family: Family, n: usize, d: usize, tau: f64, stream: &RngStream) -> Result<DenseMatrix> {
    let kind = match family {
        Family::Gaussian => InstanceKind::GaussianOutlier {
            n,
            d,
            frac: 0.0,
            scale: 0.0,
            noise: 0.0,
        },
        Family::Duplicated => InstanceKind::Duplicated { n, d, copies: 4 },
        Family::SpikedTukey => InstanceKind::SpikedTukey { n, d, tau },
    };
    Ok(gen_instance(&kind, stream)?.a)
}

/// `d^{max(1,p_M/2)} · ln²n + τ`.
pub fn sensitivity_scale(n: usize, d: usize, p_m: f64, tau: f64) -> f64 {
    let l = (n as f64).ln();
    (d as f64).powf((p_m / 2.0).max(1.0)) * l * l + tau
}

fn sens_seed(c: &SensArgs, seed: u64) -> Result<Vec<TrialRecord>> {
    let loss = loss_catalog(&c.loss, &c.params)?;
    let cfg = SensConfig {
        c_rep: c.c_rep,
        single_hash: c.single_hash,
        ..SensConfig::default()
    };
    let s = RngStream::new(seed);
    c.ns.iter()
        .enumerate()
        .map(|(k, &n)| {
            let a = family_matrix(c.family, n, c.d, c.tau, &s.child(k as u64))?;
            let (est, ms) = timed(|| Ok(m_sensitivities(&a, &loss, c.tau, &cfg, &s.child(100 + k as u64))?))?;
            let scale = sensitivity_scale(n, c.d, loss.p_m, c.tau);
            let mut r = record(seed);
            r.wall_ms = ms;
            r.extra.insert("n".into(), n as f64);
            r.extra.insert("sum".into(), est.total);
            r.extra.insert("scale".into(), scale);
            r.extra.insert("ratio".into(), est.total / scale);
            Ok(r)
        })
        .collect()
}

fn hardness_seed(c: &HardnessArgs, seed: u64, r: &mut TrialRecord) -> Result<()> {
    let s = RngStream::new(seed);
    let cfg = ActiveConfig {
        budget: BudgetConstants { c: c.budget_c },
        ..ActiveConfig::default()
    };
    let loss = LossDescriptor::lp(c.p)?;
    match c.kind {
        HardKind::Delta => {
            let inst = gen_instance(&InstanceKind::Delta { n: c.n }, &s.child(1))?;
            let opt = baseline(&inst.a, &inst.b, &loss);
            let start = RowCopies::identity(c.n);
            let naive_oracle = TargetOracle::from_slice(&inst.b);
            let naive = naive_sample_and_solve(&inst.a, &naive_oracle, c.p, c.m, &s.child(2))?;
            let boosted_oracle = TargetOracle::from_slice(&inst.b);
            let boosted =
                high_prob_relative_lp_on(&inst.a, &boosted_oracle, c.p, c.m, c.delta, &start, &cfg, &s.child(3))?;
            let rn = cost_ratio(&inst.a, &inst.b, &loss, &naive, opt);
            let rb = cost_ratio(&inst.a, &inst.b, &loss, &boosted.solve.x, opt);
            r.queries = Some(boosted_oracle.count());
            r.budget = Some(c.m);
            r.cost_ratio = Some(rb);
            r.extra.insert("naive_ratio".into(), rn);
            r.extra.insert("naive_queries".into(), naive_oracle.count() as f64);
            r.extra.insert("naive_fail".into(), f64::from(u8::from(rn > 2.0)));
            r.extra.insert("boosted_fail".into(), f64::from(u8::from(rb > 2.0)));
        }
        HardKind::Bernoulli => {
            let positive = s.child(4).rng().random::<bool>();
            let inst = gen_instance(&InstanceKind::Bernoulli { eps: c.eps, positive }, &s.child(1))?;
            let oracle = TargetOracle::from_slice(&inst.b);
            let res = high_prob_relative_lp(&inst.a, &oracle, c.p, c.eps, c.delta, &cfg, &s.child(2))?;
            let opt = baseline(&inst.a, &inst.b, &loss);
            let ratio = cost_ratio(&inst.a, &inst.b, &loss, &res.solve.x, opt);
            let guess = res.solve.x[0] > 0.5;
            r.queries = Some(oracle.count());
            r.budget = res.budget;
            r.cost_ratio = Some(ratio);
            r.extra
                .insert("accurate".into(), f64::from(u8::from(ratio <= 1.0 + c.eps)));
            r.extra.insert("correct".into(), f64::from(u8::from(guess == positive)));
        }
    }
    Ok(())
}

/// `m` i.i.d. draws proportional to the Lewis weights, importance weights
/// `1/(m pᵢ)`, one weighted solve.
pub fn naive_sample_and_solve(
    a: &DenseMatrix,
    labels: &dyn Labels,
    p: f64,
    m: usize,
    stream: &RngStream,
) -> Result<Vec<f64>> {
    let lw = lewis_weights(a, p, 1e-10, 1000)?;
    let table = alias_build(&lw.w)?;
    let mut rng = stream.rng();
    let mut w = vec![0.0; a.nrows()];
    for _ in 0..m {
        let i = alias_draw(&table, &mut rng);
        w[i] += 1.0 / (m as f64 * table.p[i]);
    }
    let rows: Vec<usize> = (0..a.nrows()).filter(|&i| w[i] > 0.0).collect();
    let b: Vec<f64> = rows.iter().map(|&i| labels.get(i)).collect();
    let c: Vec<f64> = rows.iter().map(|&i| w[i]).collect();
    let loss = LossDescriptor::lp(p)?;
    Ok(solve_weighted_mloss(&a.select_rows(&rows), &b, Some(&c), &loss, &SolveOptions::default()).x)
}

/// Query budget of the active ℓp pipeline for the given sizes.
pub fn lp_budget(p: f64, d: usize, n: usize, eps: f64, delta: f64, c: f64) -> Result<usize> {
    Ok(budget(p, d, n, eps, delta, &BudgetConstants { c })?.m)
}
