//! Acceptance suite: one PASS/FAIL line per criterion, run serially so the
//! wall-clock limits are measured without contention.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use als_core::diagnostics::{brute_force_sensitivities, m_distortion, BruteConfig, ProbeConfig};
use als_core::huber::{huber_inequality_check, huber_subspace_embedding, l2lq_inequality_check, HuberConfig};
use als_core::kron::{kron_lewis_weights, kron_regress, KronConfig, KronProblem};
use als_core::lewis::{leverage_scores, lewis_weights};
use als_core::lp_active::{
    boost_candidates, budget, no_assumptions_lp, recursive_relative_lp, ActiveConfig, BudgetConstants,
};
use als_core::orlicz::orlicz_norm;
use als_core::sensitivity::{m_sensitivities, SensConfig};
use als_core::solvers::{solve_weighted_mloss, SolveOptions};
use als_core::{DenseMatrix, LossDescriptor, RngStream, TargetOracle, WeightVector};
use als_harness::experiments::{
    cost_ratio, family_matrix, kron_factors, run_experiment, sensitivity_scale, EmbedArgs, ExperimentSpec, Family,
    HardKind, HardnessArgs, KronArgs, OrliczArgs, OutlierArgs, Pipeline, RegressHuberArgs, RegressTukeyArgs,
};
use als_harness::instances::{gen_instance, InstanceKind};
use als_harness::report::ExperimentReport;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn gaussian(n: usize, d: usize, seed: u64) -> DenseMatrix {
    let mut rng = RngStream::new(seed).rng();
    DenseMatrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng))
}

fn run(pipeline: Pipeline, seeds: usize) -> ExperimentReport {
    run_experiment(&ExperimentSpec::new(pipeline, seeds)).expect("experiment runs")
}

fn fraction(xs: impl Iterator<Item = bool>) -> f64 {
    let (mut hit, mut all) = (0usize, 0usize);
    for x in xs {
        hit += usize::from(x);
        all += 1;
    }
    hit as f64 / all as f64
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// Least-squares slope of `ln y` against `ln x`.
fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

fn outliers(n: usize, d: usize, frac: f64) -> OutlierArgs {
    OutlierArgs {
        n,
        d,
        outliers: frac,
        outlier_scale: 1e4,
        noise: 0.1,
    }
}

/// Squared row norms of `Q` from modified Gram-Schmidt on the columns.
fn gram_schmidt_leverage(a: &DenseMatrix) -> Vec<f64> {
    let (n, d) = (a.nrows(), a.ncols());
    let mut q: Vec<Vec<f64>> = (0..d).map(|j| (0..n).map(|i| a.get(i, j)).collect()).collect();
    for j in 0..d {
        for k in 0..j {
            let r: f64 = q[k].iter().zip(&q[j]).map(|(u, v)| u * v).sum();
            let qk = q[k].clone();
            q[j].iter_mut().zip(&qk).for_each(|(v, u)| *v -= r * u);
        }
        let norm = q[j].iter().map(|v| v * v).sum::<f64>().sqrt();
        q[j].iter_mut().for_each(|v| *v /= norm);
    }
    (0..n).map(|i| q.iter().map(|c| c[i] * c[i]).sum()).collect()
}

fn lewis_fixed_point() -> Outcome {
    let a = gaussian(500, 20, 1);
    let mut worst = (0.0f64, 0.0f64);
    for p in [0.5, 1.0, 1.5, 2.0, 3.0] {
        let lw = lewis_weights(&a, p, 1e-13, 10_000).unwrap();
        worst.0 = worst.0.max(lw.residual);
        worst.1 = worst.1.max((lw.sum_w - 20.0).abs());
    }
    let lev = gram_schmidt_leverage(&a);
    let qr = leverage_scores(&a);
    let two = lewis_weights(&a, 2.0, 1e-13, 10_000).unwrap();
    let gap = lev
        .iter()
        .zip(&two.w)
        .zip(&qr)
        .map(|((u, v), w)| (u - v).abs().max((u - w).abs()))
        .fold(0.0, f64::max);
    outcome(
        worst.0 <= 1e-8 && worst.1 <= 1e-5 && gap <= 1e-10,
        format!(
            "residual {:.1e}, |Σw−d| {:.1e}, p=2 vs leverage {gap:.1e}",
            worst.0, worst.1
        ),
    )
}

fn kron_identity() -> Outcome {
    let f = [gaussian(8, 3, 2), gaussian(6, 2, 3)];
    let whole = f[0].kron(&f[1]);
    let mut worst = 0.0f64;
    for p in [1.0, 2.0, 3.0] {
        let parts = kron_lewis_weights(&f, p, 1e-14, 10_000).unwrap();
        let full = lewis_weights(&whole, p, 1e-14, 10_000).unwrap();
        for i in 0..8 {
            for j in 0..6 {
                let v = parts[0].w[i] * parts[1].w[j];
                worst = worst.max((v / full.w[i * 6 + j] - 1.0).abs());
            }
        }
    }
    outcome(worst <= 1e-6, format!("max relative error {worst:.1e}"))
}

/// Row-target constant per exponent, aiming at about a quarter of the rows;
/// the default keeps all 2000.
const EMBED_C_SE: [(f64, f64); 3] = [(1.0, 0.1), (1.5, 0.1), (3.0, 0.03)];

fn embedding_distortion() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (p, c_se) in EMBED_C_SE {
        let r = run(
            Pipeline::Embed(EmbedArgs {
                n: 2000,
                d: 10,
                p,
                eps: 0.25,
                delta: 0.1,
                spikes: 5,
                c_se,
                directions: 10_000,
                refined: 50,
            }),
            20,
        );
        let good = fraction(r.trials.iter().map(|t| t.distortion.unwrap() <= 0.35));
        let worst = r.trials.iter().map(|t| t.distortion.unwrap()).fold(0.0, f64::max);
        let nnz = r.summary.nnz.unwrap().median;
        ok &= good >= 0.9;
        parts.push(format!(
            "p={p}: {:.0}% ≤ 0.35 (max {worst:.3}, nnz {nnz:.0})",
            good * 100.0
        ));
    }
    outcome(ok, parts.join("; "))
}

/// Budget constant per exponent; the default leading constant asks for more
/// than `n` queries at `n = 20000`.
const LP_BUDGET_C: [(f64, f64); 3] = [(0.5, 0.25), (1.5, 0.5), (3.0, 0.02)];

fn active_lp() -> Outcome {
    let (n, d, eps, delta) = (20_000, 10, 0.25, 0.1);
    let mut parts = Vec::new();
    let mut ok = true;
    for (p, c) in LP_BUDGET_C {
        let cfg = ActiveConfig {
            budget: BudgetConstants { c },
            ..ActiveConfig::default()
        };
        let m = budget(p, d, n, eps, delta, &cfg.budget).unwrap().m;
        let loss = LossDescriptor::lp(p).unwrap();
        let mut ratios = Vec::new();
        let mut within = true;
        let mut same_queries = true;
        let mut max_q = 0;
        for seed in 0..10u64 {
            let kind = InstanceKind::GaussianOutlier {
                n,
                d,
                frac: 0.02,
                scale: 1e4,
                noise: 0.1,
            };
            let inst = gen_instance(&kind, &RngStream::new(seed)).unwrap();
            let algo = RngStream::new(1000 + seed);
            let o = TargetOracle::from_slice(&inst.b);
            let res = no_assumptions_lp(&inst.a, &o, p, eps, delta, &cfg, &algo).unwrap();
            let opt = solve_weighted_mloss(&inst.a, &inst.b, None, &loss, &SolveOptions::default()).objective;
            ratios.push(cost_ratio(&inst.a, &inst.b, &loss, &res.solve.x, opt));
            within &= o.count() <= m;
            max_q = max_q.max(o.count());
            if seed < 2 {
                let other: Vec<f64> = inst.b.iter().map(|v| -3.0 * v + 7.0).collect();
                let o2 = TargetOracle::from_slice(&other);
                no_assumptions_lp(&inst.a, &o2, p, eps, delta, &cfg, &algo).unwrap();
                same_queries &= o2.queried() == o.queried();
            }
        }
        let med = median(ratios);
        ok &= med <= 1.25 && within && same_queries;
        parts.push(format!(
            "p={p}: median {med:.3}, queries ≤ {max_q}/{m}{}",
            if same_queries { "" } else { ", query set depends on b" }
        ));
    }
    outcome(ok, parts.join("; "))
}

fn smallest_sufficient_m(d: usize) -> usize {
    let seeds = 11u64;
    let loss = LossDescriptor::lp(1.5).unwrap();
    let insts: Vec<_> = (0..seeds)
        .map(|s| {
            let kind = InstanceKind::GaussianOutlier {
                n: 4000,
                d,
                frac: 0.0,
                scale: 0.0,
                noise: 1.0,
            };
            let inst = gen_instance(&kind, &RngStream::new(50 + s)).unwrap();
            let opt = solve_weighted_mloss(&inst.a, &inst.b, None, &loss, &SolveOptions::default()).objective;
            (inst, opt)
        })
        .collect();
    let cfg = ActiveConfig::default();
    let mut m = d as f64;
    loop {
        let mi = m.ceil() as usize;
        let ratios: Vec<f64> = insts
            .iter()
            .enumerate()
            .map(|(s, (inst, opt))| {
                let o = TargetOracle::from_slice(&inst.b);
                let r = recursive_relative_lp(&inst.a, &o, 1.5, mi, &cfg, &RngStream::new(900 + s as u64)).unwrap();
                cost_ratio(&inst.a, &inst.b, &loss, &r.solve.x, *opt)
            })
            .collect();
        if median(ratios) <= 1.1 || mi >= 4000 {
            return mi;
        }
        m *= 1.2;
    }
}

fn d_scaling() -> Outcome {
    let ds = [5usize, 10, 20, 40];
    let ms: Vec<usize> = ds.iter().map(|&d| smallest_sufficient_m(d)).collect();
    let slope = loglog_slope(&ds.map(|d| d as f64), &ms.iter().map(|&m| m as f64).collect::<Vec<_>>());
    outcome(slope <= 1.5, format!("m for d={ds:?}: {ms:?}, slope {slope:.2}"))
}

fn sensitivity_sums() -> Outcome {
    let (d, tau) = (4usize, 16.0);
    let losses = [
        LossDescriptor::huber(1.0).unwrap(),
        LossDescriptor::tukey_lp(1.0, 2.0).unwrap(),
        LossDescriptor::l2lq(0.5).unwrap(),
        LossDescriptor::lp(3.0).unwrap(),
    ];
    let mut worst = 0.0f64;
    for (f, family) in [Family::Gaussian, Family::Duplicated, Family::SpikedTukey]
        .into_iter()
        .enumerate()
    {
        for n in [40_000usize] {
            let a = family_matrix(family, n, d, tau, &RngStream::new(f as u64)).unwrap();
            for loss in &losses {
                let est = m_sensitivities(&a, loss, tau, &SensConfig::default(), &RngStream::new(7)).unwrap();
                worst = worst.max(est.total / sensitivity_scale(n, d, loss.p_m, tau));
            }
        }
    }
    let single = SensConfig {
        single_hash: true,
        ..SensConfig::default()
    };
    let huber = LossDescriptor::huber(1.0).unwrap();
    let ns = [1000usize, 2000, 4000, 8000, 16_000, 32_000, 64_000];
    let sums: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let a = family_matrix(Family::SpikedTukey, n, d, tau, &RngStream::new(3)).unwrap();
            (0..3u64)
                .map(|s| {
                    m_sensitivities(&a, &huber, tau, &single, &RngStream::new(8 + s))
                        .unwrap()
                        .total
                })
                .sum::<f64>()
                / 3.0
        })
        .collect();
    // increments per unit of ln n over the lower and upper halves of the range
    let rate = |i: usize, j: usize| (sums[j] - sums[i]) / (ns[j] as f64 / ns[i] as f64).ln();
    let (lower, upper) = (rate(0, 3), rate(3, 6));
    outcome(
        worst <= 60.0 && upper <= 1.3 * lower,
        format!(
            "max Σs̃/(d^(max(1,p/2))·ln²n+τ) {worst:.2}; single-hash Σs̃ {:.0}..{:.0}, per unit ln n {lower:.1} then {upper:.1}",
            sums[0], sums[6]
        ),
    )
}

fn sensitivity_validity() -> Outcome {
    let cfg = SensConfig {
        c_rep: 4.0,
        ..SensConfig::default()
    };
    let losses = [
        LossDescriptor::huber(1.0).unwrap(),
        LossDescriptor::lp(1.5).unwrap(),
        LossDescriptor::tukey_lp(2.0, 2.0).unwrap(),
    ];
    let (mut covered, mut rows) = (0usize, 0usize);
    for seed in 0..20u64 {
        let (n, d) = (120 + 4 * seed as usize, 2 + (seed as usize % 3));
        let a = gaussian(n, d, 300 + seed);
        let loss = &losses[seed as usize % 3];
        let est = m_sensitivities(&a, loss, 1.0, &cfg, &RngStream::new(seed)).unwrap();
        let brute = brute_force_sensitivities(&a, loss, &BruteConfig::default(), &RngStream::new(400 + seed));
        for (i, &b) in brute.iter().enumerate() {
            rows += 1;
            covered += usize::from(est.s[i] >= b);
        }
    }
    let frac = covered as f64 / rows as f64;
    outcome(frac >= 0.95, format!("{:.1}% of {rows} rows covered", frac * 100.0))
}

fn tight_vector(n: usize, scale: f64) -> Vec<f64> {
    let t = (n as f64).cbrt();
    (0..n).map(|i| scale * if i == 0 { t } else { 1.0 / t }).collect()
}

fn huber_inequality() -> Outcome {
    let mut rng = RngStream::new(11).rng();
    let mut failures = 0usize;
    let total = 100_000;
    for k in 0..total {
        let n = rng.random_range(2..200usize);
        let scale = 2f64.powi(rng.random_range(-12..=12));
        let y: Vec<f64> = if k % 10 == 0 {
            tight_vector(n, scale)
        } else {
            let mut y: Vec<f64> = (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect();
            for _ in 0..rng.random_range(0..4usize) {
                let i = rng.random_range(0..n);
                y[i] *= 10f64.powi(rng.random_range(1..5));
            }
            y
        };
        let gamma = (n as f64).powf(-rng.random::<f64>());
        let q = [0.5, 1.0, 1.5][k % 3];
        if !huber_inequality_check(&y, gamma, 0.01).holds() || !l2lq_inequality_check(&y, gamma, q, 0.01).holds() {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("{failures} of {total} vectors violate both branches"),
    )
}

/// Per-step oversampling and stopping-size constants of the Huber embedding.
fn huber_cfg() -> HuberConfig {
    HuberConfig {
        c_m: 0.5,
        kappa_m: 0.0,
        c_h: 3.0,
        kappa_h: 1.0,
        ..HuberConfig::default()
    }
}

fn huber_pipeline() -> Outcome {
    let n = 40_000;
    let cfg = huber_cfg();
    let mut parts = Vec::new();
    let mut ok = true;
    let mut finals = Vec::new();
    for d in [4usize, 8, 16] {
        let a = gaussian(n, d, 20 + d as u64);
        let e = huber_subspace_embedding(&a, &cfg, &RngStream::new(d as u64)).unwrap();
        finals.push(e.weights.nnz() as f64);
        if d == 8 {
            let probe = ProbeConfig {
                random: 4000,
                refined: 20,
                ascent_steps: 30,
            };
            let dist = m_distortion(&a, &cfg.loss(), &e.weights, 8, &probe, &RngStream::new(5)).max;
            let in_steps = e.steps() <= cfg.step_cap(n);
            ok &= e.reached_target && in_steps && dist <= 2.0 * cfg.eps;
            parts.push(format!(
                "40000×8: nnz {} ≤ {} in {} steps (cap {}), distortion {dist:.3}",
                e.weights.nnz(),
                e.target,
                e.steps(),
                cfg.step_cap(n)
            ));
        }
    }
    let slope = loglog_slope(&[4.0, 8.0, 16.0], &finals);
    ok &= slope <= 1.6;
    parts.push(format!("nnz slope in d {slope:.2}"));
    let r = run(
        Pipeline::RegressHuber(RegressHuberArgs {
            data: OutlierArgs {
                outlier_scale: 1e3,
                ..outliers(20_000, 8, 0.02)
            },
            tau: 1.0,
            eps: 0.25,
            delta: 0.1,
            c_m: cfg.c_m,
            kappa_m: cfg.kappa_m,
            c_h: cfg.c_h,
            kappa_h: cfg.kappa_h,
        }),
        20,
    );
    let good = fraction(r.trials.iter().map(|t| t.cost_ratio.unwrap() <= 1.3));
    let q = r.summary.queries.unwrap().median;
    ok &= good >= 0.8;
    parts.push(format!(
        "active: {:.0}% of seeds ≤ 1.3, median queries {q:.0}",
        good * 100.0
    ));
    outcome(ok, parts.join("; "))
}

fn tukey_active() -> Outcome {
    let r = run(
        Pipeline::RegressTukey(RegressTukeyArgs {
            data: outliers(5000, 5, 0.05),
            tau: 2.0,
            p: 2.0,
            eps: 0.5,
            delta: 0.1,
            c_cf: 4.0,
            c_rel: 1.0,
        }),
        20,
    );
    let good = fraction(r.trials.iter().map(|t| t.cost_ratio.unwrap() <= 1.3));
    let c = r.summary.cost_ratio.unwrap();
    outcome(
        good >= 0.8,
        format!(
            "{:.0}% of seeds ≤ 1.3 (median {:.4}), median queries {:.0}",
            good * 100.0,
            c.median,
            r.summary.queries.unwrap().median
        ),
    )
}

/// Leading budget constant for the Kronecker sampler; the default draws more
/// than `∏ nᵢ` times.
const KRON_BUDGET_C: f64 = 0.25;

fn kron_regression() -> Outcome {
    let args = |n: usize| KronArgs {
        rows: vec![n, n],
        cols: vec![4, 4],
        p: 1.5,
        eps: 0.3,
        delta: 0.1,
        budget_c: KRON_BUDGET_C,
        noise: 0.1,
        factors: Vec::new(),
        b: None,
    };
    let r = run(Pipeline::Kron(args(64)), 10);
    let within = r.trials.iter().all(|t| t.queries.unwrap() <= t.budget.unwrap());
    let med = r.summary.cost_ratio.unwrap().median;
    let mut counts = Vec::new();
    for n in [32usize, 64, 128] {
        let c = args(n);
        let factors = kron_factors(&c, &RngStream::new(n as u64)).unwrap();
        let total: usize = factors.iter().map(|f| f.nrows()).product();
        let o = TargetOracle::new(als_core::oracle::FnSource::new(total, |i| (i % 7) as f64));
        let problem = KronProblem {
            factors,
            labels: &o,
            p: 1.5,
        };
        let cfg = KronConfig {
            budget: BudgetConstants { c: KRON_BUDGET_C },
            ..KronConfig::default()
        };
        kron_regress(&problem, 0.3, 0.1, &cfg, &RngStream::new(1)).unwrap();
        counts.push(o.count());
    }
    let spread = *counts.iter().max().unwrap() as f64 / *counts.iter().min().unwrap() as f64;
    outcome(
        med <= 1.3 && within && spread <= 2.0,
        format!("median ratio {med:.4}, queries within budget: {within}, queries for n=32,64,128: {counts:?}"),
    )
}

fn orlicz() -> Outcome {
    let mut rng = RngStream::new(12).rng();
    let mut worst = 0.0f64;
    for p in [1.0, 1.5, 2.0, 3.0] {
        let g = LossDescriptor::lp(p).unwrap();
        for _ in 0..50 {
            let y: Vec<f64> = (0..40).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let lp = y.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
            let v = orlicz_norm(&y, &g, &WeightVector::ones(40)).unwrap();
            worst = worst.max((v / lp - 1.0).abs());
        }
    }
    let eps = 0.25;
    let r = run(
        Pipeline::Orlicz(OrliczArgs {
            n: 2000,
            d: 8,
            tau: 1.0,
            eps,
            c_rows: 1.0,
            directions: 10_000,
            refined: 20,
        }),
        1,
    );
    let t = &r.trials[0];
    let dist = t.distortion.unwrap();
    outcome(
        worst <= 1e-10 && dist <= 2.0 * eps,
        format!(
            "power gauge error {worst:.1e}; huber gauge distortion {dist:.3} with {} rows",
            t.nnz.unwrap()
        ),
    )
}

fn hardness() -> Outcome {
    let delta = 0.05;
    let r = run(
        Pipeline::Hardness(HardnessArgs {
            kind: HardKind::Delta,
            delta,
            p: 2.0,
            n: 100,
            m: 5,
            eps: 0.1,
            budget_c: 0.02,
        }),
        400,
    );
    let naive = fraction(r.trials.iter().map(|t| t.extra["naive_fail"] == 1.0));
    let boosted = fraction(r.trials.iter().map(|t| t.extra["boosted_fail"] == 1.0));
    let b = run(
        Pipeline::Hardness(HardnessArgs {
            kind: HardKind::Bernoulli,
            delta: 0.1,
            p: 0.5,
            n: 0,
            m: 0,
            eps: 0.1,
            budget_c: 2.0,
        }),
        60,
    );
    let accurate: Vec<_> = b.trials.iter().filter(|t| t.extra["accurate"] == 1.0).collect();
    let correct = fraction(accurate.iter().map(|t| t.extra["correct"] == 1.0));
    let share = accurate.len() as f64 / b.trials.len() as f64;
    outcome(
        naive >= delta / 2.0 && boosted <= delta && correct >= 0.95,
        format!(
            "delta: naive fails {:.2}%, boosted {:.2}%; bernoulli: {:.0}% accurate, of which {:.0}% pick the right sign",
            naive * 100.0,
            boosted * 100.0,
            share * 100.0,
            correct * 100.0
        ),
    )
}

fn boosting() -> Outcome {
    let a = gaussian(30, 3, 13);
    let b: Vec<f64> = (0..30).map(|i| i as f64).collect();
    let o = TargetOracle::from_slice(&b);
    let norm = LossDescriptor::lp(1.5).unwrap();
    let mut rng = RngStream::new(14).rng();
    let mut bad = 0;
    for slot in 0..10 {
        let mut cands: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..3).map(|j| j as f64 + 0.01 * rng.random::<f64>()).collect())
            .collect();
        cands[slot] = vec![1e3, -1e3, 1e3];
        let pick = boost_candidates(&cands, &a, &norm, 1.0).unwrap();
        bad += usize::from(pick.index == slot);
    }
    outcome(
        bad == 0 && o.count() == 0,
        format!("outlier chosen {bad} of 10 times, {} reads of b", o.count()),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, u64, fn() -> Outcome); 14] = [
        (1, "Lewis fixed point", 10, lewis_fixed_point),
        (2, "Kronecker Lewis product", 5, kron_identity),
        (3, "lp embedding distortion", 60, embedding_distortion),
        (4, "active lp regression", 180, active_lp),
        (5, "d-scaling at p=1.5", 300, d_scaling),
        (6, "sensitivity sums", 120, sensitivity_sums),
        (7, "sensitivity validity", 120, sensitivity_validity),
        (8, "Huber and l2-lq inequalities", 60, huber_inequality),
        (9, "Huber embedding and regression", 300, huber_pipeline),
        (10, "Tukey active regression", 120, tukey_active),
        (11, "Kronecker regression", 120, kron_regression),
        (12, "Orlicz norm and embedding", 60, orlicz),
        (13, "hardness demos", 180, hardness),
        (14, "boosting fixture", 1, boosting),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, limit, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|k| k == &id.to_string()) {
            continue;
        }
        let t = Instant::now();
        let out = f();
        let took = t.elapsed();
        let ok = out.ok && took < Duration::from_secs(limit);
        failed += usize::from(!ok);
        println!(
            "{} {id:>2} {name}: {} [{:.1}s, limit {limit}s]",
            if ok { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
