mod common;

use als_core::diagnostics::{brute_force_sensitivities, BruteConfig};
use als_core::lewis::{leverage_scores, lewis_weights, split_rows};
use als_core::linalg::rank;
use als_core::weights::lp_norm;
use als_core::{DenseMatrix, LossDescriptor, RngStream};
use proptest::prelude::*;
use rand::Rng;

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(0.5),
        Just(1.0),
        Just(1.5),
        Just(2.0),
        Just(3.0),
        Just(4.0),
        0.4f64..5.0
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fixed_point_and_rank_sum(p in exponent(), n in 12usize..80, d in 1usize..6, seed in any::<u64>()) {
        let a = common::gaussian(n, d, seed);
        let tol = 1e-9;
        let lw = lewis_weights(&a, p, tol, 2000).unwrap();
        prop_assert!(lw.converged, "p={p} residual {}", lw.residual);
        prop_assert!(lw.residual <= tol);
        prop_assert!(lw.w.iter().all(|&v| v > 0.0 && v <= 1.0 + 1e-12));
        let r = rank(&a) as f64;
        prop_assert!((lw.sum_w - r).abs() <= 10.0 * tol * d as f64 + 1e-9 * r);
    }

    #[test]
    fn p_two_is_leverage(n in 5usize..60, d in 1usize..5, seed in any::<u64>()) {
        let a = common::gaussian(n, d, seed);
        let lw = lewis_weights(&a, 2.0, 1e-12, 50).unwrap();
        for (u, v) in lw.w.iter().zip(leverage_scores(&a)) {
            prop_assert!((u - v).abs() <= 1e-10);
        }
    }

    #[test]
    fn splitting_preserves_norm_and_flattens(p in exponent(), n in 20usize..100, d in 1usize..5, seed in any::<u64>()) {
        let mut a = common::gaussian(n, d, seed);
        // a few heavy rows so that splitting actually happens
        let mut rows: Vec<Vec<f64>> = a.rows().map(|r| r.to_vec()).collect();
        for r in rows.iter_mut().take(3) {
            r.iter_mut().for_each(|v| *v *= 50.0);
        }
        a = DenseMatrix::from_rows(&rows).unwrap();
        let lw = lewis_weights(&a, p, 1e-10, 2000).unwrap();
        let c2 = 1.0;
        let s = split_rows(&a, &lw.w, p, c2);
        prop_assert!(s.matrix.nrows() >= n);
        prop_assert!(s.matrix.nrows() as f64 <= (1.0 + 2.0 * lw.sum_w / (c2 * d as f64)) * n as f64 + 1.0);
        let mut rng = RngStream::new(seed ^ 1).rng();
        for _ in 0..20 {
            let x: Vec<f64> = (0..d).map(|_| rng.random::<f64>() - 0.5).collect();
            let (u, v) = (lp_norm(&a.matvec(&x), p), lp_norm(&s.matrix.matvec(&x), p));
            prop_assert!((u - v).abs() <= 1e-12 * u.max(f64::MIN_POSITIVE) * 10.0);
        }
        let split = lewis_weights(&s.matrix, p, 1e-10, 2000).unwrap();
        let cap = c2 * d as f64 / n as f64;
        prop_assert!(split.w.iter().all(|&v| v <= cap * (1.0 + 1e-6)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn lewis_weights_dominate_sensitivities(p in exponent(), n in 10usize..60, d in 1usize..4, seed in any::<u64>()) {
        let a = common::gaussian(n, d, seed);
        let lw = lewis_weights(&a, p, 1e-12, 5000).unwrap();
        let loss = LossDescriptor::lp(p).unwrap();
        let cfg = BruteConfig {
            directions: 3000,
            ..BruteConfig::default()
        };
        let s = brute_force_sensitivities(&a, &loss, &cfg, &RngStream::new(seed));
        let factor = (d as f64).powf((p / 2.0 - 1.0).max(0.0));
        for (i, (&si, &wi)) in s.iter().zip(&lw.w).enumerate() {
            prop_assert!(si <= factor * wi * (1.0 + 1e-6), "row {i}: {si} vs {wi}");
        }
    }
}
