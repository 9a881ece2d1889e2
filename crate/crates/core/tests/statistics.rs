mod support;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use riskbench::{
    eb_hyperparams, posterior_predictive, risk_estimate, sample_stats, short_window_std, ConjugateHyperparams, Measure,
    PortfolioWeights, ReturnWindow,
};
use support::mean_and_scatter;

fn window_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=5, 2usize..=50).prop_flat_map(|(k, n)| prop::collection::vec(prop::collection::vec(-0.1f64..0.1, k), n))
}

fn rel_close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    (a - b).abs() <= tol * scale.max(f64::MIN_POSITIVE)
}

proptest! {
    #[test]
    fn covariance_matches_double_loop(rows in window_strategy()) {
        let stats = sample_stats(&ReturnWindow::from_rows(&rows).unwrap()).unwrap();
        let (mean, scatter) = mean_and_scatter(&rows);
        let n = rows.len() as f64;
        let k = mean.len();
        let scale = (0..k).map(|i| scatter[i][i] / (n - 1.0)).fold(0.0, f64::max);
        for a in 0..k {
            prop_assert!((stats.mean[a] - mean[a]).abs() <= 1e-15);
            for b in 0..k {
                prop_assert!(rel_close(stats.cov[(a, b)], scatter[a][b] / (n - 1.0), 1e-12, scale));
            }
            prop_assert!(rel_close(stats.std[a] * stats.std[a], stats.cov[(a, a)], 4.0 * f64::EPSILON, stats.cov[(a, a)]));
        }
    }

    #[test]
    fn row_order_is_irrelevant(rows in window_strategy(), seed in any::<u64>()) {
        let mut shuffled = rows.clone();
        let n = shuffled.len();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = sample_stats(&ReturnWindow::from_rows(&rows).unwrap()).unwrap();
        let b = sample_stats(&ReturnWindow::from_rows(&shuffled).unwrap()).unwrap();
        let scale = a.cov.amax();
        for i in 0..a.mean.len() {
            prop_assert!((a.mean[i] - b.mean[i]).abs() <= 1e-15);
        }
        for (x, y) in a.cov.iter().zip(b.cov.iter()) {
            prop_assert!(rel_close(*x, *y, 1e-12, scale));
        }
    }

    #[test]
    fn covariance_is_symmetric_psd(rows in window_strategy()) {
        let cov = sample_stats(&ReturnWindow::from_rows(&rows).unwrap()).unwrap().cov;
        prop_assert_eq!(&cov, &cov.transpose());
        let trace = cov.trace();
        let eig = cov.symmetric_eigenvalues();
        prop_assert!(eig.iter().all(|&e| e >= -1e-10 * trace));
    }

    #[test]
    fn full_short_window_is_rescaled_std(rows in window_strategy()) {
        let w = ReturnWindow::from_rows(&rows).unwrap();
        let stats = sample_stats(&w).unwrap();
        let n = w.n() as f64;
        let s = short_window_std(&w, w.n(), &stats.mean).unwrap();
        for i in 0..w.k() {
            prop_assert!(rel_close(s[i], ((n - 1.0) / n).sqrt() * stats.std[i], 1e-12, stats.std[i]));
        }
    }

    #[test]
    fn risk_is_scale_equivariant(
        rows in (2usize..=4).prop_flat_map(|k| prop::collection::vec(prop::collection::vec(-0.05f64..0.05, k), 20..40)),
        c in 0.01f64..100.0,
        r0 in 1.0f64..100.0,
        shift in -0.01f64..0.01,
        alpha in 0.9f64..0.999,
    ) {
        let k = rows[0].len();
        let window = ReturnWindow::from_rows(&rows).unwrap();
        let base = eb_hyperparams(&window, 40.0, r0).unwrap();
        // Move m0 off the sample mean so the prior-mean term is exercised.
        let m0 = base.m0().add_scalar(shift);
        let hp = ConjugateHyperparams::new(m0.clone(), r0, 40.0, base.s0().clone()).unwrap();
        let scaled_rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x * c).collect()).collect();
        let scaled = ReturnWindow::from_rows(&scaled_rows).unwrap();
        let hp_c = ConjugateHyperparams::new(m0 * c, r0, 40.0, base.s0() * (c * c)).unwrap();
        let w = PortfolioWeights::equal(k).unwrap();
        let p = posterior_predictive(&window, &w, &hp).unwrap();
        let pc = posterior_predictive(&scaled, &w, &hp_c).unwrap();
        for m in [Measure::VaR, Measure::CVaR] {
            let q = risk_estimate(&p, alpha, m).unwrap().value + p.location;
            let qc = risk_estimate(&pc, alpha, m).unwrap().value + pc.location;
            prop_assert!(rel_close(qc, c * q, 1e-10, c * q));
        }
    }

    #[test]
    fn eb_scale_is_a_positive_multiple(rows in window_strategy().prop_filter("n > k", |r| r.len() > r[0].len() + 1)) {
        let w = ReturnWindow::from_rows(&rows).unwrap();
        let k = w.k() as f64;
        let stats = sample_stats(&w).unwrap();
        if stats.cov.clone().cholesky().is_some() {
            let hp = eb_hyperparams(&w, k + 2.0, 1.0).unwrap();
            prop_assert!(hp.s0().clone().cholesky().is_some());
        }
    }
}

#[test]
fn posterior_mean_with_explicit_prior() {
    // k = 1, n = 2, returns (0.01, -0.01): x̄ = 0, scatter = 2e-4.
    let window = ReturnWindow::from_rows(&[vec![0.01], vec![-0.01]]).unwrap();
    let hp = ConjugateHyperparams::new(DVector::from_element(1, 0.02), 2.0, 4.0, DMatrix::from_element(1, 1, 2e-4)).unwrap();
    let p = posterior_predictive(&window, &PortfolioWeights::equal(1).unwrap(), &hp).unwrap();
    // x̄_{t-1} = (2·0 + 2·0.02)/4 = 0.01; df = 2 + 4 - 2 = 4.
    assert!((p.location - 0.01).abs() < 1e-16);
    assert_eq!(p.df, 4.0);
    // S = 2e-4 + 2e-4 + 2·2·(0.02 - 0.01)²/4 = 5e-4; r = 5/(4·4).
    let expected = (5.0 / 16.0 * 5e-4f64).sqrt();
    assert!((p.scale - expected).abs() < 1e-15);
}
