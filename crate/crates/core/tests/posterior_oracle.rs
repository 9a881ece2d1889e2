mod support;

use nalgebra::DMatrix;
use rand_distr::{Distribution, StudentT};
use riskbench::{
    eb_hyperparams, posterior_predictive, risk_estimate, t_cdf, Measure, PortfolioWeights, PredictiveParams,
    ReturnWindow,
};
use support::*;

const DRAWS: usize = 1_000_000;

struct Instance {
    pred: PredictiveParams,
    oracle: PosteriorOracle,
}

fn eb_instance(seed: u64, n: usize, k: usize) -> Instance {
    let mut r = rng(seed);
    let rows = random_rows(&mut r, n, k);
    let w = random_weights(&mut r, k);
    let nf = n as f64;
    let (d0, r0) = (nf, nf);

    let window = ReturnWindow::from_rows(&rows).unwrap();
    let pw = PortfolioWeights::new(w.clone()).unwrap();
    let hp = eb_hyperparams(&window, d0, r0).unwrap();
    let pred = posterior_predictive(&window, &pw, &hp).unwrap();

    let (xbar, scatter) = mean_and_scatter(&rows);
    let nu0 = d0 - k as f64 - 1.0;
    let psi0 = DMatrix::from_fn(k, k, |a, b| nu0 / nf * scatter[a][b]);
    let oracle = PosteriorOracle::new(&rows, &w, &xbar, r0, nu0, &psi0);
    Instance { pred, oracle }
}

#[test]
fn predictive_cdf_matches_posterior_sampling() {
    let inst = eb_instance(11, 30, 2);
    let draws = inst.oracle.sample(DRAWS, 12);
    let p = inst.pred;
    for z in [-2.0, -1.0, 0.0, 1.0, 2.0] {
        let x = p.location + z * p.scale;
        let model = t_cdf(p.df, z).unwrap();
        let empirical = ecdf(&draws, x);
        assert!((model - empirical).abs() < 0.005, "z={z}: {model} vs {empirical}");
    }
}

#[test]
fn predictive_law_is_close_in_ks_distance() {
    for (seed, n, k) in [(21, 30, 2), (22, 100, 5)] {
        let inst = eb_instance(seed, n, k);
        let draws = inst.oracle.sample(DRAWS, seed + 100);
        let p = inst.pred;
        let d = ks_distance(&draws, |x| t_cdf(p.df, (x - p.location) / p.scale).unwrap());
        assert!(d <= 0.005, "n={n} k={k}: KS {d}");
    }
}

#[test]
fn var_matches_t_sampling_quantile() {
    let p = PredictiveParams::new(0.0004, 0.013, 7.5).unwrap();
    let t = StudentT::new(p.df).unwrap();
    let mut r = rng(5);
    let mut losses: Vec<f64> = (0..DRAWS).map(|_| -(p.location + p.scale * t.sample(&mut r))).collect();
    losses.sort_by(f64::total_cmp);
    for alpha in [0.975, 0.99] {
        let var = risk_estimate(&p, alpha, Measure::VaR).unwrap().value;
        let mc = quantile(&losses, alpha);
        let se = quantile_se(&losses, alpha);
        assert!((var - mc).abs() <= 3.0 * se, "alpha={alpha}: {var} vs {mc} (se {se})");
    }
}

#[test]
fn var_matches_posterior_quantile() {
    for (seed, n, k) in [(31, 30, 2), (32, 100, 5)] {
        let inst = eb_instance(seed, n, k);
        let draws = inst.oracle.sample(DRAWS, seed + 1);
        // VaR is the α-quantile of the loss -w'x, i.e. minus the (1-α)-quantile of w'x.
        for alpha in [0.975, 0.99] {
            let var = risk_estimate(&inst.pred, alpha, Measure::VaR).unwrap().value;
            let mc = -quantile(&draws, 1.0 - alpha);
            let se = quantile_se(&draws, 1.0 - alpha);
            assert!((var - mc).abs() <= 3.0 * se, "n={n} k={k} alpha={alpha}: {var} vs {mc} (se {se})");
        }
    }
}

#[test]
fn cvar_matches_tail_average_of_samples() {
    let inst = eb_instance(41, 100, 2);
    let draws = inst.oracle.sample(DRAWS, 42);
    for alpha in [0.975, 0.99] {
        let cvar = risk_estimate(&inst.pred, alpha, Measure::CVaR).unwrap().value;
        let tail = ((1.0 - alpha) * DRAWS as f64) as usize;
        let losses: Vec<f64> = draws[..tail].iter().map(|x| -x).collect();
        let mean = losses.iter().sum::<f64>() / tail as f64;
        let sd = (losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / tail as f64).sqrt();
        // The tail mean has its own sampling error plus the quantile's.
        let se = sd / (tail as f64).sqrt() + quantile_se(&draws, 1.0 - alpha);
        assert!((cvar - mean).abs() <= 3.0 * se, "alpha={alpha}: {cvar} vs {mean} (se {se})");
    }
}
