//! Large-window properties of the volatility-sensitive prior.

use riskbench::{
    eb_hyperparams, posterior_predictive, risk_estimate, vs_hyperparams, Measure, PortfolioWeights, ReturnWindow,
    VsConfig,
};

use super::{normal, rng};

pub const N: usize = 10_000;
pub const K: usize = 4;
const LEVELS: [f64; 2] = [0.975, 0.99];
const GRID: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 4.0];

/// Correlated Gaussian returns whose last four rows are multiplied by `shock`.
pub fn shocked_window(seed: u64, n: usize, shock: f64) -> ReturnWindow {
    let mut r = rng(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|t| {
            let common = normal(&mut r);
            let s = if t + 4 >= n { shock } else { 1.0 };
            (0..K).map(|j| s * (0.01 + 0.003 * j as f64) * (0.6 * common + 0.8 * normal(&mut r))).collect()
        })
        .collect();
    ReturnWindow::from_rows(&rows).unwrap()
}

fn vs_risk(window: &ReturnWindow, w: &PortfolioWeights, cfg: VsConfig, alpha: f64, m: Measure) -> f64 {
    let (hp, _) = vs_hyperparams(window, w, &cfg).unwrap();
    risk_estimate(&posterior_predictive(window, w, &hp).unwrap(), alpha, m).unwrap().value
}

fn eb_risk(window: &ReturnWindow, w: &PortfolioWeights, alpha: f64, m: Measure) -> f64 {
    let n = window.n() as f64;
    let hp = eb_hyperparams(window, n, n).unwrap();
    risk_estimate(&posterior_predictive(window, w, &hp).unwrap(), alpha, m).unwrap().value
}

fn ratio(window: &ReturnWindow, w: &PortfolioWeights) -> f64 {
    vs_hyperparams(window, w, &VsConfig::new(4, 0.0, 0.0)).unwrap().1.ratio()
}

fn series(window: &ReturnWindow, w: &PortfolioWeights, cfg: impl Fn(f64) -> VsConfig, alpha: f64, m: Measure) -> Vec<f64> {
    GRID.iter().map(|&x| vs_risk(window, w, cfg(x), alpha, m)).collect()
}

/// Property 1: with recent variance above the long-run level, risk does not
/// decrease in `h`.
pub fn monotone_in_h() -> Result<String, String> {
    let window = shocked_window(101, N, 3.0);
    let w = PortfolioWeights::equal(K).unwrap();
    let rho = ratio(&window, &w);
    if rho <= 1.0 {
        return Err(format!("fixture ratio {rho} is not above 1"));
    }
    for alpha in LEVELS {
        for m in [Measure::VaR, Measure::CVaR] {
            let s = series(&window, &w, |h| VsConfig::new(4, h, 0.0), alpha, m);
            if s.windows(2).any(|p| p[1] < p[0]) {
                return Err(format!("{m} at {alpha} over h {GRID:?}: {s:?}"));
            }
        }
    }
    Ok(format!("V_rw/V_w = {rho:.3}"))
}

/// Property 2: with recent variance below the long-run level, risk does not
/// increase in `l`.
pub fn monotone_in_l() -> Result<String, String> {
    let window = shocked_window(102, N, 0.3);
    let w = PortfolioWeights::equal(K).unwrap();
    let rho = ratio(&window, &w);
    if rho >= 1.0 {
        return Err(format!("fixture ratio {rho} is not below 1"));
    }
    for alpha in LEVELS {
        for m in [Measure::VaR, Measure::CVaR] {
            let s = series(&window, &w, |l| VsConfig::new(4, 2.0, l), alpha, m);
            if s.windows(2).any(|p| p[1] > p[0]) {
                return Err(format!("{m} at {alpha} over l {GRID:?}: {s:?}"));
            }
        }
    }
    Ok(format!("V_rw/V_w = {rho:.3}"))
}

/// Property 3: `n_r = n` reproduces the empirical-Bayes hyperparameters bit
/// for bit, whatever `h` and `l` are.
pub fn full_window_is_empirical_bayes() -> Result<String, String> {
    let mut cases = 0;
    for (seed, n, shock) in [(103, 6, 1.0), (104, 250, 3.0), (105, 250, 0.3), (106, N, 2.0)] {
        let window = shocked_window(seed, n, shock);
        let w = PortfolioWeights::equal(K).unwrap();
        let nf = n as f64;
        let eb = eb_hyperparams(&window, nf, nf).unwrap();
        for (h, l) in [(0.0, 0.0), (2.0, 0.0), (4.0, 3.0), (0.5, 1.0)] {
            let (vs, _) = vs_hyperparams(&window, &w, &VsConfig::new(n, h, l)).unwrap();
            let same = vs.d0().to_bits() == eb.d0().to_bits()
                && vs.r0().to_bits() == eb.r0().to_bits()
                && vs.m0().iter().zip(eb.m0().iter()).all(|(a, b)| a.to_bits() == b.to_bits())
                && vs.s0().iter().zip(eb.s0().iter()).all(|(a, b)| a.to_bits() == b.to_bits());
            if !same {
                return Err(format!("n = {n}, h = {h}, l = {l}: hyperparameters differ"));
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} cases bit-identical"))
}

/// Properties 4 and 5: VS risk is strictly above EB when recent variance is
/// more than 1% above the long-run level, strictly below when more than 1%
/// below.
pub fn dominates_empirical_bayes() -> Result<String, String> {
    let w = PortfolioWeights::equal(K).unwrap();
    let mut checked = 0;
    for (seed, shock, above) in [(107, 3.0, true), (108, 1.5, true), (109, 0.3, false), (110, 0.7, false)] {
        let window = shocked_window(seed, N, shock);
        let rho = ratio(&window, &w);
        if above && rho <= 1.01 || !above && rho >= 0.99 {
            return Err(format!("fixture seed {seed} has ratio {rho}"));
        }
        for (h, l) in [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (2.0, 1.0), (0.5, 2.0)] {
            for alpha in LEVELS {
                for m in [Measure::VaR, Measure::CVaR] {
                    let vs = vs_risk(&window, &w, VsConfig::new(4, h, l), alpha, m);
                    let eb = eb_risk(&window, &w, alpha, m);
                    if above && vs <= eb || !above && vs >= eb {
                        return Err(format!("ratio {rho:.3}, h={h}, l={l}, {m}@{alpha}: VS {vs} vs EB {eb}"));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} comparisons"))
}

/// For large `n` the squared risk scale is the convex combination
/// `V_w/(1+ρ^h) + ρ^h V_rw/(1+ρ^h)` of the two variances.
pub fn convex_combination_limit() -> Result<String, String> {
    let w = PortfolioWeights::equal(K).unwrap();
    let mut worst: f64 = 0.0;
    for (seed, shock) in [(111, 3.0), (112, 1.3)] {
        let window = shocked_window(seed, N, shock);
        for h in [0.5, 1.0, 2.0] {
            let (hp, diag) = vs_hyperparams(&window, &w, &VsConfig::new(4, h, 0.0)).unwrap();
            let pred = posterior_predictive(&window, &w, &hp).unwrap();
            let rho = diag.ratio();
            if rho <= 1.0 {
                return Err(format!("fixture seed {seed} has ratio {rho}"));
            }
            let g = rho.powf(h);
            let combo = diag.v_w / (1.0 + g) + g * diag.v_rw / (1.0 + g);
            let rel = (pred.scale * pred.scale - combo).abs() / combo;
            worst = worst.max(rel);
            if rel > 0.02 {
                return Err(format!("h = {h}, ratio {rho:.3}: relative error {rel:.4}"));
            }
        }
    }
    Ok(format!("max relative error {worst:.2e}"))
}
