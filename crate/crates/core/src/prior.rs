//! Hyperparameter specification for the conjugate prior.
//!
//! [`vs_hyperparams`] compares the portfolio variance over a short recent
//! window with the variance over the whole window and sets the prior's
//! degrees of freedom and scale from that comparison:
//!
//! 1. `σ` — long-window standard deviations;
//! 2. `σ_r` — standard deviations over the last `n_r` rows, about the long mean;
//! 3. `D = diag(σ_r / σ)`, with `σ` here taken about the same mean and with
//!    the same divisor convention as `σ_r`;
//! 4. `Σ̂` — long-window sample covariance;
//! 5. `Σ̂_r = D Σ̂ D`;
//! 6. `V_rw = w'Σ̂_r w`, `V_w = w'Σ̂ w`;
//! 7. `d0 = max(k + 2, n · max(1, V_rw/V_w)^h · max(1, V_w/V_rw)^l)`;
//! 8. `S0 = (d0 - k - 1)(n - 1)/n · Σ̂_r`.
//!
//! [`eb_hyperparams`] is the empirical-Bayes baseline with `S0` proportional
//! to `Σ̂`, and [`sample_method_estimate`] is the plug-in normal estimator.

use nalgebra::{DMatrix, DVector};

use crate::bayes::{check_alpha, ConjugateHyperparams, Measure, RiskEstimate};
use crate::error::{Result, RiskError};
use crate::special::{normal_pdf, normal_quantile};
use crate::window::{sample_stats, short_window_std, symmetrize, PortfolioWeights, ReturnWindow};

/// Parameters of the volatility-sensitive prior, written `VS(n_r, h, l)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VsConfig {
    /// Short-window length in days.
    pub n_r: usize,
    /// Exponent applied when recent variance exceeds the long-run variance.
    pub h: f64,
    /// Exponent applied when recent variance is below the long-run variance.
    pub l: f64,
    /// Prior precision scale of the mean; `None` uses the window length `n`.
    pub r0: Option<f64>,
}

impl VsConfig {
    pub fn new(n_r: usize, h: f64, l: f64) -> Self {
        Self { n_r, h, l, r0: None }
    }

    pub fn with_r0(mut self, r0: f64) -> Self {
        self.r0 = Some(r0);
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.n_r == 0 || self.n_r > n {
            return Err(RiskError::Parameter(format!("n_r = {} must lie in [1, {n}]", self.n_r)));
        }
        if !(self.h >= 0.0 && self.h.is_finite()) {
            return Err(RiskError::Parameter(format!("h must be a nonnegative number, got {}", self.h)));
        }
        if !self.l.is_finite() {
            return Err(RiskError::Parameter(format!("l must be finite, got {}", self.l)));
        }
        if let Some(r0) = self.r0 {
            if !(r0 > 0.0 && r0.is_finite()) {
                return Err(RiskError::Parameter(format!("r0 must be positive, got {r0}")));
            }
        }
        Ok(())
    }
}

/// Standard deviation of the last `m` rows about `mean` with divisor
/// `max(m - 1, 1)`.
fn sample_std_about(window: &ReturnWindow, m: usize, mean: &DVector<f64>) -> Result<DVector<f64>> {
    let sd = short_window_std(window, m, mean)?;
    let mf = m as f64;
    Ok(if m > 1 { sd * (mf / (mf - 1.0)).sqrt() } else { sd })
}

/// Intermediate quantities of the volatility-sensitive construction.
#[derive(Debug, Clone, PartialEq)]
pub struct VolatilityDiagnostics {
    pub sigma: DVector<f64>,
    /// Short-window standard deviation about the long mean, divisor `n_r - 1`.
    pub sigma_r: DVector<f64>,
    /// Diagonal of `D`, `σ_r` over the full-window deviation with divisor `n - 1`.
    pub scale: DVector<f64>,
    /// Long-window portfolio variance `w'Σ̂w`.
    pub v_w: f64,
    /// Short-window portfolio variance `w'Σ̂_r w`.
    pub v_rw: f64,
}

impl VolatilityDiagnostics {
    pub fn d_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.scale)
    }

    /// `V_rw / V_w`.
    pub fn ratio(&self) -> f64 {
        self.v_rw / self.v_w
    }
}

pub fn vs_hyperparams(
    window: &ReturnWindow,
    w: &PortfolioWeights,
    cfg: &VsConfig,
) -> Result<(ConjugateHyperparams, VolatilityDiagnostics)> {
    let (n, k) = (window.n(), window.k());
    cfg.validate(n)?;
    w.check_dim(k)?;
    if n <= k {
        return Err(RiskError::Parameter(format!("window length {n} must exceed the number of assets {k}")));
    }

    let stats = sample_stats(window)?;
    for (i, col) in window.data().column_iter().enumerate() {
        let magnitude = col.amax();
        if stats.std[i] <= 64.0 * f64::EPSILON * magnitude {
            return Err(RiskError::DegenerateAsset(window.asset_ids()[i].clone()));
        }
    }
    let sigma_r = sample_std_about(window, cfg.n_r, &stats.mean)?;
    // Same helper for both windows, so n_r = n gives D = I exactly.
    let sigma_full = sample_std_about(window, n, &stats.mean)?;
    let scale = sigma_r.component_div(&sigma_full);

    let mut cov_r = DMatrix::from_fn(k, k, |i, j| scale[i] * stats.cov[(i, j)] * scale[j]);
    symmetrize(&mut cov_r);

    let v_w = w.quad_form(&stats.cov);
    let v_rw = w.quad_form(&cov_r);
    if !(v_w > 0.0) {
        return Err(RiskError::DegenerateVariance(format!("long-window portfolio variance is {v_w}")));
    }
    if v_rw == 0.0 {
        // S0 would be singular whatever l is.
        return Err(RiskError::DegenerateVariance("short-window portfolio variance is zero".into()));
    }

    let nf = n as f64;
    let kf = k as f64;
    let ratio = v_rw / v_w;
    let high = if ratio > 1.0 { ratio.powf(cfg.h) } else { 1.0 };
    let low = if ratio < 1.0 { (1.0 / ratio).powf(cfg.l) } else { 1.0 };
    let d0 = (kf + 2.0).max(nf * high * low);
    let s0 = cov_r * ((d0 - kf - 1.0) * (nf - 1.0) / nf);
    let r0 = cfg.r0.unwrap_or(nf);

    let hp = ConjugateHyperparams::new(stats.mean.clone(), r0, d0, s0)?;
    let diag = VolatilityDiagnostics { sigma: stats.std, sigma_r, scale, v_w, v_rw };
    Ok((hp, diag))
}

/// Empirical-Bayes hyperparameters: `m0 = x̄`, `S0 = (d0 - k - 1)(n - 1)/n · Σ̂`.
pub fn eb_hyperparams(window: &ReturnWindow, d0: f64, r0: f64) -> Result<ConjugateHyperparams> {
    let (n, k) = (window.n() as f64, window.k() as f64);
    if !(d0 >= k + 2.0) {
        return Err(RiskError::Parameter(format!("d0 must be at least k + 2 = {}, got {d0}", k + 2.0)));
    }
    if !(r0 > 0.0) {
        return Err(RiskError::Parameter(format!("r0 must be positive, got {r0}")));
    }
    let stats = sample_stats(window)?;
    let s0 = stats.cov * ((d0 - k - 1.0) * (n - 1.0) / n);
    ConjugateHyperparams::new(stats.mean, r0, d0, s0)
}

/// Plug-in normal estimate `Q = -w'x̄ + q_α sqrt(w'Σ̂w)`.
pub fn sample_method_estimate(
    window: &ReturnWindow,
    w: &PortfolioWeights,
    alpha: f64,
    measure: Measure,
) -> Result<RiskEstimate> {
    check_alpha(alpha)?;
    w.check_dim(window.k())?;
    let stats = sample_stats(window)?;
    let var = w.quad_form(&stats.cov);
    if !(var > 0.0) {
        return Err(RiskError::DegenerateVariance(format!("sample portfolio variance is {var}")));
    }
    let z = normal_quantile(alpha);
    let q = match measure {
        Measure::VaR => z,
        Measure::CVaR => normal_pdf(z) / (1.0 - alpha),
    };
    Ok(RiskEstimate {
        measure,
        alpha,
        value: -stats.mean.dot(w.as_vector()) + q * var.sqrt(),
        method: "Sample".into(),
    })
}
