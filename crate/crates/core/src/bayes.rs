//! Posterior predictive distribution of a portfolio return under the
//! normal–inverse-Wishart conjugate prior, and the closed-form VaR / CVaR it
//! implies.
//!
//! Given a window of `n` return vectors and hyperparameters
//! `(m0, r0, d0, S0)`, the predictive portfolio return is a location-scale
//! Student-t:
//!
//! ```text
//! X = w'x̄ₜ₋₁ + T(d) · sqrt(r · w'Sₜ₋₁w),   d = n + d0 - 2k
//! x̄ₜ₋₁ = (n x̄ + r0 m0) / (n + r0)
//! Sₜ₋₁ = Σ(xᵢ - x̄)(xᵢ - x̄)' + S0 + n r0 (m0 - x̄ₜ₋₁)(m0 - x̄ₜ₋₁)' / (n + r0)
//! r    = (n + r0 + 1) / ((n + r0) d)
//! ```
//!
//! and the risk of the portfolio is `Q = -location + q_α · scale`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RiskError};
use crate::special::{ln_gamma_ratio, t_quantile};
use crate::window::{sample_stats, symmetrize, PortfolioWeights, ReturnWindow};

const SYMMETRY_TOL: f64 = 1e-12;
const CLAMP_TOL: f64 = 1e-9;

/// Hyperparameters `(m0, r0, d0, S0)` of the conjugate prior
/// `μ | Σ ~ N(m0, Σ / r0)`, `Σ ~ IW(d0, S0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateHyperparams {
    m0: DVector<f64>,
    r0: f64,
    d0: f64,
    s0: DMatrix<f64>,
}

impl ConjugateHyperparams {
    pub fn new(m0: DVector<f64>, r0: f64, d0: f64, s0: DMatrix<f64>) -> Result<Self> {
        let k = m0.len();
        if k == 0 || s0.nrows() != k || s0.ncols() != k {
            return Err(RiskError::Dimension(format!(
                "m0 has {k} entries but S0 is {}x{}",
                s0.nrows(),
                s0.ncols()
            )));
        }
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(RiskError::Parameter(format!("r0 must be positive, got {r0}")));
        }
        if !(d0 >= k as f64 + 2.0 && d0.is_finite()) {
            return Err(RiskError::Parameter(format!("d0 must be at least k + 2 = {}, got {d0}", k + 2)));
        }
        if m0.iter().chain(s0.iter()).any(|v| !v.is_finite()) {
            return Err(RiskError::Parameter("non-finite hyperparameter entry".into()));
        }
        for i in 0..k {
            for j in 0..i {
                let (a, b) = (s0[(i, j)], s0[(j, i)]);
                if (a - b).abs() > SYMMETRY_TOL * a.abs().max(b.abs()) {
                    return Err(RiskError::Parameter(format!("S0 is not symmetric at ({i}, {j})")));
                }
            }
        }
        if s0.clone().cholesky().is_none() {
            return Err(RiskError::Factorization("S0 must be positive definite".into()));
        }
        Ok(Self { m0, r0, d0, s0 })
    }

    pub fn k(&self) -> usize {
        self.m0.len()
    }

    pub fn m0(&self) -> &DVector<f64> {
        &self.m0
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn d0(&self) -> f64 {
        self.d0
    }

    pub fn s0(&self) -> &DMatrix<f64> {
        &self.s0
    }
}

/// Location, scale and degrees of freedom of the predictive t-distribution
/// of the portfolio return.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictiveParams {
    pub location: f64,
    pub scale: f64,
    pub df: f64,
}

impl PredictiveParams {
    pub fn new(location: f64, scale: f64, df: f64) -> Result<Self> {
        let p = Self { location, scale, df };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if !(self.df > 0.0) {
            return Err(RiskError::DegreesOfFreedom { df: self.df, min: 0.0 });
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(RiskError::DegenerateScale(self.scale));
        }
        if !self.location.is_finite() {
            return Err(RiskError::Numerical("non-finite predictive location".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Measure {
    #[serde(rename = "var")]
    VaR,
    #[serde(rename = "cvar")]
    CVaR,
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::VaR => "VaR",
            Measure::CVaR => "CVaR",
        })
    }
}

/// A VaR or CVaR forecast, expressed as a positive loss in return units.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskEstimate {
    pub measure: Measure,
    pub alpha: f64,
    pub value: f64,
    pub method: String,
}

impl RiskEstimate {
    pub fn with_method(mut self, method: impl Into<String>) -> Self {
        self.method = method.into();
        self
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(RiskError::Parameter(format!("risk level alpha must lie in (0.5, 1), got {alpha}")));
    }
    Ok(())
}

/// Predictive t-parameters of `w'x` for the next day.
pub fn posterior_predictive(
    window: &ReturnWindow,
    w: &PortfolioWeights,
    hp: &ConjugateHyperparams,
) -> Result<PredictiveParams> {
    let (n, k) = (window.n() as f64, window.k());
    if hp.k() != k {
        return Err(RiskError::Dimension(format!("hyperparameters for {} assets, window has {k}", hp.k())));
    }
    w.check_dim(k)?;
    let df = n + hp.d0 - 2.0 * k as f64;
    if !(df > 0.0) {
        return Err(RiskError::DegreesOfFreedom { df, min: 0.0 });
    }

    let stats = sample_stats(window)?;
    let r0 = hp.r0;
    let post_mean = (&stats.mean * n + &hp.m0 * r0) / (n + r0);
    let shift = &hp.m0 - &post_mean;
    let mut s_post = stats.scatter(window.n()) + &hp.s0 + (&shift * shift.transpose()) * (n * r0 / (n + r0));
    symmetrize(&mut s_post);

    let r_kn = (n + r0 + 1.0) / ((n + r0) * df);
    let quad = robust_quad_form(&s_post, w)?;
    let location = post_mean.dot(w.as_vector());
    PredictiveParams::new(location, (r_kn * quad).sqrt(), df)
}

/// `w'Sw` for a symmetric positive semi-definite `S`, evaluated as
/// `|L'w|²` through the Cholesky factor when one exists.
fn robust_quad_form(s: &DMatrix<f64>, w: &PortfolioWeights) -> Result<f64> {
    let wv = w.as_vector();
    let q = if s.nrows() > 1 {
        match s.clone().cholesky() {
            Some(chol) => (chol.l().transpose() * wv).norm_squared(),
            None => w.quad_form(s),
        }
    } else {
        s[(0, 0)] * wv[0] * wv[0]
    };
    if q < 0.0 {
        let magnitude = (s.abs() * wv.abs()).dot(&wv.abs());
        if -q > CLAMP_TOL * magnitude {
            return Err(RiskError::Numerical(format!("w'Sw = {q} is materially negative")));
        }
        return Err(RiskError::DegenerateScale(0.0));
    }
    if q == 0.0 {
        return Err(RiskError::DegenerateScale(q));
    }
    Ok(q)
}

/// `q_α` for VaR: the α-quantile of the standard t with `df` degrees of freedom.
pub fn var_quantile_factor(df: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    t_quantile(df, alpha)
}

/// `q_α` for CVaR: the expected standard-t value beyond its α-quantile,
///
/// ```text
/// q = Γ((d+1)/2) / (Γ(d/2) sqrt(πd)) · d/(d-1) · (1 + t_α²/d)^(-(d-1)/2) / (1 - α)
/// ```
pub fn cvar_quantile_factor(df: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(df > 1.0) {
        return Err(RiskError::DegreesOfFreedom { df, min: 1.0 });
    }
    let d_alpha = t_quantile(df, alpha)?;
    let ln_density_const = ln_gamma_ratio(0.5 * df, 0.5) - 0.5 * (std::f64::consts::PI * df).ln();
    let ln_tail = -0.5 * (df - 1.0) * (d_alpha * d_alpha / df).ln_1p();
    Ok((ln_density_const + ln_tail).exp() * df / (df - 1.0) / (1.0 - alpha))
}

/// `Q = -location + q_α · scale`.
pub fn risk_estimate(pred: &PredictiveParams, alpha: f64, measure: Measure) -> Result<RiskEstimate> {
    pred.validate()?;
    let q = match measure {
        Measure::VaR => var_quantile_factor(pred.df, alpha)?,
        Measure::CVaR => cvar_quantile_factor(pred.df, alpha)?,
    };
    Ok(RiskEstimate { measure, alpha, value: -pred.location + q * pred.scale, method: "conjugate".into() })
}
