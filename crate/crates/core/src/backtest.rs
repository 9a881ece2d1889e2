//! Rolling-window VaR forecasting, hit sequences and the Basel traffic-light
//! classification of exceedance counts.

use std::fmt;

use serde::Serialize;

use crate::bayes::{check_alpha, Measure, RiskEstimate};
use crate::error::{Result, RiskError};
use crate::estimator::{Estimator, Method};
use crate::window::{portfolio_return, PortfolioWeights, ReturnWindow};

/// Upper edge of the Green zone (exclusive).
pub const GREEN_LIMIT: f64 = 0.95;
/// Upper edge of the Amber zone (inclusive).
pub const AMBER_LIMIT: f64 = 0.9999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Zone {
    Green,
    Amber,
    Red,
}

impl Zone {
    pub fn from_cum_prob(p: f64) -> Self {
        if p < GREEN_LIMIT {
            Zone::Green
        } else if p > AMBER_LIMIT {
            Zone::Red
        } else {
            Zone::Amber
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Zone::Green => "green",
            Zone::Amber => "amber",
            Zone::Red => "red",
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Daily exceedance indicators `I_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct HitSequence {
    pub hits: Vec<bool>,
    pub alpha: f64,
}

impl HitSequence {
    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }

    pub fn exceedances(&self) -> usize {
        self.hits.iter().filter(|&&h| h).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestReport {
    pub exceedances: usize,
    pub days: usize,
    pub alpha: f64,
    /// `P(C_T <= c)` under `Binomial(T, 1 - α)`.
    pub cum_prob: f64,
    pub zone: Zone,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingConfig {
    /// Estimation window length `n`.
    pub window: usize,
    pub levels: Vec<f64>,
    pub methods: Vec<Method>,
    pub measure: Measure,
}

impl Default for RollingConfig {
    fn default() -> Self {
        Self { window: 250, levels: vec![0.975, 0.99], methods: Vec::new(), measure: Measure::VaR }
    }
}

impl RollingConfig {
    pub fn validate(&self, k: usize) -> Result<()> {
        if self.levels.is_empty() {
            return Err(RiskError::Config("no risk levels configured".into()));
        }
        for &a in &self.levels {
            check_alpha(a).map_err(|e| RiskError::Config(e.to_string()))?;
        }
        for m in &self.methods {
            m.validate(self.window, k)?;
        }
        Ok(())
    }
}

/// The forecasts made for one day, one per configured level.
#[derive(Debug, Clone, PartialEq)]
pub struct DayForecast {
    /// Row index of the forecast day in the full return matrix.
    pub day: usize,
    pub estimates: Vec<RiskEstimate>,
}

/// Fits `method` on rows `[t - n, t)` for every `t` in `[n, T₀)` and
/// forecasts day `t`.
pub fn rolling_forecasts(
    returns: &ReturnWindow,
    w: &PortfolioWeights,
    cfg: &RollingConfig,
    method: &dyn Estimator,
) -> Result<Vec<DayForecast>> {
    let total = returns.n();
    if total <= cfg.window {
        return Err(RiskError::Config(format!(
            "{total} rows of history leave nothing to forecast with a window of {}",
            cfg.window
        )));
    }
    (cfg.window..total)
        .map(|t| {
            let window = returns.rows(t - cfg.window, t)?;
            let estimates = method.estimate_levels(&window, w, &cfg.levels, cfg.measure)?;
            Ok(DayForecast { day: t, estimates })
        })
        .collect()
}

/// Portfolio returns `w'x_t` for every row.
pub fn portfolio_returns(returns: &ReturnWindow, w: &PortfolioWeights) -> Result<Vec<f64>> {
    w.check_dim(returns.k())?;
    let data = returns.data();
    (0..returns.n())
        .map(|t| portfolio_return(data.row(t).transpose().as_slice(), w))
        .collect()
}

/// `I_t = 1` iff the realized return falls strictly below `-VaR_t`.
pub fn hit_sequence(var: &[f64], realized: &[f64], alpha: f64) -> Result<HitSequence> {
    if var.len() != realized.len() {
        return Err(RiskError::Dimension(format!(
            "{} forecasts against {} realized returns",
            var.len(),
            realized.len()
        )));
    }
    let hits = var.iter().zip(realized).map(|(q, r)| *r < -q).collect();
    Ok(HitSequence { hits, alpha })
}

/// `P(C <= c)` for `C ~ Binomial(trials, p)`.
///
/// Terms are formed in log space and combined against their running maximum.
/// Above the mean the upper tail is summed and complemented instead.
pub fn binomial_cdf(c: usize, trials: usize, p: f64) -> f64 {
    if c >= trials {
        return 1.0;
    }
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return 0.0;
    }
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    let log_terms: Vec<f64> = {
        let mut v = Vec::with_capacity(trials + 1);
        let mut ln_choose = 0.0;
        for j in 0..=trials {
            if j > 0 {
                ln_choose += ((trials - j + 1) as f64).ln() - (j as f64).ln();
            }
            v.push(ln_choose + j as f64 * ln_p + (trials - j) as f64 * ln_q);
        }
        v
    };
    let mean = trials as f64 * p;
    if (c as f64) < mean {
        log_sum_exp(&log_terms[..=c]).min(1.0)
    } else {
        (1.0 - log_sum_exp(&log_terms[c + 1..])).clamp(0.0, 1.0)
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return 0.0;
    }
    let s: f64 = xs.iter().map(|x| (x - max).exp()).sum();
    max.exp() * s
}

/// Classifies `c` exceedances in `days` VaR forecasts at level `alpha`.
pub fn traffic_light(c: usize, days: usize, alpha: f64) -> Result<BacktestReport> {
    if c > days {
        return Err(RiskError::Parameter(format!("{c} exceedances in {days} days")));
    }
    check_alpha(alpha)?;
    let cum_prob = binomial_cdf(c, days, 1.0 - alpha);
    Ok(BacktestReport {
        exceedances: c,
        days,
        alpha,
        cum_prob,
        zone: Zone::from_cum_prob(cum_prob),
        method: String::new(),
    })
}

/// Runs the rolling loop for one method and classifies every level.
pub fn backtest_method(
    returns: &ReturnWindow,
    w: &PortfolioWeights,
    cfg: &RollingConfig,
    method: &dyn Estimator,
) -> Result<Vec<BacktestReport>> {
    let forecasts = rolling_forecasts(returns, w, cfg, method)?;
    let realized = portfolio_returns(returns, w)?;
    let realized = &realized[cfg.window..];
    cfg.levels
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let var: Vec<f64> = forecasts.iter().map(|f| f.estimates[i].value).collect();
            let hits = hit_sequence(&var, realized, alpha)?;
            let mut report = traffic_light(hits.exceedances(), hits.len(), alpha)?;
            report.method = method.label();
            Ok(report)
        })
        .collect()
}
