//! The three estimator families compared by the backtest engine, behind one
//! trait so the rolling loop does not care which it is driving.

use std::fmt;

use crate::bayes::{posterior_predictive, risk_estimate, Measure, RiskEstimate};
use crate::error::{Result, RiskError};
use crate::prior::{eb_hyperparams, sample_method_estimate, vs_hyperparams, VsConfig};
use crate::window::{PortfolioWeights, ReturnWindow};

/// Anything that turns a window of returns into risk forecasts.
pub trait Estimator: Send + Sync {
    fn label(&self) -> String;

    fn estimate(
        &self,
        window: &ReturnWindow,
        w: &PortfolioWeights,
        alpha: f64,
        measure: Measure,
    ) -> Result<RiskEstimate>;

    /// Forecasts at several levels from one fit.
    fn estimate_levels(
        &self,
        window: &ReturnWindow,
        w: &PortfolioWeights,
        alphas: &[f64],
        measure: Measure,
    ) -> Result<Vec<RiskEstimate>> {
        alphas.iter().map(|&a| self.estimate(window, w, a, measure)).collect()
    }
}

/// Built-in estimators.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// Volatility-sensitive conjugate prior.
    Vs(VsConfig),
    /// Empirical-Bayes conjugate prior; `None` means "use the window length".
    Eb { d0: Option<f64>, r0: Option<f64> },
    /// Plug-in normal with the sample mean and covariance.
    Sample,
}

impl Method {
    pub fn eb() -> Self {
        Method::Eb { d0: None, r0: None }
    }

    /// Checks the method against a window length `n` and asset count `k`
    /// before any data is touched.
    pub fn validate(&self, n: usize, k: usize) -> Result<()> {
        if n < 2 {
            return Err(RiskError::Config(format!("window length {n} is below 2")));
        }
        match self {
            Method::Vs(cfg) => {
                if n < k + 2 {
                    return Err(RiskError::Config(format!(
                        "{}: window {n} must be at least k + 2 = {}",
                        self,
                        k + 2
                    )));
                }
                cfg.validate(n).map_err(|e| RiskError::Config(format!("{self}: {e}")))
            }
            Method::Eb { d0, r0 } => {
                let d0 = d0.unwrap_or(n as f64);
                let r0 = r0.unwrap_or(n as f64);
                if d0 < k as f64 + 2.0 {
                    return Err(RiskError::Config(format!("{self}: d0 = {d0} is below k + 2 = {}", k + 2)));
                }
                if !(r0 > 0.0) {
                    return Err(RiskError::Config(format!("{self}: r0 must be positive")));
                }
                if n as f64 + d0 - 2.0 * k as f64 <= 1.0 {
                    return Err(RiskError::Config(format!("{self}: predictive df must exceed 1")));
                }
                Ok(())
            }
            Method::Sample => Ok(()),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Vs(c) => {
                write!(f, "VS({},{},{})", c.n_r, c.h, c.l)?;
                if let Some(r0) = c.r0 {
                    write!(f, "[r0={r0}]")?;
                }
                Ok(())
            }
            Method::Eb { d0: None, r0: None } => f.write_str("EB"),
            Method::Eb { d0, r0 } => {
                let show = |v: &Option<f64>| v.map_or("n".to_string(), |x| x.to_string());
                write!(f, "EB({},{})", show(d0), show(r0))
            }
            Method::Sample => f.write_str("Sample"),
        }
    }
}

impl Estimator for Method {
    fn label(&self) -> String {
        self.to_string()
    }

    fn estimate(
        &self,
        window: &ReturnWindow,
        w: &PortfolioWeights,
        alpha: f64,
        measure: Measure,
    ) -> Result<RiskEstimate> {
        self.estimate_levels(window, w, &[alpha], measure).map(|mut v| v.remove(0))
    }

    fn estimate_levels(
        &self,
        window: &ReturnWindow,
        w: &PortfolioWeights,
        alphas: &[f64],
        measure: Measure,
    ) -> Result<Vec<RiskEstimate>> {
        let n = window.n() as f64;
        let hp = match self {
            Method::Sample => {
                return alphas
                    .iter()
                    .map(|&a| sample_method_estimate(window, w, a, measure).map(|e| e.with_method(self.label())))
                    .collect();
            }
            Method::Vs(cfg) => vs_hyperparams(window, w, cfg)?.0,
            Method::Eb { d0, r0 } => eb_hyperparams(window, d0.unwrap_or(n), r0.unwrap_or(n))?,
        };
        let pred = posterior_predictive(window, w, &hp)?;
        alphas
            .iter()
            .map(|&a| risk_estimate(&pred, a, measure).map(|e| e.with_method(self.label())))
            .collect()
    }
}
