//! Portfolio VaR and CVaR from a conjugate Bayesian model whose prior reacts
//! to recent volatility, together with the baselines it is compared
//! against, synthetic return generators and a Basel traffic-light backtest.
//!
//! ```
//! use riskbench::{posterior_predictive, risk_estimate, vs_hyperparams, Measure, PortfolioWeights, ReturnWindow, VsConfig};
//!
//! let rows: Vec<Vec<f64>> = (0..60)
//!     .map(|t| vec![0.01 * ((t % 7) as f64 - 3.0) / 3.0, 0.012 * ((t % 5) as f64 - 2.0) / 2.0])
//!     .collect();
//! let window = ReturnWindow::from_rows(&rows)?;
//! let w = PortfolioWeights::equal(2)?;
//!
//! let (prior, _) = vs_hyperparams(&window, &w, &VsConfig::new(4, 2.0, 0.0))?;
//! let pred = posterior_predictive(&window, &w, &prior)?;
//! let var = risk_estimate(&pred, 0.99, Measure::VaR)?;
//! let cvar = risk_estimate(&pred, 0.99, Measure::CVaR)?;
//! assert!(cvar.value > var.value);
//! # Ok::<(), riskbench::RiskError>(())
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backtest;
pub mod bayes;
pub mod error;
pub mod estimator;
pub mod prior;
pub mod sim;
pub mod special;
pub mod window;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/conjugate-model.md")]
    mod conjugate_model {}
    #[doc = include_str!("../../../book/src/volatility-prior.md")]
    mod volatility_prior {}
    #[doc = include_str!("../../../book/src/risk-measures.md")]
    mod risk_measures {}
    #[doc = include_str!("../../../book/src/backtesting.md")]
    mod backtesting {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

pub use backtest::{
    backtest_method, binomial_cdf, hit_sequence, portfolio_returns, rolling_forecasts, traffic_light,
    BacktestReport, DayForecast, HitSequence, RollingConfig, Zone,
};
pub use bayes::{
    cvar_quantile_factor, posterior_predictive, risk_estimate, var_quantile_factor, ConjugateHyperparams, Measure,
    PredictiveParams, RiskEstimate,
};
pub use error::{Result, RiskError};
pub use estimator::{Estimator, Method};
pub use prior::{eb_hyperparams, sample_method_estimate, vs_hyperparams, VolatilityDiagnostics, VsConfig};
pub use special::{t_cdf, t_quantile};
pub use window::{portfolio_return, sample_stats, short_window_std, PortfolioWeights, ReturnWindow, SampleStats};
