use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{check_spd, standard_normals, MvnParams, SimOutput, SimRng};
use crate::error::{Result, RiskError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Low,
    Normal,
    High,
}

/// One stretch of days sharing a volatility regime.
#[derive(Debug, Clone, PartialEq)]
pub struct VolPeriod {
    pub start: usize,
    pub len: usize,
    pub regime: Regime,
    /// Per-asset multipliers applied to the base standard deviations.
    pub scales: DVector<f64>,
}

/// Multivariate normal whose standard deviations are rescaled over short
/// random periods.
#[derive(Debug, Clone, PartialEq)]
pub struct PmvnParams {
    pub base: MvnParams,
    /// Candidate period lengths, drawn with equal probability.
    pub period_lengths: Vec<usize>,
    /// Probabilities of the low, normal and high regimes.
    pub regime_probs: [f64; 3],
    pub low_scale_range: (f64, f64),
    pub high_scale_range: (f64, f64),
}

impl PmvnParams {
    /// Periods of 3, 4 or 5 days; regimes low/normal/high with probabilities
    /// 0.05/0.90/0.05; low scales U(0.5, 0.7), high scales U(1.5, 3).
    pub fn new(base: MvnParams) -> Self {
        Self {
            base,
            period_lengths: vec![3, 4, 5],
            regime_probs: [0.05, 0.90, 0.05],
            low_scale_range: (0.5, 0.7),
            high_scale_range: (1.5, 3.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.period_lengths.is_empty() || self.period_lengths.contains(&0) {
            return Err(RiskError::Parameter("period lengths must be positive".into()));
        }
        if self.regime_probs.iter().any(|p| !(0.0..=1.0).contains(p))
            || (self.regime_probs.iter().sum::<f64>() - 1.0).abs() > 1e-12
        {
            return Err(RiskError::Parameter(format!(
                "regime probabilities {:?} must be in [0, 1] and sum to 1",
                self.regime_probs
            )));
        }
        for (name, (lo, hi)) in [("low", self.low_scale_range), ("high", self.high_scale_range)] {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(RiskError::Parameter(format!("{name} scale range ({lo}, {hi}) must satisfy 0 < lo <= hi")));
            }
        }
        Ok(())
    }
}

/// Periods are drawn back to back until `T₀` days are covered; the last
/// period is truncated at the horizon but keeps its regime.
pub fn simulate_pmvn(p: &PmvnParams, t0: usize, rng: &mut SimRng) -> Result<SimOutput> {
    p.validate()?;
    let k = p.base.k();
    let l = check_spd(&p.base.sigma, "covariance")?.unpack();
    let mut returns = DMatrix::zeros(t0, k);
    let mut periods = Vec::new();
    let mut start = 0;
    while start < t0 {
        let len = p.period_lengths[rng.random_range(0..p.period_lengths.len())].min(t0 - start);
        let u: f64 = rng.random();
        let [p_low, p_normal, _] = p.regime_probs;
        let (regime, range) = if u < p_low {
            (Regime::Low, Some(p.low_scale_range))
        } else if u < p_low + p_normal {
            (Regime::Normal, None)
        } else {
            (Regime::High, Some(p.high_scale_range))
        };
        let scales = match range {
            Some((lo, hi)) => DVector::from_fn(k, |_, _| lo + (hi - lo) * rng.random::<f64>()),
            None => DVector::from_element(k, 1.0),
        };
        // diag(s) Σ diag(s) = (diag(s) L)(diag(s) L)'
        let ls = DMatrix::from_diagonal(&scales) * &l;
        for t in start..start + len {
            let x = &p.base.mu + &ls * standard_normals(rng, k);
            returns.row_mut(t).copy_from(&x.transpose());
        }
        periods.push(VolPeriod { start, len, regime, scales });
        start += len;
    }
    Ok(SimOutput { returns, periods })
}
