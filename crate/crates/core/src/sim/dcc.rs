use nalgebra::{DMatrix, DVector};

use super::{check_spd, equicorrelation, illustrative_vols, standard_normals, SimRng};
use crate::error::{Result, RiskError};

/// Steps simulated and discarded before the first returned row.
pub const DCC_BURN_IN: usize = 500;

/// DCC-GARCH(1,1) with Gaussian innovations.
///
/// ```text
/// h_{i,t} = ω_i + a_i ε²_{i,t-1} + b_i h_{i,t-1}
/// Q_t     = (1 - θ1 - θ2) Q̄ + θ1 z_{t-1} z'_{t-1} + θ2 Q_{t-1}
/// R_t     = diag(Q_t)^{-1/2} Q_t diag(Q_t)^{-1/2}
/// x_t     = μ + diag(sqrt h_t) L_t u_t,   L_t L_t' = R_t
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct DccParams {
    pub mu: DVector<f64>,
    pub omega: DVector<f64>,
    pub a: DVector<f64>,
    pub b: DVector<f64>,
    pub qbar: DMatrix<f64>,
    pub theta1: f64,
    pub theta2: f64,
}

impl DccParams {
    pub fn k(&self) -> usize {
        self.mu.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.k();
        if k == 0 || [self.omega.len(), self.a.len(), self.b.len(), self.qbar.nrows()].iter().any(|&d| d != k) {
            return Err(RiskError::Dimension("DCC parameter vectors must all have length k".into()));
        }
        for i in 0..k {
            let (w, a, b) = (self.omega[i], self.a[i], self.b[i]);
            if !(w > 0.0 && w.is_finite()) {
                return Err(RiskError::Parameter(format!("omega[{i}] = {w} must be positive")));
            }
            if !(a >= 0.0 && b >= 0.0 && a + b < 1.0) {
                return Err(RiskError::Parameter(format!(
                    "GARCH stationarity requires a, b >= 0 and a + b < 1 (asset {i}: a = {a}, b = {b})"
                )));
            }
        }
        if !(self.theta1 >= 0.0 && self.theta2 >= 0.0 && self.theta1 + self.theta2 < 1.0) {
            return Err(RiskError::Parameter(format!(
                "DCC stationarity requires theta1, theta2 >= 0 and theta1 + theta2 < 1 (got {} + {})",
                self.theta1, self.theta2
            )));
        }
        if self.qbar.diagonal().iter().any(|d| (d - 1.0).abs() > 1e-12) {
            return Err(RiskError::Parameter("Qbar must have a unit diagonal".into()));
        }
        check_spd(&self.qbar, "Qbar").map(|_| ())
    }

    /// Persistent volatility (a = 0.08, b = 0.9) around the same 1-2% daily
    /// levels as the normal scenarios, with correlation dynamics
    /// θ1 = 0.03, θ2 = 0.95 around 0.3.
    pub fn illustrative(k: usize) -> Self {
        let vols = illustrative_vols(k);
        let (a, b) = (0.08, 0.9);
        Self {
            mu: DVector::from_element(k, 5e-4),
            omega: vols.map(|v| v * v * (1.0 - a - b)),
            a: DVector::from_element(k, a),
            b: DVector::from_element(k, b),
            qbar: equicorrelation(k, 0.3),
            theta1: 0.03,
            theta2: 0.95,
        }
    }
}

pub fn simulate_dcc(p: &DccParams, t0: usize, rng: &mut SimRng) -> Result<DMatrix<f64>> {
    p.validate()?;
    let k = p.k();
    let mut h = DVector::from_fn(k, |i, _| p.omega[i] / (1.0 - p.a[i] - p.b[i]));
    let mut q = p.qbar.clone();
    let mut out = DMatrix::zeros(t0, k);
    let keep = 1.0 - p.theta1 - p.theta2;

    for step in 0..DCC_BURN_IN + t0 {
        let inv_sd = q.diagonal().map(|d| 1.0 / d.sqrt());
        let r = DMatrix::from_fn(k, k, |i, j| inv_sd[i] * q[(i, j)] * inv_sd[j]);
        let l = r
            .cholesky()
            .ok_or_else(|| RiskError::Numerical(format!("DCC correlation lost positive definiteness at step {step}")))?
            .unpack();
        let z = l * standard_normals(rng, k);
        let eps = z.component_mul(&h.map(f64::sqrt));
        if step >= DCC_BURN_IN {
            out.row_mut(step - DCC_BURN_IN).copy_from(&(&p.mu + &eps).transpose());
        }
        for i in 0..k {
            h[i] = p.omega[i] + p.a[i] * eps[i] * eps[i] + p.b[i] * h[i];
            debug_assert!(h[i] > 0.0);
        }
        q = &p.qbar * keep + (&z * z.transpose()) * p.theta1 + &q * p.theta2;
    }
    Ok(out)
}
