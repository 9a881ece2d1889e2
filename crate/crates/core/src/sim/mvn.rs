use nalgebra::{DMatrix, DVector};

use super::{check_spd, equicorrelation, illustrative_vols, standard_normals, SimRng};
use crate::error::{Result, RiskError};

/// Fixed mean vector and covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MvnParams {
    pub mu: DVector<f64>,
    pub sigma: DMatrix<f64>,
}

impl MvnParams {
    pub fn new(mu: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let p = Self { mu, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn k(&self) -> usize {
        self.mu.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu.is_empty() || self.sigma.nrows() != self.mu.len() {
            return Err(RiskError::Dimension(format!(
                "mean has {} entries, covariance is {}x{}",
                self.mu.len(),
                self.sigma.nrows(),
                self.sigma.ncols()
            )));
        }
        if self.mu.iter().any(|v| !v.is_finite()) {
            return Err(RiskError::Parameter("non-finite mean".into()));
        }
        check_spd(&self.sigma, "covariance").map(|_| ())
    }

    /// 5bp daily drift, 1-2% daily volatility, pairwise correlation 0.3.
    pub fn illustrative(k: usize) -> Self {
        let vols = illustrative_vols(k);
        let corr = equicorrelation(k, 0.3);
        let sigma = DMatrix::from_fn(k, k, |i, j| vols[i] * corr[(i, j)] * vols[j]);
        Self { mu: DVector::from_element(k, 5e-4), sigma }
    }
}

/// `T₀` i.i.d. rows `mu + L z`, `L L' = sigma`.
pub fn simulate_mvn(p: &MvnParams, t0: usize, rng: &mut SimRng) -> Result<DMatrix<f64>> {
    p.validate()?;
    let l = check_spd(&p.sigma, "covariance")?.unpack();
    let k = p.k();
    let mut out = DMatrix::zeros(t0, k);
    for t in 0..t0 {
        let x = &p.mu + &l * standard_normals(rng, k);
        out.row_mut(t).copy_from(&x.transpose());
    }
    Ok(out)
}
