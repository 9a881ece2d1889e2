//! Return windows, portfolio weights and the sample statistics every
//! estimator is built from.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, RiskError};

/// An `n x k` block of daily simple returns, rows ordered oldest to newest.
///
/// The same type holds a full return history and any rolling sub-window cut
/// from it; [`ReturnWindow::rows`] produces the latter without re-validating.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnWindow {
    data: DMatrix<f64>,
    asset_ids: Arc<[String]>,
}

impl ReturnWindow {
    /// Wraps a return matrix. Requires at least two rows, one column, finite
    /// entries and one unique label per column.
    pub fn new(data: DMatrix<f64>, asset_ids: Vec<String>) -> Result<Self> {
        if data.nrows() < 2 {
            return Err(RiskError::Dimension(format!(
                "a return window needs at least 2 rows, got {}",
                data.nrows()
            )));
        }
        if data.ncols() == 0 {
            return Err(RiskError::Dimension("a return window needs at least 1 asset".into()));
        }
        if asset_ids.len() != data.ncols() {
            return Err(RiskError::Dimension(format!(
                "{} asset labels for {} columns",
                asset_ids.len(),
                data.ncols()
            )));
        }
        for (i, id) in asset_ids.iter().enumerate() {
            if asset_ids[..i].contains(id) {
                return Err(RiskError::Parameter(format!("duplicate asset label `{id}`")));
            }
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            let (r, c) = (pos % data.nrows(), pos / data.nrows());
            return Err(RiskError::Parameter(format!(
                "non-finite return at row {r}, asset `{}`",
                asset_ids[c]
            )));
        }
        Ok(Self { data, asset_ids: asset_ids.into() })
    }

    /// Builds a window from row vectors, labelling assets `A1..Ak`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(RiskError::Dimension("ragged return rows".into()));
        }
        let data = DMatrix::from_fn(rows.len(), k, |r, c| rows[r][c]);
        Self::new(data, default_ids(k))
    }

    /// Window length `n`.
    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    /// Number of assets `k`.
    pub fn k(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn asset_ids(&self) -> &[String] {
        &self.asset_ids
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.data.row(i).transpose()
    }

    /// Copies rows `start..end` into a new window sharing the asset labels.
    pub fn rows(&self, start: usize, end: usize) -> Result<Self> {
        if end > self.n() || end < start + 2 {
            return Err(RiskError::Dimension(format!(
                "row range {start}..{end} invalid for {} rows",
                self.n()
            )));
        }
        Ok(Self {
            data: self.data.rows(start, end - start).into_owned(),
            asset_ids: Arc::clone(&self.asset_ids),
        })
    }
}

pub(crate) fn default_ids(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("A{i}")).collect()
}

/// Fully-invested portfolio weights (`1'w = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioWeights(DVector<f64>);

impl PortfolioWeights {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(RiskError::Dimension("empty weight vector".into()));
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(RiskError::Parameter("non-finite portfolio weight".into()));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(RiskError::Parameter(format!("portfolio weights sum to {sum}, not 1")));
        }
        Ok(Self(DVector::from_vec(w)))
    }

    pub fn equal(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(RiskError::Dimension("empty weight vector".into()));
        }
        Self::new(vec![1.0 / k as f64; k])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub(crate) fn check_dim(&self, k: usize) -> Result<()> {
        if self.len() != k {
            return Err(RiskError::Dimension(format!(
                "{} portfolio weights for {k} assets",
                self.len()
            )));
        }
        Ok(())
    }

    /// `w' A w` for a square matrix of matching size.
    pub(crate) fn quad_form(&self, a: &DMatrix<f64>) -> f64 {
        (a * &self.0).dot(&self.0)
    }
}

/// Portfolio return `w'x` for one day of asset returns.
pub fn portfolio_return(row: &[f64], w: &PortfolioWeights) -> Result<f64> {
    w.check_dim(row.len())?;
    Ok(row.iter().zip(w.as_vector().iter()).map(|(x, wi)| x * wi).sum())
}

/// Column means, unbiased covariance (divisor `n - 1`) and standard deviations.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStats {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub std: DVector<f64>,
}

impl SampleStats {
    /// The raw scatter matrix `sum (x_i - xbar)(x_i - xbar)'`, i.e. `(n-1) * cov`.
    pub fn scatter(&self, n: usize) -> DMatrix<f64> {
        &self.cov * (n as f64 - 1.0)
    }
}

pub fn sample_stats(window: &ReturnWindow) -> Result<SampleStats> {
    let n = window.n();
    if n < 2 {
        return Err(RiskError::Dimension("sample statistics need n >= 2".into()));
    }
    let x = window.data();
    let mean = x.row_mean().transpose();
    let mut centered = x.clone();
    for (mut col, m) in centered.column_iter_mut().zip(mean.iter()) {
        col.add_scalar_mut(-m);
    }
    let mut cov = centered.tr_mul(&centered) / (n as f64 - 1.0);
    symmetrize(&mut cov);
    let std = cov.diagonal().map(f64::sqrt);
    Ok(SampleStats { mean, cov, std })
}

/// Standard deviations over the most recent `n_r` rows, measured about an
/// externally supplied mean (divisor `n_r`).
pub fn short_window_std(
    window: &ReturnWindow,
    n_r: usize,
    long_mean: &DVector<f64>,
) -> Result<DVector<f64>> {
    let n = window.n();
    if n_r == 0 || n_r > n {
        return Err(RiskError::Parameter(format!(
            "short window n_r = {n_r} must lie in [1, {n}]"
        )));
    }
    if long_mean.len() != window.k() {
        return Err(RiskError::Dimension(format!(
            "long mean has {} entries for {} assets",
            long_mean.len(),
            window.k()
        )));
    }
    let recent = window.data().rows(n - n_r, n_r);
    let sigma = DVector::from_iterator(
        window.k(),
        recent.column_iter().zip(long_mean.iter()).map(|(col, m)| {
            let ss: f64 = col.iter().map(|x| (x - m).powi(2)).sum();
            (ss / n_r as f64).sqrt()
        }),
    );
    Ok(sigma)
}

/// Copies the lower triangle onto the upper one.
pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let k = m.nrows();
    for i in 0..k {
        for j in 0..i {
            m[(j, i)] = m[(i, j)];
        }
    }
}
