use thiserror::Error;

/// Errors raised by the estimators, simulators and backtest engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RiskError {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degrees of freedom must exceed {min}, got {df}")]
    DegreesOfFreedom { df: f64, min: f64 },

    #[error("degenerate predictive scale: w'Sw = {0}")]
    DegenerateScale(f64),

    #[error("asset `{0}` has zero long-window standard deviation")]
    DegenerateAsset(String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("probability {0} outside the open interval (0, 1)")]
    Range(f64),

    #[error("matrix is not positive definite: {0}")]
    Factorization(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl RiskError {
    /// True for errors caused by the caller's inputs rather than by the data
    /// or by floating-point breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            RiskError::Parameter(_) | RiskError::Config(_) | RiskError::Range(_)
        )
    }

    /// True for failures that arise from arithmetic on otherwise valid inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            RiskError::Numerical(_) | RiskError::Factorization(_) | RiskError::DegenerateScale(_)
        )
    }
}

pub type Result<T, E = RiskError> = std::result::Result<T, E>;
