//! Seedable return generators: multivariate normal, perturbed multivariate
//! normal with random volatility regimes, and DCC-GARCH(1,1).
//!
//! Every generator is a pure function of its parameters, the path length and
//! an RNG. [`SimRequest`] derives that RNG from a seed so that replication
//! `r` of a scenario can be regenerated on its own.

mod dcc;
mod mvn;
mod pmvn;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Result, RiskError};

pub use dcc::{simulate_dcc, DccParams, DCC_BURN_IN};
pub use mvn::{simulate_mvn, MvnParams};
pub use pmvn::{simulate_pmvn, PmvnParams, Regime, VolPeriod};

/// The generator used by every simulator.
pub type SimRng = ChaCha20Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Mvn,
    Pmvn,
    Dcc,
}

impl Scenario {
    fn stream_tag(self) -> u64 {
        match self {
            Scenario::Mvn => 1,
            Scenario::Pmvn => 2,
            Scenario::Dcc => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Mvn => "mvn",
            Scenario::Pmvn => "pmvn",
            Scenario::Dcc => "dcc",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = RiskError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mvn" => Ok(Scenario::Mvn),
            "pmvn" => Ok(Scenario::Pmvn),
            "dcc" | "mgarch" => Ok(Scenario::Dcc),
            other => Err(RiskError::Config(format!("unknown scenario `{other}` (expected mvn, pmvn or dcc)"))),
        }
    }
}

/// Independent stream for `(seed, scenario, replication)`.
pub fn substream(seed: u64, scenario: Scenario, replication: u64) -> SimRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream((scenario.stream_tag() << 48) ^ replication);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioParams {
    Mvn(MvnParams),
    Pmvn(PmvnParams),
    Dcc(DccParams),
}

impl ScenarioParams {
    pub fn scenario(&self) -> Scenario {
        match self {
            ScenarioParams::Mvn(_) => Scenario::Mvn,
            ScenarioParams::Pmvn(_) => Scenario::Pmvn,
            ScenarioParams::Dcc(_) => Scenario::Dcc,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            ScenarioParams::Mvn(p) => p.k(),
            ScenarioParams::Pmvn(p) => p.base.k(),
            ScenarioParams::Dcc(p) => p.k(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ScenarioParams::Mvn(p) => p.validate(),
            ScenarioParams::Pmvn(p) => p.validate(),
            ScenarioParams::Dcc(p) => p.validate(),
        }
    }

    /// Round-number synthetic parameters for `k` assets.
    pub fn illustrative(scenario: Scenario, k: usize) -> Self {
        match scenario {
            Scenario::Mvn => ScenarioParams::Mvn(MvnParams::illustrative(k)),
            Scenario::Pmvn => ScenarioParams::Pmvn(PmvnParams::new(MvnParams::illustrative(k))),
            Scenario::Dcc => ScenarioParams::Dcc(DccParams::illustrative(k)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRequest {
    pub params: ScenarioParams,
    /// Path length `T₀`.
    pub t0: usize,
    pub seed: u64,
    pub replication: u64,
}

/// A simulated `T₀ x k` return path; `periods` is filled for PMVN only.
#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub returns: DMatrix<f64>,
    pub periods: Vec<VolPeriod>,
}

impl SimOutput {
    /// Per-day regime labels (all `Normal` for scenarios without regimes).
    pub fn day_regimes(&self) -> Vec<Regime> {
        let mut out = vec![Regime::Normal; self.returns.nrows()];
        for p in &self.periods {
            for r in &mut out[p.start..p.start + p.len] {
                *r = p.regime;
            }
        }
        out
    }
}

impl SimRequest {
    pub fn new(params: ScenarioParams, t0: usize, seed: u64) -> Self {
        Self { params, t0, seed, replication: 0 }
    }

    pub fn replication(mut self, r: u64) -> Self {
        self.replication = r;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.t0 < 2 {
            return Err(RiskError::Config(format!("path length must be at least 2, got {}", self.t0)));
        }
        self.params.validate()
    }

    pub fn run(&self) -> Result<SimOutput> {
        self.validate()?;
        let mut rng = substream(self.seed, self.params.scenario(), self.replication);
        match &self.params {
            ScenarioParams::Mvn(p) => Ok(SimOutput { returns: simulate_mvn(p, self.t0, &mut rng)?, periods: vec![] }),
            ScenarioParams::Pmvn(p) => simulate_pmvn(p, self.t0, &mut rng),
            ScenarioParams::Dcc(p) => Ok(SimOutput { returns: simulate_dcc(p, self.t0, &mut rng)?, periods: vec![] }),
        }
    }
}

pub(crate) fn standard_normals(rng: &mut SimRng, k: usize) -> DVector<f64> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    DVector::from_fn(k, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub(crate) fn check_spd(m: &DMatrix<f64>, what: &str) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    if !m.is_square() {
        return Err(RiskError::Dimension(format!("{what} must be square")));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(RiskError::Parameter(format!("{what} has non-finite entries")));
    }
    let k = m.nrows();
    for i in 0..k {
        for j in 0..i {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()) {
                return Err(RiskError::Parameter(format!("{what} is not symmetric")));
            }
        }
    }
    m.clone()
        .cholesky()
        .ok_or_else(|| RiskError::Factorization(format!("{what} is not positive definite")))
}

/// Equicorrelated correlation matrix.
pub(crate) fn equicorrelation(k: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |i, j| if i == j { 1.0 } else { rho })
}

/// Daily volatilities cycling through 1%, 1.5%, 2%.
pub(crate) fn illustrative_vols(k: usize) -> DVector<f64> {
    DVector::from_fn(k, |i, _| 0.01 + 0.005 * (i % 3) as f64)
}
