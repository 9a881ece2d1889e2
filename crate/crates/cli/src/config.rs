//! TOML config files merged with command-line flags into validated run
//! settings. Flags win over file values.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use riskbench::sim::{DccParams, MvnParams, PmvnParams, Scenario, ScenarioParams};
use riskbench::{Method, VsConfig};
use serde::Deserialize;

use crate::args::{RunArgs, ScenarioArgs, SimulateArgs};
use crate::error::{CliError, Result};
use crate::io::InputMode;

pub const SEED_ENV: &str = "RISKBENCH_SEED";
pub const DEFAULT_METHODS: [&str; 4] = ["vs", "vs(4,0,0)", "eb", "sample"];
const DEFAULT_LEVELS: [f64; 2] = [0.975, 0.99];
const DEFAULT_K: usize = 5;
const DEFAULT_T: usize = 500;
const DEFAULT_WINDOW: usize = 250;
const DEFAULT_START: &str = "2000-01-03";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub input: Option<PathBuf>,
    pub mode: Option<InputMode>,
    pub out: Option<PathBuf>,
    pub window: Option<usize>,
    pub alpha: Option<Vec<f64>>,
    pub methods: Option<Vec<String>>,
    pub weights: Option<String>,
    pub jobs: Option<usize>,
    pub replications: Option<u64>,
    pub replication: Option<u64>,
    #[serde(default)]
    pub vs: VsSection,
    #[serde(default)]
    pub scenario: ScenarioSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VsSection {
    pub nr: Option<usize>,
    pub h: Option<f64>,
    pub l: Option<f64>,
    pub r0: Option<f64>,
}

/// Scenario parameters. Anything omitted takes the built-in illustrative
/// value for the chosen scenario and `k`.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: Option<String>,
    pub k: Option<usize>,
    pub t: Option<usize>,
    pub start_date: Option<String>,
    pub mu: Option<Vec<f64>>,
    pub sigma: Option<Vec<Vec<f64>>>,
    pub period_lengths: Option<Vec<usize>>,
    pub regime_probs: Option<[f64; 3]>,
    pub low_scale: Option<(f64, f64)>,
    pub high_scale: Option<(f64, f64)>,
    pub omega: Option<Vec<f64>>,
    pub a: Option<Vec<f64>>,
    pub b: Option<Vec<f64>>,
    pub qbar: Option<Vec<Vec<f64>>>,
    pub theta1: Option<f64>,
    pub theta2: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        // Relative paths in a config file are relative to the file.
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.input, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(wt) = &mut cfg.weights {
            if wt != "equal" && Path::new(wt).is_relative() {
                *wt = base.join(&*wt).to_string_lossy().into_owned();
            }
        }
        Ok(cfg)
    }

    fn load_opt(path: Option<&PathBuf>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), |p| Self::load(p))
    }
}

/// A fully specified synthetic scenario.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub params: ScenarioParams,
    pub t: usize,
    pub start: NaiveDate,
}

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub scenario: ScenarioSpec,
    pub seed: u64,
    pub replication: u64,
    pub out: PathBuf,
}

#[derive(Debug, Clone)]
pub enum DataSource {
    File { path: PathBuf, mode: InputMode },
    Simulated { scenario: ScenarioSpec, seed: u64, replications: Vec<u64> },
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Equal,
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: DataSource,
    pub window: usize,
    pub levels: Vec<f64>,
    pub methods: Vec<Method>,
    pub weights: WeightSpec,
    pub jobs: usize,
    pub out: PathBuf,
    pub timings: bool,
}

fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64> {
    if let Some(s) = flag.or(file) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Validation(format!("{SEED_ENV}=`{v}` is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn vector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Validation(format!("{what} must be a square matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn scenario_spec(flags: &ScenarioArgs, file: &ScenarioSection, required: bool) -> Result<Option<ScenarioSpec>> {
    let Some(kind) = flags.scenario.as_ref().or(file.kind.as_ref()) else {
        return if required { Err(CliError::Validation("no scenario given (use --scenario)".into())) } else { Ok(None) };
    };
    let scenario: Scenario = kind.parse().map_err(|e: riskbench::RiskError| CliError::Validation(e.to_string()))?;
    let k = flags.k.or(file.k).or(file.mu.as_ref().map(Vec::len)).unwrap_or(DEFAULT_K);
    if k == 0 {
        return Err(CliError::Validation("k must be at least 1".into()));
    }
    let t = flags.t.or(file.t).unwrap_or(DEFAULT_T);
    let start_text = flags.start_date.as_deref().or(file.start_date.as_deref()).unwrap_or(DEFAULT_START);
    let start = NaiveDate::parse_from_str(start_text, "%Y-%m-%d")
        .map_err(|_| CliError::Validation(format!("start date `{start_text}` is not YYYY-MM-DD")))?;

    let mut params = ScenarioParams::illustrative(scenario, k);
    let custom_mvn = |base: &mut MvnParams| -> Result<()> {
        if let Some(mu) = &file.mu {
            base.mu = vector(mu);
        }
        if let Some(s) = &file.sigma {
            base.sigma = matrix(s, "sigma")?;
        }
        Ok(())
    };
    match &mut params {
        ScenarioParams::Mvn(p) => custom_mvn(p)?,
        ScenarioParams::Pmvn(p) => {
            custom_mvn(&mut p.base)?;
            apply_pmvn(p, file);
        }
        ScenarioParams::Dcc(p) => apply_dcc(p, file)?,
    }
    if params.k() != k {
        return Err(CliError::Validation(format!("k = {k} but the scenario parameters describe {} assets", params.k())));
    }
    if t < 2 {
        return Err(CliError::Validation(format!("path length t = {t} must be at least 2")));
    }
    params.validate().map_err(|e| CliError::Validation(format!("{} parameters: {e}", scenario.name())))?;
    Ok(Some(ScenarioSpec { params, t, start }))
}

fn apply_pmvn(p: &mut PmvnParams, file: &ScenarioSection) {
    if let Some(v) = &file.period_lengths {
        p.period_lengths = v.clone();
    }
    if let Some(v) = file.regime_probs {
        p.regime_probs = v;
    }
    if let Some(v) = file.low_scale {
        p.low_scale_range = v;
    }
    if let Some(v) = file.high_scale {
        p.high_scale_range = v;
    }
}

fn apply_dcc(p: &mut DccParams, file: &ScenarioSection) -> Result<()> {
    if let Some(v) = &file.mu {
        p.mu = vector(v);
    }
    if let Some(v) = &file.omega {
        p.omega = vector(v);
    }
    if let Some(v) = &file.a {
        p.a = vector(v);
    }
    if let Some(v) = &file.b {
        p.b = vector(v);
    }
    if let Some(v) = &file.qbar {
        p.qbar = matrix(v, "qbar")?;
    }
    if let Some(v) = file.theta1 {
        p.theta1 = v;
    }
    if let Some(v) = file.theta2 {
        p.theta2 = v;
    }
    Ok(())
}

pub fn simulate_config(args: &SimulateArgs) -> Result<SimulateConfig> {
    let file = FileConfig::load_opt(args.config.as_ref())?;
    let scenario = scenario_spec(&args.scenario, &file.scenario, true)?.expect("required scenario");
    let out = args.out.clone().or(file.out).ok_or_else(|| CliError::Validation("no output path (use --out)".into()))?;
    Ok(SimulateConfig {
        scenario,
        seed: resolve_seed(args.scenario.seed, file.seed)?,
        replication: args.replication.or(file.replication).unwrap_or(0),
        out,
    })
}

/// Default values for a bare `vs` method.
#[derive(Debug, Clone, Copy)]
pub struct VsDefaults {
    pub n_r: usize,
    pub h: f64,
    pub l: f64,
    pub r0: Option<f64>,
}

impl Default for VsDefaults {
    fn default() -> Self {
        Self { n_r: 4, h: 2.0, l: 0.0, r0: None }
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, spec: &str) -> Result<T> {
    s.trim().parse().map_err(|_| CliError::Validation(format!("method `{spec}`: `{}` is not a valid number", s.trim())))
}

/// Parses `vs(n_r,h,l[,r0])`, `vs`, `eb`, `eb(d0,r0)` or `sample`.
pub fn parse_method(spec: &str, vs: &VsDefaults) -> Result<Method> {
    let s = spec.trim().to_ascii_lowercase();
    let (name, args) = match s.find('(') {
        Some(i) if s.ends_with(')') => (s[..i].trim(), Some(&s[i + 1..s.len() - 1])),
        Some(_) => return Err(CliError::Validation(format!("method `{spec}`: unbalanced parentheses"))),
        None => (s.as_str(), None),
    };
    let args: Vec<&str> = args.map_or(Vec::new(), |a| a.split(',').collect());
    match (name, args.len()) {
        ("vs", 0) => {
            let mut c = VsConfig::new(vs.n_r, vs.h, vs.l);
            c.r0 = vs.r0;
            Ok(Method::Vs(c))
        }
        ("vs", 3 | 4) => {
            let mut c = VsConfig::new(parse_num(args[0], spec)?, parse_num(args[1], spec)?, parse_num(args[2], spec)?);
            if args.len() == 4 {
                c.r0 = Some(parse_num(args[3], spec)?);
            }
            Ok(Method::Vs(c))
        }
        ("eb", 0) => Ok(Method::eb()),
        ("eb", 1 | 2) => {
            let opt = |a: &str| -> Result<Option<f64>> {
                if a.trim() == "n" {
                    Ok(None)
                } else {
                    parse_num(a, spec).map(Some)
                }
            };
            Ok(Method::Eb { d0: opt(args[0])?, r0: args.get(1).map_or(Ok(None), |a| opt(a))? })
        }
        ("sample", 0) => Ok(Method::Sample),
        _ => Err(CliError::Validation(format!(
            "unknown method `{spec}` (expected vs(n_r,h,l[,r0]), vs, eb, eb(d0,r0) or sample)"
        ))),
    }
}

pub fn parse_levels(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|a| a.trim().parse::<f64>().map_err(|_| CliError::Validation(format!("alpha `{}` is not a number", a.trim()))))
        .collect()
}

pub fn run_config(args: &RunArgs) -> Result<RunConfig> {
    let file = FileConfig::load_opt(args.config.as_ref())?;

    let input = args.input.clone().or(file.input.clone());
    let source = match input {
        Some(path) => {
            if args.scenario.scenario.is_some() {
                return Err(CliError::Validation("give either --input or --scenario, not both".into()));
            }
            DataSource::File { path, mode: args.mode.or(file.mode).unwrap_or(InputMode::Returns) }
        }
        None => {
            let scenario = scenario_spec(&args.scenario, &file.scenario, false)?
                .ok_or_else(|| CliError::Validation("no data: give --input or --scenario".into()))?;
            let replications = match (args.replication.or(file.replication), args.replications.or(file.replications)) {
                (Some(r), None) => vec![r],
                (_, Some(0)) => return Err(CliError::Validation("replications must be at least 1".into())),
                (_, Some(n)) => (0..n).collect(),
                (None, None) => vec![0],
            };
            DataSource::Simulated { scenario, seed: resolve_seed(args.scenario.seed, file.seed)?, replications }
        }
    };

    let levels = match &args.alpha {
        Some(text) => parse_levels(text)?,
        None => file.alpha.clone().unwrap_or_else(|| DEFAULT_LEVELS.to_vec()),
    };
    for &a in &levels {
        if !(a > 0.5 && a < 1.0) {
            return Err(CliError::Validation(format!("alpha = {a} must lie in (0.5, 1)")));
        }
    }
    if levels.is_empty() {
        return Err(CliError::Validation("no risk levels given".into()));
    }

    let vs = VsDefaults {
        n_r: args.nr.or(file.vs.nr).unwrap_or(4),
        h: args.h.or(file.vs.h).unwrap_or(2.0),
        l: args.l.or(file.vs.l).unwrap_or(0.0),
        r0: args.r0.or(file.vs.r0),
    };
    let specs: Vec<String> = if !args.methods.is_empty() {
        args.methods.clone()
    } else {
        file.methods.clone().unwrap_or_else(|| DEFAULT_METHODS.iter().map(|s| s.to_string()).collect())
    };
    let mut methods: Vec<Method> = Vec::new();
    for spec in &specs {
        let m = parse_method(spec, &vs)?;
        if !methods.contains(&m) {
            methods.push(m);
        }
    }

    let weights = match args.weights.as_deref().or(file.weights.as_deref()).unwrap_or("equal") {
        "equal" => WeightSpec::Equal,
        path => WeightSpec::File(PathBuf::from(path)),
    };
    let jobs = args
        .jobs
        .or(file.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(CliError::Validation("jobs must be at least 1".into()));
    }
    let out = args.out.clone().or(file.out).ok_or_else(|| CliError::Validation("no output path (use --out)".into()))?;

    Ok(RunConfig {
        source,
        window: args.window.or(file.window).unwrap_or(DEFAULT_WINDOW),
        levels,
        methods,
        weights,
        jobs,
        out,
        timings: args.timings,
    })
}
