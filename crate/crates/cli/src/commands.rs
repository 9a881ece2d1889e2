use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use riskbench::sim::{Regime, ScenarioParams, SimRequest};
use chrono::NaiveDate;
use riskbench::{backtest_method, portfolio_returns, rolling_forecasts, Measure, Method, PortfolioWeights, RollingConfig, ReturnWindow, Zone};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{DataSource, RunConfig, ScenarioSpec, SimulateConfig, WeightSpec};
use crate::error::{CliError, Result};
use crate::io::{fmt_num, ingest_returns, read_weights, returns_csv, weekday_dates, write_file, CsvDoc, ReturnTable};

pub const REPORT_HEADER: [&str; 8] =
    ["replication", "portfolio", "method", "alpha", "exceedances", "cum_prob", "zone", "runtime_ms"];

fn asset_ids(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("A{i}")).collect()
}

fn simulate_table(spec: &ScenarioSpec, seed: u64, replication: u64) -> Result<(ReturnTable, riskbench::sim::SimOutput)> {
    let out = SimRequest::new(spec.params.clone(), spec.t, seed).replication(replication).run()?;
    let table = ReturnTable { dates: weekday_dates(spec.start, spec.t), asset_ids: asset_ids(spec.params.k()), values: out.returns.clone() };
    Ok((table, out))
}

fn check_parent(path: &Path) -> Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if !parent.is_dir() {
        return Err(CliError::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "output directory does not exist")));
    }
    Ok(())
}

/// `<out>.meta.json`.
pub fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// `out` with its extension replaced by `json`.
pub fn aggregate_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

fn params_json(p: &ScenarioParams) -> Value {
    let v = |x: &nalgebra::DVector<f64>| x.iter().copied().collect::<Vec<f64>>();
    let m = |x: &nalgebra::DMatrix<f64>| x.row_iter().map(|r| r.iter().copied().collect::<Vec<f64>>()).collect::<Vec<_>>();
    match p {
        ScenarioParams::Mvn(p) => json!({ "mu": v(&p.mu), "sigma": m(&p.sigma) }),
        ScenarioParams::Pmvn(p) => json!({
            "mu": v(&p.base.mu),
            "sigma": m(&p.base.sigma),
            "period_lengths": p.period_lengths,
            "regime_probs": p.regime_probs,
            "low_scale": [p.low_scale_range.0, p.low_scale_range.1],
            "high_scale": [p.high_scale_range.0, p.high_scale_range.1],
        }),
        ScenarioParams::Dcc(p) => json!({
            "mu": v(&p.mu),
            "omega": v(&p.omega),
            "a": v(&p.a),
            "b": v(&p.b),
            "qbar": m(&p.qbar),
            "theta1": p.theta1,
            "theta2": p.theta2,
            "burn_in": riskbench::sim::DCC_BURN_IN,
        }),
    }
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Low => "low",
        Regime::Normal => "normal",
        Regime::High => "high",
    }
}

pub fn simulate(cfg: &SimulateConfig) -> Result<()> {
    check_parent(&cfg.out)?;
    let spec = &cfg.scenario;
    let (table, out) = simulate_table(spec, cfg.seed, cfg.replication)?;
    let csv = returns_csv(&table)?;
    let periods: Vec<Value> = out
        .periods
        .iter()
        .map(|p| {
            json!({
                "start": p.start,
                "start_date": table.dates[p.start].to_string(),
                "len": p.len,
                "regime": regime_name(p.regime),
                "scales": p.scales.iter().copied().collect::<Vec<f64>>(),
            })
        })
        .collect();
    let meta = json!({
        "scenario": spec.params.scenario().name(),
        "seed": cfg.seed,
        "replication": cfg.replication,
        "k": spec.params.k(),
        "t": spec.t,
        "start_date": table.dates[0].to_string(),
        "params": params_json(&spec.params),
        "periods": periods,
    });
    let meta = serde_json::to_vec_pretty(&meta).expect("JSON value serializes");
    write_file(&cfg.out, &csv)?;
    write_file(&meta_path(&cfg.out), &meta)
}

/// A history ready for rolling estimation.
struct Loaded {
    dates: Vec<NaiveDate>,
    returns: ReturnWindow,
}

struct Prepared {
    tables: Vec<(u64, Loaded)>,
    portfolios: Vec<(String, PortfolioWeights)>,
}

fn prepare(cfg: &RunConfig, pool: &rayon::ThreadPool) -> Result<Prepared> {
    let raw: Vec<(u64, ReturnTable)> = match &cfg.source {
        DataSource::File { path, mode } => vec![(0, ingest_returns(path, *mode)?)],
        DataSource::Simulated { scenario, seed, replications } => pool.install(|| {
            replications
                .par_iter()
                .map(|&r| simulate_table(scenario, *seed, r).map(|(t, _)| (r, t)))
                .collect::<Result<Vec<_>>>()
        })?,
    };
    let rows = raw[0].1.n();
    if rows <= cfg.window {
        return Err(CliError::Validation(format!(
            "{rows} rows of history must exceed the window of {}",
            cfg.window
        )));
    }
    let tables = raw
        .into_iter()
        .map(|(r, t)| Ok((r, Loaded { returns: t.window()?, dates: t.dates })))
        .collect::<Result<Vec<_>>>()?;
    let first = &tables[0].1.returns;
    let k = first.k();
    let rolling = RollingConfig { window: cfg.window, levels: cfg.levels.clone(), methods: cfg.methods.clone(), measure: Measure::VaR };
    rolling.validate(k)?;
    let portfolios = match &cfg.weights {
        WeightSpec::Equal => vec![("equal".to_string(), PortfolioWeights::equal(k)?)],
        WeightSpec::File(path) => read_weights(path, first.asset_ids())?,
    };
    Ok(Prepared { tables, portfolios })
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Validation(format!("cannot start {jobs} workers: {e}")))
}

fn warn(what: &str, e: &CliError) {
    eprintln!("warning: {what}: {e}");
}

/// One report line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub replication: u64,
    pub portfolio: String,
    pub method: String,
    pub alpha: f64,
    pub exceedances: usize,
    pub cum_prob: f64,
    pub zone: Zone,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ZoneShares {
    pub green: f64,
    pub amber: f64,
    pub red: f64,
}

/// Zone proportions keyed by method label, then level.
pub type Aggregate = BTreeMap<String, BTreeMap<String, ZoneShares>>;

#[derive(Debug, Clone)]
pub struct BacktestOutcome {
    pub rows: Vec<ReportRow>,
    pub aggregate: Aggregate,
    pub failures: usize,
}

pub fn aggregate(rows: &[ReportRow]) -> Result<Aggregate> {
    let mut counts: BTreeMap<(String, String), [usize; 3]> = BTreeMap::new();
    for r in rows {
        let c = counts.entry((r.method.clone(), fmt_num(r.alpha)?)).or_default();
        c[r.zone as usize] += 1;
    }
    let mut out = Aggregate::new();
    for ((method, alpha), c) in counts {
        let total = c.iter().sum::<usize>() as f64;
        let share = |i: usize| c[i] as f64 / total;
        out.entry(method).or_default().insert(alpha, ZoneShares { green: share(0), amber: share(1), red: share(2) });
    }
    Ok(out)
}

pub fn backtest(cfg: &RunConfig) -> Result<BacktestOutcome> {
    let agg_path = aggregate_path(&cfg.out);
    if agg_path == cfg.out {
        return Err(CliError::Validation("report path must not end in .json; the aggregate is written there".into()));
    }
    check_parent(&cfg.out)?;
    let pool = pool(cfg.jobs)?;
    let prep = prepare(cfg, &pool)?;
    let rolling = RollingConfig { window: cfg.window, levels: cfg.levels.clone(), methods: Vec::new(), measure: Measure::VaR };

    let mut tasks = Vec::new();
    for (ti, _) in prep.tables.iter().enumerate() {
        for pi in 0..prep.portfolios.len() {
            for mi in 0..cfg.methods.len() {
                tasks.push((ti, pi, mi));
            }
        }
    }
    let results: Vec<_> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(ti, pi, mi)| {
                let started = Instant::now();
                let r = backtest_method(&prep.tables[ti].1.returns, &prep.portfolios[pi].1, &rolling, &cfg.methods[mi]);
                (ti, pi, mi, r, started.elapsed())
            })
            .collect()
    });

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (ti, pi, mi, result, elapsed) in results {
        let (rep, pname, method) = (prep.tables[ti].0, &prep.portfolios[pi].0, &cfg.methods[mi]);
        match result {
            Ok(reports) => {
                let runtime_ms = if cfg.timings { elapsed.as_secs_f64() * 1e3 } else { 0.0 };
                rows.extend(reports.into_iter().map(|b| ReportRow {
                    replication: rep,
                    portfolio: pname.clone(),
                    method: b.method,
                    alpha: b.alpha,
                    exceedances: b.exceedances,
                    cum_prob: b.cum_prob,
                    zone: b.zone,
                    runtime_ms,
                }));
            }
            Err(e) => {
                let e = CliError::from(e);
                warn(&format!("replication {rep}, portfolio {pname}, method {method}"), &e);
                failures.push(e);
            }
        }
    }
    if rows.is_empty() {
        return Err(failures.into_iter().next().unwrap_or_else(|| CliError::Validation("nothing to backtest".into())));
    }

    let mut doc = CsvDoc::new(&REPORT_HEADER);
    for r in &rows {
        doc.row(&[
            r.replication.to_string(),
            r.portfolio.clone(),
            r.method.clone(),
            fmt_num(r.alpha)?,
            r.exceedances.to_string(),
            fmt_num(r.cum_prob)?,
            r.zone.to_string(),
            fmt_num(r.runtime_ms)?,
        ]);
    }
    let agg = aggregate(&rows)?;
    let agg_bytes = serde_json::to_vec_pretty(&agg).expect("aggregate serializes");
    write_file(&cfg.out, &doc.into_bytes())?;
    write_file(&agg_path, &agg_bytes)?;
    Ok(BacktestOutcome { rows, aggregate: agg, failures: failures.len() })
}

/// Column name of an estimate series.
pub fn series_name(kind: &str, method: &Method, alpha: f64) -> String {
    format!("{kind}[{method}@{}]", fmt_num(alpha).unwrap_or_default())
}

pub fn estimate(cfg: &RunConfig) -> Result<usize> {
    if let DataSource::Simulated { replications, .. } = &cfg.source {
        if replications.len() != 1 {
            return Err(CliError::Validation("estimate runs on one replication (use --replication)".into()));
        }
    }
    check_parent(&cfg.out)?;
    let pool = pool(cfg.jobs)?;
    let prep = prepare(cfg, &pool)?;
    let (_, table) = &prep.tables[0];
    let rolling = RollingConfig { window: cfg.window, levels: cfg.levels.clone(), methods: Vec::new(), measure: Measure::VaR };

    let tasks: Vec<(usize, usize)> =
        (0..prep.portfolios.len()).flat_map(|pi| (0..cfg.methods.len()).map(move |mi| (pi, mi))).collect();
    let series: Vec<Result<[Vec<Vec<f64>>; 2]>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(pi, mi)| {
                let w = &prep.portfolios[pi].1;
                let m = &cfg.methods[mi];
                let mut out: [Vec<Vec<f64>>; 2] = Default::default();
                for (slot, measure) in [Measure::VaR, Measure::CVaR].into_iter().enumerate() {
                    let cfg = RollingConfig { measure, ..rolling.clone() };
                    let days = rolling_forecasts(&table.returns, w, &cfg, m)?;
                    out[slot] = days.into_iter().map(|d| d.estimates.iter().map(|e| e.value).collect()).collect();
                }
                Ok(out)
            })
            .collect()
    });

    // A method is kept only if it produced series for every portfolio.
    let mut ok = vec![true; cfg.methods.len()];
    for (&(pi, mi), s) in tasks.iter().zip(&series) {
        if let Err(e) = s {
            warn(&format!("portfolio {}, method {}", prep.portfolios[pi].0, cfg.methods[mi]), e);
            ok[mi] = false;
        }
    }
    let kept: Vec<usize> = (0..cfg.methods.len()).filter(|&m| ok[m]).collect();
    if kept.is_empty() {
        let first = series.into_iter().find_map(|s| s.err());
        return Err(first.unwrap_or_else(|| CliError::Validation("no estimator ran".into())));
    }

    let mut header = vec!["date".to_string(), "portfolio".to_string(), "return".to_string()];
    for &mi in &kept {
        for &a in &cfg.levels {
            header.push(series_name("neg_var", &cfg.methods[mi], a));
            header.push(series_name("neg_cvar", &cfg.methods[mi], a));
        }
    }
    let mut doc = CsvDoc::new(&header);
    let mut count = 0;
    for (pi, (pname, w)) in prep.portfolios.iter().enumerate() {
        let realized = portfolio_returns(&table.returns, w)?;
        for (i, t) in (cfg.window..table.returns.n()).enumerate() {
            let mut fields = vec![table.dates[t].to_string(), pname.clone(), fmt_num(realized[t])?];
            for &mi in &kept {
                let s = series[pi * cfg.methods.len() + mi].as_ref().expect("kept series succeeded");
                for (var, cvar) in s[0][i].iter().zip(&s[1][i]) {
                    fields.push(fmt_num(-var)?);
                    fields.push(fmt_num(-cvar)?);
                }
            }
            doc.row(&fields);
            count += 1;
        }
    }
    write_file(&cfg.out, &doc.into_bytes())?;
    Ok(count)
}
