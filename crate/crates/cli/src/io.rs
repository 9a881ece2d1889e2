//! CSV ingestion and serialization.

use std::fs;
use std::io::Read;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use nalgebra::DMatrix;
use riskbench::{PortfolioWeights, ReturnWindow};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputMode {
    /// Cells are simple returns.
    Returns,
    /// Cells are prices; returns are `p_t / p_{t-1} - 1`.
    Prices,
}

/// A dated return history, one row per date.
#[derive(Debug, Clone)]
pub struct ReturnTable {
    pub dates: Vec<NaiveDate>,
    pub asset_ids: Vec<String>,
    pub values: DMatrix<f64>,
}

impl ReturnTable {
    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// The full history as an estimation window (needs two rows or more).
    pub fn window(&self) -> Result<ReturnWindow> {
        ReturnWindow::new(self.values.clone(), self.asset_ids.clone()).map_err(|e| CliError::Data(e.to_string()))
    }
}

pub fn ingest_returns(path: &Path, mode: InputMode) -> Result<ReturnTable> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_returns(file, mode).map_err(|e| e.context(path.display()))
}

pub fn parse_returns<R: Read>(input: R, mode: InputMode) -> Result<ReturnTable> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(input);
    let header = reader.headers().map_err(|e| CliError::Data(format!("unreadable header: {e}")))?.clone();
    if header.get(0) != Some("date") {
        return Err(CliError::Data("line 1: first column must be `date`".into()));
    }
    let ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if ids.is_empty() {
        return Err(CliError::Data("line 1: no asset columns".into()));
    }
    for (i, id) in ids.iter().enumerate() {
        if id.is_empty() {
            return Err(CliError::Data(format!("line 1: asset column {} has an empty name", i + 2)));
        }
        if ids[..i].contains(id) {
            return Err(CliError::Data(format!("line 1: duplicate asset `{id}`")));
        }
    }

    let mut rows: Vec<(NaiveDate, u64, Vec<f64>)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(CliError::Data(format!(
                "line {line}: expected {} fields, found {}",
                header.len(),
                record.len()
            )));
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|_| CliError::Data(format!("line {line}: `{}` is not an ISO-8601 date", &record[0])))?;
        let mut values = Vec::with_capacity(ids.len());
        for (id, cell) in ids.iter().zip(record.iter().skip(1)) {
            if cell.is_empty() {
                return Err(CliError::Data(format!("line {line}: empty cell for `{id}`")));
            }
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| CliError::Data(format!("line {line}: `{cell}` is not a number (column `{id}`)")))?;
            values.push(v);
        }
        rows.push((date, line, values));
    }

    if rows.len() < 2 {
        return Err(CliError::Data(format!("need at least 2 data rows, found {}", rows.len())));
    }
    rows.sort_by_key(|r| r.0);
    for pair in rows.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(CliError::Data(format!(
                "duplicate date {} on lines {} and {}",
                pair[0].0,
                pair[0].1.min(pair[1].1),
                pair[0].1.max(pair[1].1)
            )));
        }
    }

    let (dates, values): (Vec<NaiveDate>, Vec<Vec<f64>>) = match mode {
        InputMode::Returns => rows.into_iter().map(|(d, _, v)| (d, v)).unzip(),
        InputMode::Prices => {
            if let Some((_, line, _)) = rows.iter().find(|r| r.2.iter().any(|&p| p <= 0.0)) {
                return Err(CliError::Data(format!("line {line}: prices must be positive")));
            }
            rows.windows(2)
                .map(|p| (p[1].0, p[1].2.iter().zip(&p[0].2).map(|(now, prev)| now / prev - 1.0).collect()))
                .unzip()
        }
    };
    let k = ids.len();
    let values = DMatrix::from_fn(values.len(), k, |i, j| values[i][j]);
    Ok(ReturnTable { dates, asset_ids: ids, values })
}

/// Renders `x` with 12 significant digits; non-finite values are an error.
pub fn fmt_num(x: f64) -> Result<String> {
    if !x.is_finite() {
        return Err(CliError::Numerical(format!("refusing to serialize non-finite value {x}")));
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    Ok(if rounded == 0.0 { "0".into() } else { rounded.to_string() })
}

/// CSV document built in memory, so nothing touches disk until it is complete.
pub struct CsvDoc {
    writer: csv::Writer<Vec<u8>>,
}

impl CsvDoc {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        writer.write_record(header.iter().map(|s| s.as_ref())).expect("in-memory write");
        Self { writer }
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        self.writer.write_record(fields.iter().map(|s| s.as_ref())).expect("in-memory write");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("in-memory flush")
    }
}

pub fn returns_csv(table: &ReturnTable) -> Result<Vec<u8>> {
    let mut header = vec!["date".to_string()];
    header.extend(table.asset_ids.iter().cloned());
    let mut doc = CsvDoc::new(&header);
    for (date, row) in table.dates.iter().zip(table.values.row_iter()) {
        let mut fields = vec![date.to_string()];
        for x in row.iter() {
            fields.push(fmt_num(*x)?);
        }
        doc.row(&fields);
    }
    Ok(doc.into_bytes())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// `n` consecutive weekdays starting at the first weekday on or after `start`.
pub fn weekday_dates(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let is_weekend = |d: NaiveDate| matches!(d.weekday(), Weekday::Sat | Weekday::Sun);
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !is_weekend(d) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// Reads portfolios from a CSV whose header names the assets (in any order),
/// optionally preceded by a `portfolio` column. One portfolio per row.
pub fn read_weights(path: &Path, asset_ids: &[String]) -> Result<Vec<(String, PortfolioWeights)>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_weights(text.as_bytes(), asset_ids).map_err(|e| e.context(path.display()))
}

pub fn parse_weights<R: Read>(input: R, asset_ids: &[String]) -> Result<Vec<(String, PortfolioWeights)>> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(input);
    let header = reader.headers().map_err(|e| CliError::Validation(format!("unreadable header: {e}")))?.clone();
    let named = header.get(0) == Some("portfolio");
    let cols: Vec<&str> = header.iter().skip(usize::from(named)).collect();
    let mut position = Vec::with_capacity(cols.len());
    for c in &cols {
        let idx = asset_ids
            .iter()
            .position(|a| a == c)
            .ok_or_else(|| CliError::Validation(format!("line 1: weight column `{c}` is not an asset in the data")))?;
        if position.contains(&idx) {
            return Err(CliError::Validation(format!("line 1: duplicate weight column `{c}`")));
        }
        position.push(idx);
    }
    if position.len() != asset_ids.len() {
        return Err(CliError::Validation(format!(
            "line 1: weights name {} of the {} assets",
            position.len(),
            asset_ids.len()
        )));
    }

    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Validation(e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(CliError::Validation(format!("line {line}: expected {} fields", header.len())));
        }
        let name = if named { record[0].to_string() } else { format!("P{}", out.len() + 1) };
        let mut w = vec![0.0; asset_ids.len()];
        for (cell, &idx) in record.iter().skip(usize::from(named)).zip(&position) {
            w[idx] = cell
                .parse()
                .map_err(|_| CliError::Validation(format!("line {line}: `{cell}` is not a number")))?;
        }
        let w = PortfolioWeights::new(w).map_err(|e| CliError::Validation(format!("line {line}: {e}")))?;
        out.push((name, w));
    }
    if out.is_empty() {
        return Err(CliError::Validation("weights file has no portfolios".into()));
    }
    Ok(out)
}
