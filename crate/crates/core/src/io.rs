//! CSV and JSON files exchanged with the command line and batch harness.
//!
//! Floats are written in Rust's shortest round-trip form, so every value
//! read back is bit-identical to the one written.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::affine::{CurveId, ModelParams};
use crate::error::{Error, Result};
use crate::gpr::{ConfidenceInterval, ObservationSet};
use crate::simulator::{SimulatedSeries, TimeGrid};

fn curve_column(c: CurveId) -> &'static str {
    match c {
        CurveId::Zero => "logP_zero",
        CurveId::Delta => "logP_delta",
    }
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Header plus rows of a CSV file, each row tagged with its line number.
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<(u64, Vec<String>)>,
    path: PathBuf,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
        let headers = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_err(path, line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            rows.push((line, rec.iter().map(str::to_string).collect()));
        }
        Ok(Table {
            headers,
            rows,
            path: path.to_path_buf(),
        })
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(&self.path, 1, format!("missing column '{name}'")))
    }

    pub fn f64_at(&self, row: usize, col: usize) -> Result<f64> {
        let (line, fields) = &self.rows[row];
        let raw = fields
            .get(col)
            .ok_or_else(|| parse_err(&self.path, *line, "missing field"))?;
        raw.parse::<f64>()
            .map_err(|_| parse_err(&self.path, *line, format!("'{raw}' is not a number")))
    }

    pub fn str_at(&self, row: usize, col: usize) -> Result<&str> {
        let (line, fields) = &self.rows[row];
        fields
            .get(col)
            .map(String::as_str)
            .ok_or_else(|| parse_err(&self.path, *line, "missing field"))
    }

    pub fn line(&self, row: usize) -> u64 {
        self.rows[row].0
    }
}

/// Metadata written next to a simulated series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub params: ModelParams,
    pub seed: Option<u64>,
    pub maturity: f64,
    pub n_points: usize,
    pub curves: Vec<CurveId>,
}

/// The JSON sidecar for a series file: same stem, `.json` extension.
pub fn sidecar_path(series_path: &Path) -> PathBuf {
    series_path.with_extension("json")
}

pub fn write_series_csv(path: &Path, series: &SimulatedSeries) -> Result<()> {
    write_series_to(File::create(path)?, series)
}

pub fn write_series_to<W: Write>(out: W, series: &SimulatedSeries) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let curves: Vec<CurveId> = series.curves.keys().copied().collect();
    let mut header = vec!["t".to_string()];
    header.extend(curves.iter().map(|&c| curve_column(c).to_string()));
    w.write_record(&header)?;
    for (i, t) in series.grid.points().iter().enumerate() {
        let mut row = vec![t.to_string()];
        row.extend(curves.iter().map(|c| series.curves[c][i].to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_series_sidecar(path: &Path, series: &SimulatedSeries) -> Result<()> {
    let meta = SeriesMeta {
        params: series.params,
        seed: series.seed,
        maturity: series.grid.maturity(),
        n_points: series.grid.len(),
        curves: series.curves.keys().copied().collect(),
    };
    write_json(path, &meta)
}

/// Writes `<path>` and its `.json` sidecar.
pub fn write_series(path: &Path, series: &SimulatedSeries) -> Result<()> {
    write_series_csv(path, series)?;
    write_series_sidecar(&sidecar_path(path), series)
}

pub fn read_sidecar(path: &Path) -> Result<SeriesMeta> {
    Ok(serde_json::from_reader(File::open(path)?)?)
}

/// Times and per-curve values of a series CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesTable {
    pub times: Vec<f64>,
    pub curves: BTreeMap<CurveId, Vec<f64>>,
}

impl SeriesTable {
    pub fn into_observations(self, maturity: f64, noise_var: f64) -> Result<ObservationSet> {
        ObservationSet::new(TimeGrid::new(self.times, maturity)?, self.curves, noise_var)
    }
}

pub fn read_series_csv(path: &Path) -> Result<SeriesTable> {
    let table = Table::read(path)?;
    let t_col = table.column("t")?;
    let mut cols = Vec::new();
    for c in [CurveId::Zero, CurveId::Delta] {
        if let Some(i) = table.headers.iter().position(|h| h == curve_column(c)) {
            cols.push((c, i));
        }
    }
    if cols.is_empty() {
        return Err(parse_err(path, 1, "no logP_zero or logP_delta column"));
    }
    let mut times = Vec::with_capacity(table.rows.len());
    let mut curves: BTreeMap<CurveId, Vec<f64>> = cols.iter().map(|&(c, _)| (c, Vec::new())).collect();
    for r in 0..table.rows.len() {
        let t = table.f64_at(r, t_col)?;
        if times.last().is_some_and(|&prev| t <= prev) {
            return Err(parse_err(path, table.line(r), "times must be strictly increasing"));
        }
        times.push(t);
        for &(c, i) in &cols {
            curves.get_mut(&c).expect("column registered").push(table.f64_at(r, i)?);
        }
    }
    Ok(SeriesTable { times, curves })
}

/// Reads a series and its maturity: from `maturity` if given, otherwise
/// from the sidecar.
pub fn read_observations(path: &Path, maturity: Option<f64>, noise_var: f64) -> Result<ObservationSet> {
    let table = read_series_csv(path)?;
    let maturity = match maturity {
        Some(m) => m,
        None => {
            let side = sidecar_path(path);
            if !side.exists() {
                return Err(Error::Config(format!(
                    "no maturity given and no sidecar {} found",
                    side.display()
                )));
            }
            read_sidecar(&side)?.maturity
        }
    };
    table.into_observations(maturity, noise_var)
}

pub fn write_band_csv(path: &Path, band: &[ConfidenceInterval]) -> Result<()> {
    write_band_to(File::create(path)?, band)
}

pub fn write_band_to<W: Write>(out: W, band: &[ConfidenceInterval]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "curve", "mean", "lower", "upper"])?;
    for b in band {
        w.write_record([
            b.t.to_string(),
            b.curve.to_string(),
            b.mean.to_string(),
            b.lower.to_string(),
            b.upper.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_band_csv(path: &Path) -> Result<Vec<ConfidenceInterval>> {
    let table = Table::read(path)?;
    let [t, c, m, lo, hi] = ["t", "curve", "mean", "lower", "upper"].map(|n| table.column(n));
    let (t, c, m, lo, hi) = (t?, c?, m?, lo?, hi?);
    (0..table.rows.len())
        .map(|r| {
            let curve = table
                .str_at(r, c)?
                .parse::<CurveId>()
                .map_err(|e| parse_err(path, table.line(r), e.to_string()))?;
            Ok(ConfidenceInterval {
                t: table.f64_at(r, t)?,
                curve,
                mean: table.f64_at(r, m)?,
                lower: table.f64_at(r, lo)?,
                upper: table.f64_at(r, hi)?,
            })
        })
        .collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(File::open(path)?)?)
}

/// Optional per-iteration optimizer trace as `iter,nll,grad_norm`.
pub fn write_trace_csv(path: &Path, trace: &[crate::optimize::TraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["iter", "nll", "grad_norm"])?;
    for r in trace {
        w.write_record([r.iter.to_string(), r.nll.to_string(), r.grad_norm.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
