use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::run::{RunReport, SeriesRow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown output format '{other}'"))),
        }
    }
}

pub const SUMMARY_HEADER: [&str; 7] = ["scheme", "dt", "E0", "dE", "epsE", "epsN", "time"];
pub const SERIES_HEADER: [&str; 7] = ["step", "t", "norm", "energy", "errE", "errN", "newton_iters"];

/// One row of the results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scheme: String,
    pub dt: f64,
    pub e0: f64,
    pub d_e: f64,
    pub eps_e: f64,
    pub eps_n: f64,
    pub time: f64,
}

impl From<&RunReport> for SummaryRow {
    fn from(r: &RunReport) -> Self {
        Self {
            scheme: r.config.scheme.label().to_string(),
            dt: r.config.dt,
            e0: r.e0_energy,
            d_e: r.d_energy,
            eps_e: r.eps_e,
            eps_n: r.eps_n,
            time: r.wall_time,
        }
    }
}

/// Seventeen significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::Serialize {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

pub fn write_summary_csv(rows: &[SummaryRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(SUMMARY_HEADER).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record([
            r.scheme.clone(),
            num(r.dt),
            num(r.e0),
            num(r.d_e),
            num(r.eps_e),
            num(r.eps_n),
            num(r.time),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let parse = |s: &str| -> Result<f64> {
        s.parse().map_err(|_| Error::Serialize {
            path: path.to_path_buf(),
            message: format!("bad number '{s}'"),
        })
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        if rec.len() != SUMMARY_HEADER.len() {
            return Err(Error::Serialize {
                path: path.to_path_buf(),
                message: format!("expected {} fields, got {}", SUMMARY_HEADER.len(), rec.len()),
            });
        }
        rows.push(SummaryRow {
            scheme: rec[0].to_string(),
            dt: parse(&rec[1])?,
            e0: parse(&rec[2])?,
            d_e: parse(&rec[3])?,
            eps_e: parse(&rec[4])?,
            eps_n: parse(&rec[5])?,
            time: parse(&rec[6])?,
        });
    }
    Ok(rows)
}

pub fn write_series_csv(series: &[SeriesRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(SERIES_HEADER).map_err(|e| csv_err(path, e))?;
    for r in series {
        w.write_record([
            r.step.to_string(),
            num(r.t),
            num(r.norm),
            num(r.energy),
            opt(r.err_e.map(num)),
            opt(r.err_n.map(num)),
            opt(r.newton_iters),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Serialize {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// Write the summary row and per-step series of one run. Returns the paths
/// written.
pub fn emit(report: &RunReport, format: Format, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    match format {
        Format::Csv => {
            let summary = dir.join(format!("{stem}_summary.csv"));
            let series = dir.join(format!("{stem}_series.csv"));
            write_summary_csv(&[SummaryRow::from(report)], &summary)?;
            write_series_csv(&report.series, &series)?;
            Ok(vec![summary, series])
        }
        Format::Json => {
            let path = dir.join(format!("{stem}.json"));
            write_json(
                &serde_json::json!({
                    "summary": SummaryRow::from(report),
                    "report": report,
                }),
                &path,
            )?;
            Ok(vec![path])
        }
    }
}

/// Write one summary row per run, in run order, plus each run's series.
pub fn emit_sweep(reports: &[RunReport], format: Format, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    prepare(dir)?;
    let rows: Vec<SummaryRow> = reports.iter().map(SummaryRow::from).collect();
    let mut paths = Vec::new();
    match format {
        Format::Csv => {
            let summary = dir.join(format!("{stem}_summary.csv"));
            write_summary_csv(&rows, &summary)?;
            paths.push(summary);
            for (i, r) in reports.iter().enumerate() {
                let p = dir.join(format!("{stem}_{i}_series.csv"));
                write_series_csv(&r.series, &p)?;
                paths.push(p);
            }
        }
        Format::Json => {
            let p = dir.join(format!("{stem}.json"));
            write_json(&serde_json::json!({ "summary": rows, "reports": reports }), &p)?;
            paths.push(p);
        }
    }
    Ok(paths)
}
