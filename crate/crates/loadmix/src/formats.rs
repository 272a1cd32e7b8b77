//! File formats: load CSV in, CSV tables and model JSON out.

use std::fs;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use loadmix_core::ggmm::{FitReport, GgdComponent, GgmmModel};
use loadmix_core::load::{dataset_from_rows, LoadDataset, LoadSeries};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::provenance::Provenance;

/// Shortest text that parses back to the same `f64`, with an exponent for
/// very large or small magnitudes.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Writes a CSV file led by the provenance comment block.
pub fn write_csv<I>(path: &Path, provenance: &Provenance, header: &[&str], rows: I) -> CliResult<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = provenance.csv_header().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let fail = |e: csv::Error| CliError::parse(path, e);
        w.write_record(header).map_err(fail)?;
        for row in rows {
            w.write_record(&row).map_err(fail)?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    fs::write(path, out).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::parse(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn format_timestamp(unix_s: i64) -> String {
    DateTime::from_timestamp(unix_s, 0)
        .map(|t| t.format("%Y-%m-%dT%H:%M:%SZ").to_string())
        .unwrap_or_else(|| unix_s.to_string())
}

/// RFC 3339 with an offset, or a naive date-time read as UTC.
pub fn parse_timestamp(text: &str) -> Result<i64, String> {
    let t = text.trim();
    let (secs, nanos) = if let Ok(dt) = DateTime::parse_from_rfc3339(t) {
        (dt.timestamp(), dt.timestamp_subsec_nanos())
    } else {
        let naive = ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"]
            .iter()
            .find_map(|f| NaiveDateTime::parse_from_str(t, f).ok())
            .ok_or_else(|| format!("`{t}` is not an ISO-8601 timestamp"))?
            .and_utc();
        (naive.timestamp(), naive.timestamp_subsec_nanos())
    };
    if nanos != 0 {
        return Err(format!("`{t}` has sub-second precision"));
    }
    Ok(secs)
}

pub fn write_series(path: &Path, provenance: &Provenance, series: &LoadSeries) -> CliResult<()> {
    let rows =
        series.values_kw().iter().enumerate().map(|(i, &kw)| vec![format_timestamp(series.timestamp(i)), num(kw)]);
    write_csv(path, provenance, &["timestamp", "kw"], rows)
}

/// Reads a `timestamp,kW` file with a header row; `#` lines are comments.
/// Diagnostics name the file line of the first bad row.
pub fn ingest_csv(path: &Path) -> CliResult<(LoadDataset, Vec<u8>)> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let dataset = parse_load_csv(&bytes, path)?;
    Ok((dataset, bytes))
}

pub fn parse_load_csv(bytes: &[u8], path: &Path) -> CliResult<LoadDataset> {
    let mut reader =
        csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).flexible(true).from_reader(bytes);
    let header = reader.headers().map_err(|e| CliError::parse(path, e))?.clone();
    if header.is_empty() {
        return Err(CliError::parse(path, "file is empty; expected a `timestamp,kw` header"));
    }
    if header.len() != 2 {
        return Err(CliError::parse(path, format!("header has {} columns, expected timestamp and kW", header.len())));
    }
    if parse_timestamp(&header[0]).is_ok() {
        return Err(CliError::parse(path, "missing header row; the first line holds data"));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::parse(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let at = |msg: String| CliError::parse(path, format!("line {line}: {msg}"));
        if record.len() != 2 {
            return Err(at(format!("expected 2 fields, found {}", record.len())));
        }
        let ts = parse_timestamp(&record[0]).map_err(at)?;
        let field = &record[1];
        if field.is_empty() {
            return Err(at("kW value is missing".into()));
        }
        let kw: f64 = field.parse().map_err(|_| at(format!("`{field}` is not a number")))?;
        rows.push((line, ts, kw));
    }
    dataset_from_rows(rows, path.display().to_string()).map_err(|e| match e {
        loadmix_core::Error::InvalidRow { row, fault } => CliError::parse(path, format!("line {row}: {fault}")),
        loadmix_core::Error::EmptySeries => CliError::parse(path, "no data rows"),
        other => CliError::parse(path, other),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentEntry {
    pub weight: f64,
    pub location: f64,
    pub scale: f64,
    pub shape: f64,
}

/// Fitted mixture as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(rename = "M")]
    pub order: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub components: Vec<ComponentEntry>,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub mse: f64,
    pub provenance: Provenance,
}

impl ModelFile {
    pub fn from_report(report: &FitReport, provenance: Provenance) -> Self {
        let m = &report.model;
        Self {
            order: m.order(),
            epsilon: report.epsilon,
            seed: provenance.seed,
            components: m
                .weights()
                .iter()
                .zip(m.components())
                .map(|(&weight, c)| ComponentEntry {
                    weight,
                    location: c.location(),
                    scale: c.scale(),
                    shape: c.shape(),
                })
                .collect(),
            log_likelihood: report.log_likelihood(),
            iterations: report.iterations,
            mse: report.mse_vs_histogram,
            provenance,
        }
    }

    pub fn read(path: &Path) -> CliResult<(Self, Vec<u8>)> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        let file: ModelFile = serde_json::from_slice(&bytes).map_err(|e| CliError::parse(path, e))?;
        Ok((file, bytes))
    }

    /// Validated mixture; any defect is reported as a parse error of `path`.
    pub fn model(&self, path: &Path) -> CliResult<GgmmModel> {
        if self.order != self.components.len() {
            return Err(CliError::parse(
                path,
                format!("M = {} but {} components listed", self.order, self.components.len()),
            ));
        }
        let bad = |e: loadmix_core::Error| CliError::parse(path, e);
        let components = self
            .components
            .iter()
            .map(|c| GgdComponent::new(c.location, c.scale, c.shape).map_err(bad))
            .collect::<CliResult<Vec<_>>>()?;
        GgmmModel::new(self.components.iter().map(|c| c.weight).collect(), components).map_err(bad)
    }
}
