use super::config::{ExperimentConfig, ReportFormat};
use super::fit::SlopeFit;
use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

pub const TOOL_VERSION: &str = concat!("eigenlab ", env!("CARGO_PKG_VERSION"));

/// One grid point of one series.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Record {
    pub index: usize,
    pub series: String,
    pub params: BTreeMap<String, f64>,
    pub metrics: BTreeMap<String, f64>,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub series: String,
    pub x: String,
    pub y: String,
    #[serde(flatten)]
    pub fit: SlopeFit,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub tool: String,
    pub name: String,
    pub kind: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub records: Vec<Record>,
    pub fits: Vec<FitSummary>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl ScanReport {
    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn fit(&self, series: &str) -> Option<&SlopeFit> {
        self.fits
            .iter()
            .find(|f| f.series == series)
            .map(|f| &f.fit)
    }

    pub fn series<'a>(&'a self, series: &'a str) -> impl Iterator<Item = &'a Record> {
        self.records.iter().filter(move |r| r.series == series)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Columns: `index, series, param:*, metric:*, seed, config_hash`, keys
    /// sorted; missing values are empty.
    pub fn to_csv(&self) -> Result<String> {
        let params: BTreeSet<&str> = self
            .records
            .iter()
            .flat_map(|r| r.params.keys().map(String::as_str))
            .collect();
        let metrics: BTreeSet<&str> = self
            .records
            .iter()
            .flat_map(|r| r.metrics.keys().map(String::as_str))
            .collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["index".to_string(), "series".to_string()];
        header.extend(params.iter().map(|k| format!("param:{k}")));
        header.extend(metrics.iter().map(|k| format!("metric:{k}")));
        header.extend(["seed".to_string(), "config_hash".to_string()]);
        w.write_record(&header)?;
        let cell = |m: &BTreeMap<String, f64>, k: &str| {
            m.get(k).map(|v| format!("{v:e}")).unwrap_or_default()
        };
        for r in &self.records {
            let mut row = vec![r.index.to_string(), r.series.clone()];
            row.extend(params.iter().map(|k| cell(&r.params, k)));
            row.extend(metrics.iter().map(|k| cell(&r.metrics, k)));
            row.extend([r.seed.to_string(), r.config_hash.clone()]);
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io {
            path: "<csv buffer>".into(),
            source: e.into_error(),
        })?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Writes `<name>.csv` and/or `<name>.json` under `dir`.
pub fn emit_report(
    report: &ScanReport,
    dir: &Path,
    formats: &[ReportFormat],
) -> Result<Vec<PathBuf>> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| Error::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    for f in formats {
        let (ext, body) = match f {
            ReportFormat::Csv => ("csv", report.to_csv()?),
            ReportFormat::Json => ("json", report.to_json()?),
        };
        let path = dir.join(format!("{}.{ext}", report.name));
        std::fs::write(&path, body).map_err(io(&path))?;
        written.push(path);
    }
    Ok(written)
}
