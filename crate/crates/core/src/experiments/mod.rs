//! Config-driven scans and their reports.

mod config;
mod fit;
mod report;
mod scans;

pub use config::{
    tensor_sum, CheckConfig, CoefficientConfig, ExperimentConfig, Metric, MixtureComponent,
    ProblemConfig, ReportFormat, ScanConfig, Sweep,
};
pub use fit::{fit_loglog, SlopeFit};
pub use report::{emit_report, Check, FitSummary, Record, ScanReport, TOOL_VERSION};
pub use scans::{continuum_eigenvalue, scans, Collector, Scan};

use crate::error::Result;

/// Runs the scan named by `config.scan.kind`.
pub fn run_scan(config: &ExperimentConfig) -> Result<ScanReport> {
    config.validate()?;
    let scan = scans().get(&config.scan.kind)?;
    let mut out = Collector::new(config);
    scan.run(config, &mut out)?;
    Ok(out.finish(config))
}

fn run_kind(config: &ExperimentConfig, kind: &str) -> Result<ScanReport> {
    let mut c = config.clone();
    c.scan.kind = kind.into();
    run_scan(&c)
}

pub fn run_truncation_scan(config: &ExperimentConfig) -> Result<ScanReport> {
    run_kind(config, "truncation")
}

pub fn run_splitting_scan(config: &ExperimentConfig) -> Result<ScanReport> {
    run_kind(config, "splitting")
}

pub fn run_resolution_scan(config: &ExperimentConfig) -> Result<ScanReport> {
    run_kind(config, "resolution")
}

pub fn run_sampling_experiment(config: &ExperimentConfig) -> Result<ScanReport> {
    run_kind(config, "sampling")
}

pub fn run_cost_table(config: &ExperimentConfig) -> Result<ScanReport> {
    run_kind(config, "cost")
}
