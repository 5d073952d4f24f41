//! Scenario runner: reads scenario files, builds the catalog objects they
//! describe, and produces reports.

mod checks;
mod config;
mod report;
mod run;
mod suites;

use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

pub use checks::{run_check, CheckKind, CheckOutcome};
pub use config::{
    locate, parse_scenario, validate, ChartFamily, ChartSpec, ConfigIssue, ConstructionSpec, Expectation, OutputSpec,
    ScenarioConfig, ToleranceSpec,
};
pub use report::{
    read_csv_summary, read_json, read_trajectory, to_json_string, trajectory_rows, write_csv_summary, write_json,
    write_summary_rows, write_trajectory, Histogram, RunReport, ScenarioReport, SuiteSummary, SummaryRow,
    TrajectoryRow, HISTOGRAM_EDGES,
};
pub use run::{failed_report, run_config, Overrides, ScenarioRun};
pub use suites::{builtin_names, builtin_source, suite_members, SUITE_NAMES};

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpeditionError {
    #[error("{origin}: {issue}")]
    Config { origin: String, issue: ConfigIssue },
    #[error("{scenario}: numerical degeneracy: {message}")]
    Numerical { scenario: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("suite {suite}: expectations not met by {}", .mismatches.join(", "))]
    Expectation { suite: String, mismatches: Vec<String> },
}

impl ExpeditionError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpeditionError::Config { .. } => 2,
            ExpeditionError::Numerical { .. } => 3,
            ExpeditionError::Io { .. } => 4,
            ExpeditionError::Expectation { .. } => 5,
        }
    }

    pub fn io(path: impl AsRef<Path>, e: impl std::fmt::Display) -> Self {
        ExpeditionError::Io { path: path.as_ref().display().to_string(), message: e.to_string() }
    }

    fn config(origin: &str, issue: ConfigIssue) -> Self {
        ExpeditionError::Config { origin: origin.to_string(), issue }
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<(ScenarioConfig, String), ExpeditionError> {
    let path = path.as_ref();
    let src = fs::read_to_string(path).map_err(|e| ExpeditionError::io(path, e))?;
    let config = parse_scenario(&src).map_err(|i| ExpeditionError::config(&path.display().to_string(), i))?;
    Ok((config, src))
}

/// Runs the scenario in `path`.
pub fn run_scenario(path: impl AsRef<Path>, overrides: &Overrides) -> Result<ScenarioRun, ExpeditionError> {
    let (config, src) = load_scenario(path)?;
    run_config(&config, Some(&src), overrides)
}

pub fn load_builtin(name: &str) -> Result<(ScenarioConfig, &'static str), ExpeditionError> {
    let src = builtin_source(name).ok_or_else(|| {
        ExpeditionError::config(
            name,
            ConfigIssue { line: None, message: format!("no builtin scenario named '{name}'") },
        )
    })?;
    let config = parse_scenario(src).map_err(|i| ExpeditionError::config(name, i))?;
    Ok((config, src))
}

pub fn run_builtin(name: &str, overrides: &Overrides) -> Result<ScenarioRun, ExpeditionError> {
    let (config, src) = load_builtin(name)?;
    run_config(&config, Some(src), overrides)
}

/// The first degenerate grid point of a report, as an error.
pub fn degeneracy(report: &ScenarioReport) -> Option<ExpeditionError> {
    report.failures.first().map(|f| ExpeditionError::Numerical {
        scenario: report.name.clone(),
        message: format!(
            "{} of {} grid points failed; first at index {} parameters {:?}: {}",
            report.failures.len(),
            report.grid_points,
            f.index,
            f.params,
            f.message
        ),
    })
}

/// Runs a named suite (or `all`). Scenarios run concurrently and are
/// reported in suite order; a scenario that cannot be evaluated is
/// recorded as failed.
pub fn run_suite(name: &str, overrides: &Overrides) -> Result<RunReport, ExpeditionError> {
    let start = Instant::now();
    let suites: Vec<&str> = if name == "all" { SUITE_NAMES.to_vec() } else { vec![name] };
    let mut members: Vec<Vec<&'static str>> = Vec::new();
    for s in &suites {
        members.push(suite_members(s).ok_or_else(|| {
            ExpeditionError::config(name, ConfigIssue { line: None, message: format!("no suite named '{s}'") })
        })?);
    }
    let mut order: Vec<&'static str> = Vec::new();
    for m in members.iter().flatten() {
        if !order.contains(m) {
            order.push(m);
        }
    }
    let reports: Vec<ScenarioReport> = order
        .par_iter()
        .map(|n| {
            let t = Instant::now();
            let (config, src) = load_builtin(n).expect("builtin scenarios parse");
            match run_config(&config, Some(src), overrides) {
                Ok(run) => run.report,
                Err(e) => failed_report(&overrides.apply(&config), &e, t.elapsed().as_secs_f64()),
            }
        })
        .collect();
    let summaries = suites
        .iter()
        .zip(&members)
        .map(|(s, m)| SuiteSummary {
            name: s.to_string(),
            scenarios: m.len(),
            passed: m.iter().all(|n| reports.iter().any(|r| r.name == *n && r.passed)),
        })
        .collect();
    Ok(RunReport::aggregate(name, summaries, reports, start.elapsed().as_secs_f64()))
}

/// Error for a suite whose expectations failed.
pub fn suite_outcome(report: &RunReport) -> Result<(), ExpeditionError> {
    let bad: Vec<String> = report.scenarios.iter().filter(|s| !s.passed).map(|s| s.name.clone()).collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(ExpeditionError::Expectation { suite: report.name.clone(), mismatches: bad })
    }
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: impl AsRef<Path>, contents: &[u8]) -> Result<(), ExpeditionError> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| ExpeditionError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| ExpeditionError::io(path, e))
}
