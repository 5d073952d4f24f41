//! Run reports and their JSON and CSV forms.
//!
//! Floats are written with 17 significant digits so every value reads back
//! bit-for-bit.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};

use super::checks::CheckOutcome;
use super::config::ScenarioConfig;
use crate::immersion::{PointFailure, Verdict};
use crate::sasaki::TmGeodesic;

/// Upper edges of the residual buckets: `< 1e-10`, `[1e-10, 1e-9)`, …,
/// `[1e-3, 1e-2)`, `≥ 1e-2`.
pub const HISTOGRAM_EDGES: [f64; 9] = [1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: [u64; 10],
}

impl Histogram {
    pub fn bucket(value: f64) -> usize {
        HISTOGRAM_EDGES.iter().position(|&e| value < e).unwrap_or(HISTOGRAM_EDGES.len())
    }

    pub fn add(&mut self, value: f64) {
        self.counts[Self::bucket(value)] += 1;
    }

    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let mut h = Histogram::default();
        for v in values {
            h.add(v);
        }
        h
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub name: String,
    pub chart: String,
    pub construction: String,
    /// `None` for pure check lists.
    pub verdict: Option<Verdict>,
    pub expected_verdict: Option<Verdict>,
    pub max_residual: f64,
    pub max_asymmetry: f64,
    pub grid_points: usize,
    pub histogram: Histogram,
    pub intrinsic_gauss_max: Option<f64>,
    pub checks: Vec<CheckOutcome>,
    pub failures: Vec<PointFailure>,
    /// Set when the scenario could not be evaluated at all.
    pub error: Option<String>,
    pub passed: bool,
    pub wall_time_seconds: f64,
    pub config: ScenarioConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub name: String,
    pub scenarios: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub engine_version: String,
    pub name: String,
    /// The scenario verdict of a single run; `None` for suites.
    pub verdict: Option<Verdict>,
    pub max_residual: f64,
    pub histogram: Histogram,
    pub suites: Vec<SuiteSummary>,
    pub passed: bool,
    pub wall_time_seconds: f64,
    pub scenarios: Vec<ScenarioReport>,
}

impl RunReport {
    pub fn single(report: ScenarioReport) -> Self {
        RunReport {
            engine_version: super::ENGINE_VERSION.to_string(),
            name: report.name.clone(),
            verdict: report.verdict,
            max_residual: report.max_residual,
            histogram: report.histogram,
            suites: Vec::new(),
            passed: report.passed,
            wall_time_seconds: report.wall_time_seconds,
            scenarios: vec![report],
        }
    }

    /// Aggregates scenario reports in the given order.
    pub fn aggregate(
        name: &str,
        suites: Vec<SuiteSummary>,
        scenarios: Vec<ScenarioReport>,
        wall_time_seconds: f64,
    ) -> Self {
        let mut histogram = Histogram::default();
        let mut max_residual = 0.0f64;
        for s in &scenarios {
            histogram.merge(&s.histogram);
            if s.verdict.is_some() {
                max_residual = max_residual.max(s.max_residual);
            }
        }
        RunReport {
            engine_version: super::ENGINE_VERSION.to_string(),
            name: name.to_string(),
            verdict: None,
            max_residual,
            histogram,
            passed: scenarios.iter().all(|s| s.passed),
            suites,
            wall_time_seconds,
            scenarios,
        }
    }

    /// The report with every wall-time field zeroed.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.wall_time_seconds = 0.0;
        for s in &mut r.scenarios {
            s.wall_time_seconds = 0.0;
        }
        r
    }
}

/// Pretty JSON with floats in `{:.16e}` form.
struct ExactFloats(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for ExactFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut out, ExactFloats(serde_json::ser::PrettyFormatter::new()));
    value.serialize(&mut ser).expect("reports serialize to memory");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}

pub fn write_json(report: &RunReport, mut w: impl Write) -> io::Result<()> {
    w.write_all(to_json_string(report).as_bytes())
}

pub fn read_json(mut r: impl Read) -> Result<RunReport, String> {
    let mut s = String::new();
    r.read_to_string(&mut s).map_err(|e| e.to_string())?;
    serde_json::from_str(&s).map_err(|e| e.to_string())
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub name: String,
    pub verdict: Option<Verdict>,
    pub max_residual: f64,
}

impl SummaryRow {
    pub fn from_report(s: &ScenarioReport) -> Self {
        SummaryRow { name: s.name.clone(), verdict: s.verdict, max_residual: s.max_residual }
    }
}

/// One row per scenario: `name,verdict,max_residual`.
pub fn write_csv_summary(report: &RunReport, w: impl Write) -> io::Result<()> {
    let rows: Vec<SummaryRow> = report.scenarios.iter().map(SummaryRow::from_report).collect();
    write_summary_rows(&rows, w)
}

pub fn write_summary_rows(rows: &[SummaryRow], w: impl Write) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["name", "verdict", "max_residual"])?;
    for r in rows {
        let verdict = r.verdict.map_or("", Verdict::as_str);
        out.write_record([r.name.as_str(), verdict, &float(r.max_residual)])?;
    }
    out.flush()
}

pub fn read_csv_summary(r: impl Read) -> Result<Vec<SummaryRow>, String> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>() != ["name", "verdict", "max_residual"] {
        return Err(format!("unexpected header {headers:?}"));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.len() != 3 {
            return Err(format!("row {}: expected 3 fields, got {}", i + 1, rec.len()));
        }
        let verdict = match &rec[1] {
            "" => None,
            v => Some(v.parse::<Verdict>().map_err(|e| format!("row {}: {e}", i + 1))?),
        };
        let max_residual = parse_float(&rec[2]).map_err(|e| format!("row {}: {e}", i + 1))?;
        rows.push(SummaryRow { name: rec[0].to_string(), verdict, max_residual });
    }
    Ok(rows)
}

fn parse_float(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("'{s}' is not a number"))
}

/// One sample of a bundle geodesic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub s: f64,
    pub u: f64,
    pub v: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub speed: f64,
}

pub fn trajectory_rows(geo: &TmGeodesic) -> Vec<TrajectoryRow> {
    geo.samples
        .iter()
        .map(|p| TrajectoryRow {
            s: p.s,
            u: p.point.q[0],
            v: p.point.q[1],
            xi1: p.point.xi[0],
            xi2: p.point.xi[1],
            speed: p.speed,
        })
        .collect()
}

const TRAJECTORY_HEADER: [&str; 6] = ["s", "u", "v", "xi1", "xi2", "speed"];

pub fn write_trajectory(rows: &[TrajectoryRow], w: impl Write) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRAJECTORY_HEADER)?;
    for r in rows {
        out.write_record([r.s, r.u, r.v, r.xi1, r.xi2, r.speed].map(float))?;
    }
    out.flush()
}

pub fn read_trajectory(r: impl Read) -> Result<Vec<TrajectoryRow>, String> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>() != TRAJECTORY_HEADER {
        return Err(format!("unexpected header {headers:?}"));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.len() != 6 {
            return Err(format!("row {}: expected 6 fields, got {}", i + 1, rec.len()));
        }
        let mut x = [0.0; 6];
        for (slot, field) in x.iter_mut().zip(rec.iter()) {
            *slot = parse_float(field).map_err(|e| format!("row {}: {e}", i + 1))?;
        }
        rows.push(TrajectoryRow { s: x[0], u: x[1], v: x[2], xi1: x[3], xi2: x[4], speed: x[5] });
    }
    Ok(rows)
}
