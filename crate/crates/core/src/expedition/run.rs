use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use super::checks::{run_check, CheckOutcome};
use super::config::{locate, ConfigIssue, ConstructionSpec, ScenarioConfig};
use super::report::{trajectory_rows, Histogram, ScenarioReport, TrajectoryRow};
use super::ExpeditionError;
use crate::catalog::{
    lemma2_residual, make_affine_family, make_cylinder, make_fiber, make_ruled, make_tm_geodesic, make_tm_restriction,
    make_vector_field_graph, make_zero_section, AffineFamily3D, CylinderSpec, SemiGeodesicField,
};
use crate::error::GeometryError;
use crate::geometry::{integrate_curve, norm, ChartMetric, CurveOnBase, Vec2};
use crate::immersion::{
    intrinsic_gauss, tg_residual_with, ConnectionRoute, GridSpec, Immersion, PointFailure, Thresholds, Verdict,
};
use crate::sasaki::{compose_local, sasaki_metric_local, TangentBundlePoint, TmGeodesic};

/// Command-line overrides applied on top of a scenario file.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    /// Replaces the totally-geodesic threshold.
    pub tolerance: Option<f64>,
    /// Uniform grid resolution per parameter.
    pub grid: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, config: &ScenarioConfig) -> ScenarioConfig {
        let mut c = config.clone();
        if let Some(t) = self.tolerance {
            c.tolerances.totally_geodesic = Some(t);
        }
        if let (Some(n), Some(d)) = (self.grid, c.construction.dimension()) {
            c.grid = Some(GridSpec::uniform(d, n));
        }
        c
    }
}

/// A finished scenario with its optional trajectory dump.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioRun {
    pub report: ScenarioReport,
    pub trajectory: Option<Vec<TrajectoryRow>>,
}

struct Ctx<'a> {
    name: &'a str,
    src: Option<&'a str>,
}

impl Ctx<'_> {
    fn config(&self, table: &str, key: Option<&str>, message: impl Into<String>) -> ExpeditionError {
        ExpeditionError::Config {
            origin: self.name.to_string(),
            issue: ConfigIssue { line: self.src.and_then(|s| locate(s, table, key)), message: message.into() },
        }
    }

    fn geometry(&self, e: GeometryError) -> ExpeditionError {
        match e {
            GeometryError::InvalidArgument(m) | GeometryError::Precondition(m) => self.config("construction", None, m),
            e @ GeometryError::OutOfDomain { .. } => self.config("construction", None, e.to_string()),
            other => ExpeditionError::Numerical { scenario: self.name.to_string(), message: other.to_string() },
        }
    }
}

fn unit(chart: &ChartMetric, q: Vec2, v: [f64; 2]) -> crate::Result<Vec2> {
    let v = Vec2::from(v);
    let n = norm(&chart.metric_at(&q)?, &v);
    if !(n > 0.0) {
        return Err(GeometryError::InvalidArgument(format!("direction {v:?} has zero length")));
    }
    Ok(v / n)
}

fn curve(
    ctx: &Ctx,
    chart: &ChartMetric,
    q0: [f64; 2],
    dir: [f64; 2],
    length: f64,
    k: f64,
) -> Result<CurveOnBase, ExpeditionError> {
    let q = Vec2::from(q0);
    let x0 = unit(chart, q, dir).map_err(|e| ctx.geometry(e))?;
    let c = integrate_curve(chart, q, x0, 0.0, length, 1e-3, k).map_err(|e| ctx.geometry(e))?;
    if c.truncated() {
        return Err(ctx.config(
            "construction",
            Some("length"),
            format!("base curve leaves the chart before s = {length}"),
        ));
    }
    Ok(c)
}

fn build_immersion(
    ctx: &Ctx,
    chart: &ChartMetric,
    spec: &ConstructionSpec,
) -> Result<(Immersion, Option<Arc<TmGeodesic>>), ExpeditionError> {
    let g = |e| ctx.geometry(e);
    let imm = match spec {
        ConstructionSpec::Fiber { q0 } => make_fiber(chart, Vec2::from(*q0)).map_err(g)?,
        ConstructionSpec::ZeroSection {} => make_zero_section(chart).map_err(g)?,
        ConstructionSpec::VectorFieldGraph { field } => make_vector_field_graph(chart, field.clone()).map_err(g)?,
        ConstructionSpec::Ruled { q0, direction, length, curvature, xi2, t_range } => {
            let c = curve(ctx, chart, *q0, *direction, *length, *curvature)?;
            make_ruled(chart, c, xi2.clone(), *t_range).map_err(g)?
        }
        ConstructionSpec::Cylinder { q0, direction, e0, rho, length, t_range, rotation_rate } => {
            let q = Vec2::from(*q0);
            let x0 = unit(chart, q, *direction).map_err(g)?;
            let e = unit(chart, q, *e0).map_err(g)?;
            let spec = CylinderSpec {
                q0: *q0,
                x0: [x0[0], x0[1]],
                e0: [e[0], e[1]],
                rho: rho.clone(),
                length: *length,
                t_range: *t_range,
                rotation_rate: *rotation_rate,
                step: 1e-3,
            };
            make_cylinder(chart, &spec).map_err(g)?
        }
        ConstructionSpec::TmRestriction { q0, direction, length, curvature } => {
            make_tm_restriction(chart, curve(ctx, chart, *q0, *direction, *length, *curvature)?).map_err(g)?
        }
        ConstructionSpec::AffineFamily { alpha, beta, t_range } => {
            let fam = AffineFamily3D { chart: chart.clone(), alpha: alpha.clone(), beta: beta.clone() };
            make_affine_family(&fam, *t_range).map_err(g)?
        }
        ConstructionSpec::TmGeodesic { q0, xi0, horizontal, vertical, length, step } => {
            let start = TangentBundlePoint::new(Vec2::from(*q0), Vec2::from(*xi0));
            let local = chart.local(&start.q).map_err(g)?;
            let v = compose_local(&local, &start.xi, &Vec2::from(*horizontal), &Vec2::from(*vertical));
            let speed = v.dot(&(sasaki_metric_local(&local, &start.xi) * v)).sqrt();
            let (imm, geo) = make_tm_geodesic(chart, start, v / speed, *length, *step).map_err(g)?;
            return Ok((imm, Some(geo)));
        }
        ConstructionSpec::FieldEquations { .. } | ConstructionSpec::Checks { .. } => {
            unreachable!("not an immersion")
        }
    };
    Ok((imm, None))
}

struct Evaluation {
    verdict: Option<Verdict>,
    max_residual: f64,
    max_asymmetry: f64,
    per_point: Vec<f64>,
    grid_points: usize,
    intrinsic_gauss_max: Option<f64>,
    checks: Vec<CheckOutcome>,
    failures: Vec<PointFailure>,
    trajectory: Option<Vec<TrajectoryRow>>,
}

fn grid_error(ctx: &Ctx, e: GeometryError) -> ExpeditionError {
    match e {
        GeometryError::InvalidArgument(m) => ctx.config("grid", None, m),
        other => ctx.geometry(other),
    }
}

fn evaluate_immersion(
    ctx: &Ctx,
    imm: &Immersion,
    grid: &GridSpec,
    thresholds: Thresholds,
) -> Result<Evaluation, ExpeditionError> {
    let sf = tg_residual_with(imm, grid, thresholds, ConnectionRoute::Lifted).map_err(|e| grid_error(ctx, e))?;
    let intrinsic_gauss_max = if imm.dim() == 2 {
        let values: Vec<Option<f64>> = sf
            .grid
            .par_iter()
            .zip(&sf.per_point)
            .map(|(u, ok)| ok.and_then(|_| intrinsic_gauss(imm, u).ok()).map(f64::abs))
            .collect();
        values.into_iter().flatten().filter(|k| k.is_finite()).reduce(f64::max)
    } else {
        None
    };
    Ok(Evaluation {
        verdict: Some(sf.verdict),
        max_residual: sf.max_residual,
        max_asymmetry: sf.max_asymmetry,
        per_point: sf.per_point.iter().flatten().copied().collect(),
        grid_points: sf.grid.len(),
        intrinsic_gauss_max,
        checks: Vec::new(),
        failures: sf.failures,
        trajectory: None,
    })
}

/// Largest tolerated commutator defect of the frame derivatives of `ρ`.
const COMMUTATOR_TOL: f64 = 1e-6;

fn evaluate_field_equations(
    ctx: &Ctx,
    chart: &ChartMetric,
    field: SemiGeodesicField,
    grid: &GridSpec,
    thresholds: Thresholds,
) -> Result<Evaluation, ExpeditionError> {
    let graph = make_vector_field_graph(chart, field.vector_field()).map_err(|e| ctx.geometry(e))?;
    let points = grid.points(graph.param_box()).map_err(|e| grid_error(ctx, e))?;
    let centre = Vec2::new(points[points.len() / 2][0], points[points.len() / 2][1]);
    if let Err(e @ GeometryError::Precondition(_)) = lemma2_residual(&field, centre) {
        return Err(ctx.config("construction", None, e.to_string()));
    }
    let results: Vec<_> = points.par_iter().map(|u| lemma2_residual(&field, Vec2::new(u[0], u[1]))).collect();
    let mut failures = Vec::new();
    let mut per_point = Vec::new();
    let (mut max_residual, mut defect) = (0.0f64, 0.0f64);
    for (index, (u, r)) in points.iter().zip(results).enumerate() {
        match r {
            Ok(r) => {
                let m = r.max_abs();
                max_residual = max_residual.max(m);
                defect = defect.max(r.commutator_defect);
                per_point.push(m);
            }
            Err(e) => failures.push(PointFailure { index, params: u.clone(), message: e.to_string() }),
        }
    }
    let verdict = if failures.is_empty() { thresholds.classify(max_residual) } else { Verdict::Inconclusive };
    let ambient =
        tg_residual_with(&graph, grid, thresholds, ConnectionRoute::Lifted).map_err(|e| grid_error(ctx, e))?;
    let checks = vec![
        CheckOutcome::new("commutator_defect", defect, COMMUTATOR_TOL, per_point.len()),
        CheckOutcome {
            name: "ambient_agreement".to_string(),
            value: ambient.max_residual,
            tolerance: thresholds.totally_geodesic,
            samples: ambient.grid.len(),
            passed: ambient.verdict == verdict,
        },
    ];
    failures.extend(ambient.failures);
    Ok(Evaluation {
        verdict: Some(verdict),
        max_residual,
        max_asymmetry: ambient.max_asymmetry,
        per_point,
        grid_points: points.len(),
        intrinsic_gauss_max: None,
        checks,
        failures,
        trajectory: None,
    })
}

/// Runs a validated configuration.
pub fn run_config(
    config: &ScenarioConfig,
    src: Option<&str>,
    overrides: &Overrides,
) -> Result<ScenarioRun, ExpeditionError> {
    let start = Instant::now();
    let config = overrides.apply(config);
    let ctx = Ctx { name: &config.name, src };
    let thresholds = config.tolerances.thresholds();
    thresholds.validate().map_err(|e| ctx.config("tolerances", None, e.to_string()))?;
    let chart = config.chart.build().map_err(|(key, m)| ctx.config("chart", Some(&key), m))?;
    let grid = config.grid.clone().or_else(|| config.construction.default_grid());

    let eval = match &config.construction {
        ConstructionSpec::Checks { checks, samples, seed } => {
            let outcomes: Vec<_> = checks
                .par_iter()
                .map(|&k| run_check(k, &config.chart, &chart, *samples, *seed))
                .collect::<crate::Result<_>>()
                .map_err(|e| ctx.geometry(e))?;
            Evaluation {
                verdict: None,
                max_residual: outcomes.iter().map(|c: &CheckOutcome| c.value).fold(0.0, f64::max),
                max_asymmetry: 0.0,
                per_point: Vec::new(),
                grid_points: 0,
                intrinsic_gauss_max: None,
                checks: outcomes,
                failures: Vec::new(),
                trajectory: None,
            }
        }
        ConstructionSpec::FieldEquations { rho, omega } => {
            let field =
                SemiGeodesicField::new(chart.clone(), rho.clone(), omega.clone()).map_err(|e| ctx.geometry(e))?;
            evaluate_field_equations(&ctx, &chart, field, grid.as_ref().expect("surface grid"), thresholds)?
        }
        spec => {
            let (imm, geo) = build_immersion(&ctx, &chart, spec)?;
            let mut eval = evaluate_immersion(&ctx, &imm, grid.as_ref().expect("immersion grid"), thresholds)?;
            if let Some(geo) = geo {
                let length = geo.samples.last().map_or(0.0, |p| p.s);
                eval.checks.push(CheckOutcome::new(
                    "sasaki_energy",
                    geo.speed_drift() / length,
                    1e-7,
                    geo.samples.len(),
                ));
                eval.trajectory = Some(trajectory_rows(&geo));
            }
            eval
        }
    };

    let mut passed = eval.failures.is_empty() && eval.checks.iter().all(|c| c.passed);
    if let Some(v) = config.expect.verdict {
        passed &= eval.verdict == Some(v);
    }
    if let Some(bound) = config.expect.max_intrinsic_gauss {
        passed &= eval.intrinsic_gauss_max.is_some_and(|k| k <= bound);
    }
    let report = ScenarioReport {
        name: config.name.clone(),
        chart: chart.name().to_string(),
        construction: config.construction.kind().to_string(),
        verdict: eval.verdict,
        expected_verdict: config.expect.verdict,
        max_residual: eval.max_residual,
        max_asymmetry: eval.max_asymmetry,
        grid_points: eval.grid_points,
        histogram: Histogram::from_values(eval.per_point),
        intrinsic_gauss_max: eval.intrinsic_gauss_max,
        checks: eval.checks,
        failures: eval.failures,
        error: None,
        passed,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        config: config.clone(),
    };
    Ok(ScenarioRun { report, trajectory: eval.trajectory })
}

/// A report for a scenario that could not be evaluated.
pub fn failed_report(config: &ScenarioConfig, error: &ExpeditionError, wall_time_seconds: f64) -> ScenarioReport {
    ScenarioReport {
        name: config.name.clone(),
        chart: format!("{:?}", config.chart.family).to_lowercase(),
        construction: config.construction.kind().to_string(),
        verdict: None,
        expected_verdict: config.expect.verdict,
        max_residual: 0.0,
        max_asymmetry: 0.0,
        grid_points: 0,
        histogram: Histogram::default(),
        intrinsic_gauss_max: None,
        checks: Vec::new(),
        failures: Vec::new(),
        error: Some(error.to_string()),
        passed: false,
        wall_time_seconds,
        config: config.clone(),
    }
}
