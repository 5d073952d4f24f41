//! Scenario files: a TOML document with `[chart]`, `[construction]`,
//! `[grid]`, `[tolerances]`, `[expect]` and `[outputs]` tables.

use serde::{Deserialize, Serialize};

use super::checks::CheckKind;
use crate::geometry::{
    make_constant_curvature_chart, ChartMetric, CurvatureFamily, Domain, ScalarField, Vec2, VectorField, Warp,
};
use crate::immersion::{GridSpec, Thresholds, Verdict};
use crate::jet::Jet2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub chart: ChartSpec,
    pub construction: ConstructionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
    #[serde(default)]
    pub expect: Expectation,
    #[serde(default)]
    pub outputs: OutputSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartFamily {
    Flat,
    Cos,
    Sin,
    Cosh,
    Sinh,
    Exp,
    /// `b = m − αu`.
    Linear,
    /// `b = 1 + c u³`.
    Cubic,
}

/// A semi-geodesic chart `du² + b² dv²` chosen from the builtin warps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSpec {
    pub family: ChartFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_range: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_range: Option<(f64, f64)>,
}

impl ChartSpec {
    pub fn constant(family: ChartFamily, r: f64) -> Self {
        ChartSpec { family, r: Some(r), alpha: None, m: None, c: None, u_range: None, v_range: None }
    }

    fn curvature_family(&self) -> Option<CurvatureFamily> {
        Some(match self.family {
            ChartFamily::Cos => CurvatureFamily::Cos,
            ChartFamily::Sin => CurvatureFamily::Sin,
            ChartFamily::Cosh => CurvatureFamily::Cosh,
            ChartFamily::Sinh => CurvatureFamily::Sinh,
            ChartFamily::Exp => CurvatureFamily::Exp,
            _ => return None,
        })
    }

    fn require(&self, value: Option<f64>, key: &str) -> Result<f64, (String, String)> {
        match value {
            Some(x) if x.is_finite() => Ok(x),
            Some(x) => Err((key.into(), format!("`{key}` must be finite, got {x}"))),
            None => Err(("family".into(), format!("chart family {:?} needs `{key}`", self.family))),
        }
    }

    fn check_unused(&self, allowed: &[&str]) -> Result<(), (String, String)> {
        let given = [("r", self.r), ("alpha", self.alpha), ("m", self.m), ("c", self.c)];
        for (key, value) in given {
            if value.is_some() && !allowed.contains(&key) {
                return Err((key.into(), format!("`{key}` does not apply to chart family {:?}", self.family)));
            }
        }
        Ok(())
    }

    /// Builds the chart; on failure returns the offending key and a message.
    pub fn build(&self) -> Result<ChartMetric, (String, String)> {
        let chart = match self.family {
            ChartFamily::Flat => {
                self.check_unused(&[])?;
                ChartMetric::flat(Domain::new((-1.5, 1.5), (-1.5, 1.5)))
            }
            ChartFamily::Linear => {
                self.check_unused(&["alpha", "m"])?;
                let (alpha, m) = (self.require(self.alpha, "alpha")?, self.require(self.m, "m")?);
                ChartMetric::semi_geodesic(
                    format!("linear(alpha={alpha},m={m})"),
                    Domain::new((-1.0, 1.0), (-1.5, 1.5)),
                    Warp::Linear { alpha, m },
                )
            }
            ChartFamily::Cubic => {
                self.check_unused(&["c"])?;
                let c = self.require(self.c, "c")?;
                ChartMetric::semi_geodesic(
                    format!("cubic(c={c})"),
                    Domain::new((-0.5, 0.5), (-1.5, 1.5)),
                    Warp::Cubic { c },
                )
            }
            _ => {
                self.check_unused(&["r"])?;
                let r = self.r.unwrap_or(1.0);
                let family = self.curvature_family().expect("constant-curvature family");
                make_constant_curvature_chart(family, r).map_err(|e| ("r".to_string(), e.to_string()))?
            }
        };
        let d = *chart.domain();
        let u = self.u_range.unwrap_or(d.u);
        let v = self.v_range.unwrap_or(d.v);
        for (key, r) in [("u_range", u), ("v_range", v)] {
            if !(r.0 < r.1 && r.0.is_finite() && r.1.is_finite()) {
                return Err((key.into(), format!("`{key}` must be an increasing pair, got {r:?}")));
            }
        }
        let warp = chart.warp().expect("builtin charts are semi-geodesic");
        for i in 0..=200 {
            let x = u.0 + (u.1 - u.0) * i as f64 / 200.0;
            let b = warp.eval(Jet2::constant(x), Jet2::constant(0.0)).v;
            if !(b > 1e-6) {
                return Err(("u_range".into(), format!("warp b = {b} is not positive at u = {x}")));
            }
        }
        Ok(chart.with_domain(Domain::new(u, v)))
    }

    /// Closed-form Gaussian curvature of the chart.
    pub fn expected_curvature(&self, q: &Vec2) -> f64 {
        match self.family {
            ChartFamily::Flat | ChartFamily::Linear => 0.0,
            ChartFamily::Cubic => {
                let c = self.c.unwrap_or(0.0);
                -6.0 * c * q[0] / (1.0 + c * q[0].powi(3))
            }
            _ => self.curvature_family().expect("constant-curvature family").curvature(self.r.unwrap_or(1.0)),
        }
    }
}

fn zero() -> f64 {
    0.0
}

fn one_field() -> ScalarField {
    ScalarField::constant(1.0)
}

fn default_step() -> f64 {
    1e-3
}

fn default_samples() -> usize {
    100
}

fn default_t_range() -> (f64, f64) {
    (-1.0, 1.0)
}

/// One of the catalog constructions with its parameters. Direction vectors
/// are rescaled to unit length in the chart metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstructionSpec {
    Fiber {
        q0: [f64; 2],
    },
    ZeroSection {},
    VectorFieldGraph {
        field: VectorField,
    },
    /// `(t, s) ↦ (γ(s), (t, ξ²(t, s)))` over a curve of constant geodesic curvature.
    Ruled {
        q0: [f64; 2],
        direction: [f64; 2],
        length: f64,
        #[serde(default = "zero")]
        curvature: f64,
        xi2: ScalarField,
        #[serde(default = "default_t_range")]
        t_range: (f64, f64),
    },
    Cylinder {
        q0: [f64; 2],
        direction: [f64; 2],
        e0: [f64; 2],
        #[serde(default = "one_field")]
        rho: ScalarField,
        length: f64,
        #[serde(default = "default_t_range")]
        t_range: (f64, f64),
        #[serde(default = "zero")]
        rotation_rate: f64,
    },
    TmRestriction {
        q0: [f64; 2],
        direction: [f64; 2],
        length: f64,
        #[serde(default = "zero")]
        curvature: f64,
    },
    /// `ξ_t = t(∂₁ + α∂₂) + β∂₂`.
    AffineFamily {
        alpha: ScalarField,
        beta: ScalarField,
        #[serde(default = "default_t_range")]
        t_range: (f64, f64),
    },
    TmGeodesic {
        q0: [f64; 2],
        xi0: [f64; 2],
        horizontal: [f64; 2],
        vertical: [f64; 2],
        length: f64,
        #[serde(default = "default_step")]
        step: f64,
    },
    /// The scalar field equations for `ξ = ρ(cos ω e₁ + sin ω e₂)`.
    FieldEquations {
        rho: ScalarField,
        omega: ScalarField,
    },
    Checks {
        checks: Vec<CheckKind>,
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default)]
        seed: u64,
    },
}

impl ConstructionSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ConstructionSpec::Fiber { .. } => "fiber",
            ConstructionSpec::ZeroSection {} => "zero_section",
            ConstructionSpec::VectorFieldGraph { .. } => "vector_field_graph",
            ConstructionSpec::Ruled { .. } => "ruled",
            ConstructionSpec::Cylinder { rotation_rate, .. } if *rotation_rate != 0.0 => "rotated_cylinder",
            ConstructionSpec::Cylinder { .. } => "cylinder",
            ConstructionSpec::TmRestriction { .. } => "tm_restriction",
            ConstructionSpec::AffineFamily { .. } => "affine_family",
            ConstructionSpec::TmGeodesic { .. } => "tm_geodesic",
            ConstructionSpec::FieldEquations { .. } => "field_equations",
            ConstructionSpec::Checks { .. } => "checks",
        }
    }

    /// Number of grid axes, `None` for check lists.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            ConstructionSpec::Checks { .. } => None,
            ConstructionSpec::TmGeodesic { .. } => Some(1),
            ConstructionSpec::TmRestriction { .. } | ConstructionSpec::AffineFamily { .. } => Some(3),
            _ => Some(2),
        }
    }

    pub fn default_grid(&self) -> Option<GridSpec> {
        let n = match self.dimension()? {
            1 => 41,
            3 => 7,
            _ => 15,
        };
        Some(GridSpec::uniform(self.dimension()?, n))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub totally_geodesic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub not_totally_geodesic: Option<f64>,
}

impl ToleranceSpec {
    pub fn thresholds(&self) -> Thresholds {
        let d = Thresholds::default();
        Thresholds {
            totally_geodesic: self.totally_geodesic.unwrap_or(d.totally_geodesic),
            not_totally_geodesic: self.not_totally_geodesic.unwrap_or(d.not_totally_geodesic),
        }
    }
}

/// What a suite run requires of the scenario.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_intrinsic_gauss: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<String>,
}

/// A configuration problem, anchored to a 1-based line when one is known.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

fn line_of_offset(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

/// Line of `key` inside `[table]`, falling back to the table header, then
/// to `None`. An empty `table` means the root.
pub fn locate(src: &str, table: &str, key: Option<&str>) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            current = line.trim_start_matches('[').split(']').next().unwrap_or("").trim().to_string();
            if current == table {
                header = Some(i + 1);
            }
            continue;
        }
        if current == table {
            if let Some(k) = key {
                let lhs = line.split('=').next().unwrap_or("").trim();
                if line.contains('=') && lhs == k {
                    return Some(i + 1);
                }
            }
        }
    }
    header
}

/// Parses and validates a scenario document.
pub fn parse_scenario(src: &str) -> Result<ScenarioConfig, ConfigIssue> {
    let config: ScenarioConfig = toml::from_str(src).map_err(|e| {
        let line = e.span().map(|s| line_of_offset(src, s.start));
        ConfigIssue {
            line: line.map(|l| unknown_key_line(src, e.message(), l).unwrap_or(l)),
            message: e.message().to_string(),
        }
    })?;
    validate(&config, src)?;
    Ok(config)
}

/// Tagged tables report unknown keys at the table header; find the key itself.
fn unknown_key_line(src: &str, message: &str, from: usize) -> Option<usize> {
    let key = message.strip_prefix("unknown field `")?.split('`').next()?;
    src.lines()
        .enumerate()
        .skip(from - 1)
        .take_while(|(i, l)| *i + 1 == from || !l.trim_start().starts_with('['))
        .find_map(|(i, l)| {
            let rest = l.trim_start().strip_prefix(key)?;
            rest.trim_start().starts_with('=').then_some(i + 1)
        })
}

fn issue(src: &str, table: &str, key: Option<&str>, message: impl Into<String>) -> ConfigIssue {
    ConfigIssue { line: locate(src, table, key), message: message.into() }
}

fn positive(src: &str, table: &str, key: &str, x: f64) -> Result<(), ConfigIssue> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(issue(src, table, Some(key), format!("`{key}` must be positive, got {x}")))
    }
}

fn interval(src: &str, table: &str, key: &str, r: (f64, f64)) -> Result<(), ConfigIssue> {
    if r.0 < r.1 && r.0.is_finite() && r.1.is_finite() {
        Ok(())
    } else {
        Err(issue(src, table, Some(key), format!("`{key}` must be an increasing pair, got {r:?}")))
    }
}

fn nonzero(src: &str, key: &str, x: [f64; 2]) -> Result<(), ConfigIssue> {
    if x.iter().all(|c| c.is_finite()) && x.iter().any(|&c| c != 0.0) {
        Ok(())
    } else {
        Err(issue(src, "construction", Some(key), format!("`{key}` must be a finite nonzero vector, got {x:?}")))
    }
}

/// Semantic checks beyond the schema.
pub fn validate(config: &ScenarioConfig, src: &str) -> Result<(), ConfigIssue> {
    if config.name.trim().is_empty() {
        return Err(issue(src, "", Some("name"), "`name` must not be empty"));
    }
    config.chart.build().map_err(|(key, msg)| issue(src, "chart", Some(&key), msg))?;
    let t = config.tolerances.thresholds();
    t.validate().map_err(|e| issue(src, "tolerances", None, e.to_string()))?;
    let c = "construction";
    match &config.construction {
        ConstructionSpec::Ruled { direction, length, t_range, .. } => {
            nonzero(src, "direction", *direction)?;
            positive(src, c, "length", *length)?;
            interval(src, c, "t_range", *t_range)?;
        }
        ConstructionSpec::Cylinder { direction, e0, length, t_range, rotation_rate, .. } => {
            nonzero(src, "direction", *direction)?;
            nonzero(src, "e0", *e0)?;
            positive(src, c, "length", *length)?;
            interval(src, c, "t_range", *t_range)?;
            if !rotation_rate.is_finite() {
                return Err(issue(src, c, Some("rotation_rate"), "`rotation_rate` must be finite"));
            }
        }
        ConstructionSpec::TmRestriction { direction, length, curvature, .. } => {
            nonzero(src, "direction", *direction)?;
            positive(src, c, "length", *length)?;
            if !curvature.is_finite() {
                return Err(issue(src, c, Some("curvature"), "`curvature` must be finite"));
            }
        }
        ConstructionSpec::AffineFamily { t_range, .. } => interval(src, c, "t_range", *t_range)?,
        ConstructionSpec::TmGeodesic { length, step, horizontal, vertical, .. } => {
            positive(src, c, "length", *length)?;
            positive(src, c, "step", *step)?;
            if *step > *length {
                return Err(issue(src, c, Some("step"), "`step` exceeds `length`"));
            }
            if horizontal.iter().chain(vertical).all(|&x| x == 0.0) {
                return Err(issue(src, c, Some("horizontal"), "initial velocity must be nonzero"));
            }
        }
        ConstructionSpec::Checks { checks, samples, .. } => {
            if checks.is_empty() {
                return Err(issue(src, c, Some("checks"), "`checks` must list at least one check"));
            }
            if *samples == 0 || *samples > 100_000 {
                return Err(issue(src, c, Some("samples"), format!("`samples` must be in 1..=100000, got {samples}")));
            }
        }
        _ => {}
    }
    if let Some(grid) = &config.grid {
        match config.construction.dimension() {
            None => return Err(issue(src, "grid", None, "a check list takes no grid")),
            Some(d) if grid.resolution.len() != d => {
                return Err(issue(
                    src,
                    "grid",
                    Some("resolution"),
                    format!(
                        "{} construction needs {d} grid axes, got {}",
                        config.construction.kind(),
                        grid.resolution.len()
                    ),
                ))
            }
            _ => {}
        }
        if grid.resolution.iter().any(|&n| n == 0 || n > 10_000)
            || grid.resolution.iter().product::<usize>() > 1_000_000
        {
            return Err(issue(
                src,
                "grid",
                Some("resolution"),
                "grid resolution must be in 1..=10000 per axis, 1e6 points total",
            ));
        }
        if let Some(ranges) = &grid.ranges {
            for r in ranges {
                if !(r.0 <= r.1 && r.0.is_finite() && r.1.is_finite()) {
                    return Err(issue(src, "grid", Some("ranges"), format!("grid range {r:?} is not an interval")));
                }
            }
        }
    }
    if let Some(g) = config.expect.max_intrinsic_gauss {
        positive(src, "expect", "max_intrinsic_gauss", g)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIBER: &str = r#"
name = "fiber"

[chart]
family = "cos"
r = 1.0

[construction]
kind = "fiber"
q0 = [0.2, 0.1]
"#;

    #[test]
    fn parses_minimal_scenario() {
        let c = parse_scenario(FIBER).unwrap();
        assert_eq!(c.construction.kind(), "fiber");
        assert_eq!(c.tolerances.thresholds(), Thresholds::default());
        assert!(c.grid.is_none());
    }

    #[test]
    fn missing_chart_is_reported() {
        let src = "name = \"x\"\n[construction]\nkind = \"zero_section\"\n";
        let e = parse_scenario(src).unwrap_err();
        assert!(e.message.contains("chart"), "{e}");
    }

    #[test]
    fn errors_carry_lines() {
        let src = FIBER.replace("r = 1.0", "r = -1.0");
        let e = parse_scenario(&src).unwrap_err();
        assert_eq!(e.line, Some(6), "{e}");
        let src = FIBER.replace("q0 = [0.2, 0.1]", "q0 = [0.2, 0.1]\nbogus = 3");
        let e = parse_scenario(&src).unwrap_err();
        assert_eq!(e.line, Some(11), "{e}");
    }

    #[test]
    fn unknown_family_rejected() {
        let src = FIBER.replace("\"cos\"", "\"torus\"");
        assert_eq!(parse_scenario(&src).unwrap_err().line, Some(5));
    }

    #[test]
    fn warp_must_stay_positive() {
        let src = FIBER.replace("r = 1.0", "r = 1.0\nu_range = [-2.0, 0.0]");
        let e = parse_scenario(&src).unwrap_err();
        assert!(e.message.contains("not positive"), "{e}");
    }

    #[test]
    fn config_round_trips_through_json() {
        let c = parse_scenario(FIBER).unwrap();
        let s = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<ScenarioConfig>(&s).unwrap(), c);
    }
}
