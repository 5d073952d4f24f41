//! Constructors for the submanifold families of the tangent bundle and
//! evaluators for the totally-geodesic field equations.

mod residuals;

pub use residuals::{
    eq5_residual, eq7_residual, find_kernel_direction, graph_second_form_norm, lemma1_residual, lemma2_residual,
    parallel_family_check, tg_eqn3_residual, KernelDirection, Lemma1Residual, Lemma2Residual, ParallelFamilyResidual,
};

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::geometry::{
    integrate_curve, norm, parallel_transport, rotate_quarter, ChartKind, ChartMetric, CurveOnBase, ScalarField,
    TransportedField, Vec2, Vec4, VectorField,
};
use crate::immersion::Immersion;
use crate::interp::{self, Knot};
use crate::sasaki::{tm_geodesic_integrate, TangentBundlePoint, TmGeodesic};

/// Margin kept between a sampled curve's ends and the parameter box, so
/// derivative stencils stay on sampled data.
pub const CURVE_PAD: f64 = 0.01;
/// Margin kept between a chart domain and the parameter box of a section.
const SECTION_SHRINK: f64 = 0.02;

/// Default box of fiber coordinates.
pub const FIBER_BOX: [(f64, f64); 2] = [(-1.0, 1.0), (-1.0, 1.0)];

/// A vector field in semi-geodesic coordinates, `ξ = ρ (cos ω e₁ + sin ω e₂)`.
#[derive(Clone, Debug)]
pub struct SemiGeodesicField {
    pub chart: ChartMetric,
    pub rho: ScalarField,
    pub omega: ScalarField,
}

impl SemiGeodesicField {
    pub fn new(chart: ChartMetric, rho: ScalarField, omega: ScalarField) -> Result<Self> {
        if chart.kind() != ChartKind::SemiGeodesic {
            return Err(GeometryError::InvalidArgument(format!("{} is not a semi-geodesic chart", chart.name())));
        }
        Ok(SemiGeodesicField { chart, rho, omega })
    }

    /// `ξ` itself.
    pub fn vector_field(&self) -> VectorField {
        VectorField::Polar { rho: self.rho.clone(), omega: self.omega.clone() }
    }

    /// The unit field `e_ξ`.
    pub fn unit_field(&self) -> VectorField {
        VectorField::Polar { rho: ScalarField::constant(1.0), omega: self.omega.clone() }
    }
}

/// The three-parameter family `ξ_t = t a + b` with `a = ∂₁ + α∂₂`, `b = β∂₂`.
#[derive(Clone, Debug)]
pub struct AffineFamily3D {
    pub chart: ChartMetric,
    pub alpha: ScalarField,
    pub beta: ScalarField,
}

fn section_box(chart: &ChartMetric) -> Vec<(f64, f64)> {
    let d = chart.domain().shrink(SECTION_SHRINK);
    vec![d.u, d.v]
}

fn curve_box(curve: &CurveOnBase) -> Result<(f64, f64)> {
    let (a, b) = curve.s_range();
    if b - a <= 2.0 * CURVE_PAD {
        return Err(GeometryError::InvalidArgument(format!("base curve too short: [{a}, {b}]")));
    }
    Ok((a + CURVE_PAD, b - CURVE_PAD))
}

fn check_range(name: &str, r: (f64, f64)) -> Result<()> {
    if !(r.0 < r.1) || !r.0.is_finite() || !r.1.is_finite() {
        return Err(GeometryError::InvalidArgument(format!("{name} range must be a non-empty interval, got {r:?}")));
    }
    Ok(())
}

/// The fiber `T_{q0}M` with fiber coordinates in [`FIBER_BOX`].
pub fn make_fiber(chart: &ChartMetric, q0: Vec2) -> Result<Immersion> {
    chart.check_domain(&q0)?;
    Immersion::new(chart.clone(), "fiber", FIBER_BOX.to_vec(), move |u: &[f64]| {
        Ok(TangentBundlePoint::new(q0, Vec2::new(u[0], u[1])))
    })
}

pub fn make_zero_section(chart: &ChartMetric) -> Result<Immersion> {
    Immersion::new(chart.clone(), "zero_section", section_box(chart), |u: &[f64]| {
        Ok(TangentBundlePoint::new(Vec2::new(u[0], u[1]), Vec2::zeros()))
    })
}

/// The image `ξ(M)` of a vector field.
pub fn make_vector_field_graph(chart: &ChartMetric, xi: VectorField) -> Result<Immersion> {
    let c = chart.clone();
    Immersion::new(chart.clone(), "vector_field_graph", section_box(chart), move |u: &[f64]| {
        let q = Vec2::new(u[0], u[1]);
        Ok(TangentBundlePoint::new(q, xi.value(&c, &q)?))
    })
}

/// `(t, s) ↦ (γ(s), (t, ξ²(t, s)))`, with `ξ²` read as a field in `(t, s)`.
pub fn make_ruled(chart: &ChartMetric, curve: CurveOnBase, xi2: ScalarField, t_range: (f64, f64)) -> Result<Immersion> {
    check_range("t", t_range)?;
    curve.validate(chart)?;
    let s_box = curve_box(&curve)?;
    Immersion::new(chart.clone(), "ruled", vec![t_range, s_box], move |u: &[f64]| {
        let (t, s) = (u[0], u[1]);
        Ok(TangentBundlePoint::new(curve.position(s), Vec2::new(t, xi2.value(&Vec2::new(t, s)))))
    })
}

/// Parameters of a cylinder-type surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderSpec {
    pub q0: [f64; 2],
    /// Unit initial direction of the base geodesic.
    pub x0: [f64; 2],
    /// Unit vector at `q0` transported along the geodesic.
    pub e0: [f64; 2],
    /// `ρ(s)`, evaluated as a scalar field at `(s, 0)`.
    pub rho: ScalarField,
    pub length: f64,
    pub t_range: (f64, f64),
    /// Extra rotation of `e(s)` by `rotation_rate · s`; zero for the genuine cylinder.
    #[serde(default)]
    pub rotation_rate: f64,
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_step() -> f64 {
    1e-3
}

/// `(s, t) ↦ (γ(s), t ρ(s) e(s))` with `γ` a geodesic and `e` parallel along it.
pub fn make_cylinder(chart: &ChartMetric, spec: &CylinderSpec) -> Result<Immersion> {
    check_range("t", spec.t_range)?;
    let q0 = Vec2::from(spec.q0);
    let (x0, e0) = (Vec2::from(spec.x0), Vec2::from(spec.e0));
    let g = chart.metric_at(&q0)?;
    for (name, v) in [("x0", x0), ("e0", e0)] {
        if (norm(&g, &v) - 1.0).abs() > 1e-9 {
            return Err(GeometryError::Precondition(format!("{name} must be unit, |{name}| = {}", norm(&g, &v))));
        }
    }
    let curve = integrate_curve(chart, q0, x0, 0.0, spec.length, spec.step, 0.0)?;
    if curve.truncated() {
        return Err(GeometryError::Precondition(format!(
            "base geodesic leaves {} before s = {}",
            chart.name(),
            spec.length
        )));
    }
    let transported = parallel_transport(chart, &curve, e0)?;
    let s_box = curve_box(&curve)?;
    let (c, rho, rate) = (chart.clone(), spec.rho.clone(), spec.rotation_rate);
    let label = if rate == 0.0 { "cylinder" } else { "rotated_cylinder" };
    Immersion::new(chart.clone(), label, vec![s_box, spec.t_range], move |u: &[f64]| {
        let (s, t) = (u[0], u[1]);
        let q = curve.position(s);
        let e = rotated(&c, &transported, q, s, rate)?;
        Ok(TangentBundlePoint::new(q, e * (t * rho.value(&Vec2::new(s, 0.0)))))
    })
}

fn rotated(chart: &ChartMetric, e: &TransportedField, q: Vec2, s: f64, rate: f64) -> Result<Vec2> {
    let v = e.at(s);
    if rate == 0.0 {
        return Ok(v);
    }
    let g = chart.local_unchecked(&q)?.g;
    let (sn, cs) = (rate * s).sin_cos();
    Ok(v * cs + rotate_quarter(&g, &v) * sn)
}

/// `(s, t1, t2) ↦ (γ(s), (t1, t2))`, the bundle restricted to a curve.
pub fn make_tm_restriction(chart: &ChartMetric, curve: CurveOnBase) -> Result<Immersion> {
    curve.validate(chart)?;
    let s_box = curve_box(&curve)?;
    Immersion::new(chart.clone(), "tm_restriction", vec![s_box, FIBER_BOX[0], FIBER_BOX[1]], move |u: &[f64]| {
        Ok(TangentBundlePoint::new(curve.position(u[0]), Vec2::new(u[1], u[2])))
    })
}

/// `(u¹, u², t) ↦ ((u¹, u²), t a + b)`.
pub fn make_affine_family(fam: &AffineFamily3D, t_range: (f64, f64)) -> Result<Immersion> {
    check_range("t", t_range)?;
    let mut param_box = section_box(&fam.chart);
    param_box.push(t_range);
    let (alpha, beta) = (fam.alpha.clone(), fam.beta.clone());
    Immersion::new(fam.chart.clone(), "affine_family", param_box, move |u: &[f64]| {
        let q = Vec2::new(u[0], u[1]);
        let t = u[2];
        Ok(TangentBundlePoint::new(q, Vec2::new(t, t * alpha.value(&q) + beta.value(&q))))
    })
}

/// A Sasaki geodesic as a one-dimensional immersion, with the integrated
/// trajectory for dumping.
pub fn make_tm_geodesic(
    chart: &ChartMetric,
    start: TangentBundlePoint,
    v0: Vec4,
    length: f64,
    step: f64,
) -> Result<(Immersion, Arc<TmGeodesic>)> {
    let geo = Arc::new(tm_geodesic_integrate(chart, &start, &v0, length, step)?);
    if geo.truncated || geo.samples.len() < 2 {
        return Err(GeometryError::Precondition(format!(
            "Sasaki geodesic leaves {} before s = {length}",
            chart.name()
        )));
    }
    let last = geo.samples[geo.samples.len() - 1].s;
    if last <= 2.0 * CURVE_PAD {
        return Err(GeometryError::InvalidArgument(format!("Sasaki geodesic too short: {last}")));
    }
    let g = Arc::clone(&geo);
    let imm = Immersion::new(chart.clone(), "tm_geodesic", vec![(CURVE_PAD, last - CURVE_PAD)], move |u: &[f64]| {
        let knot = |i: usize| {
            let k = &g.samples[i];
            Knot { s: k.s, p: k.point.coords(), dp: k.velocity, ddp: k.acceleration }
        };
        let [p, _, _] = interp::sample_with(g.samples.len(), knot, u[0]);
        Ok(TangentBundlePoint::from_coords(&p))
    })?;
    Ok((imm, geo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{geodesic_integrate, make_constant_curvature_chart, CurvatureFamily, Domain, Warp};
    use crate::immersion::{intrinsic_gauss, normal_frame, tangent_frame, tg_residual, GridSpec, Verdict};
    use crate::sasaki::{lift_local, LiftKind};

    fn sphere() -> ChartMetric {
        make_constant_curvature_chart(CurvatureFamily::Cos, 1.0).unwrap()
    }

    fn equator_cylinder(rho: ScalarField, rate: f64) -> CylinderSpec {
        CylinderSpec {
            q0: [0.0, -1.2],
            x0: [0.0, 1.0],
            e0: [0.0, 1.0],
            rho,
            length: 2.0,
            t_range: (-1.0, 1.0),
            rotation_rate: rate,
            step: 1e-3,
        }
    }

    #[test]
    fn fiber_frame_is_vertical() {
        let imm = make_fiber(&sphere(), Vec2::new(0.3, 0.0)).unwrap();
        let t = tangent_frame(&imm, &[0.1, 0.2]).unwrap();
        assert!((t[0] - Vec4::new(0.0, 0.0, 1.0, 0.0)).norm() < 1e-12);
        assert!((t[1] - Vec4::new(0.0, 0.0, 0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_section_frame_is_horizontal() {
        let chart = sphere();
        let imm = make_zero_section(&chart).unwrap();
        let t = tangent_frame(&imm, &[0.2, 0.1]).unwrap();
        assert!((t[0] - Vec4::new(1.0, 0.0, 0.0, 0.0)).norm() < 1e-12);
        assert!((t[1] - Vec4::new(0.0, 1.0, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn cylinder_is_totally_geodesic_and_flat() {
        let chart = sphere();
        for rho in [ScalarField::constant(1.0), ScalarField::affine(1.0, 0.5, 0.0)] {
            let imm = make_cylinder(&chart, &equator_cylinder(rho, 0.0)).unwrap();
            let r = tg_residual(&imm, &GridSpec::uniform(2, 7)).unwrap();
            assert_eq!(r.verdict, Verdict::TotallyGeodesic, "{}", r.max_residual);
            let k = intrinsic_gauss(&imm, &[0.7, 0.4]).unwrap();
            assert!(k.abs() < 1e-4, "{k}");
        }
        let imm = make_cylinder(&chart, &equator_cylinder(ScalarField::constant(1.0), 0.3)).unwrap();
        let r = tg_residual(&imm, &GridSpec::uniform(2, 7)).unwrap();
        assert_eq!(r.verdict, Verdict::NotTotallyGeodesic, "{}", r.max_residual);
    }

    #[test]
    fn cylinder_frames_match_construction() {
        // tangent basis (τ^h + tρ'e^v, ρe^v), normals span {ν^h, (e^⊥)^v}
        let chart = sphere();
        let spec = CylinderSpec {
            q0: [0.1, -0.5],
            x0: [0.6, 0.8 / 0.1f64.cos()],
            e0: [0.8, -0.6 / 0.1f64.cos()],
            rho: ScalarField::affine(1.0, 0.5, 0.0),
            length: 1.0,
            t_range: (-1.0, 1.0),
            rotation_rate: 0.0,
            step: 1e-3,
        };
        let imm = make_cylinder(&chart, &spec).unwrap();
        let curve = geodesic_integrate(&chart, Vec2::from(spec.q0), Vec2::from(spec.x0), 1.0, 1e-3).unwrap();
        let e = parallel_transport(&chart, &curve, Vec2::from(spec.e0)).unwrap();
        let (s, t) = (0.4, 0.3);
        let (q, tau, _) = curve.at(s);
        let es = e.at(s);
        let local = chart.local(&q).unwrap();
        let xi = es * (t * (1.0 + 0.5 * s));
        let frame = tangent_frame(&imm, &[s, t]).unwrap();
        let want0 = lift_local(&local, &xi, &tau, LiftKind::Horizontal)
            + lift_local(&local, &xi, &(es * (0.5 * t)), LiftKind::Vertical);
        let want1 = lift_local(&local, &xi, &(es * (1.0 + 0.5 * s)), LiftKind::Vertical);
        assert!((frame[0] - want0).norm() < 1e-8);
        assert!((frame[1] - want1).norm() < 1e-8);

        let nu = rotate_quarter(&local.g, &tau);
        let eperp = rotate_quarter(&local.g, &es);
        let expected =
            [lift_local(&local, &xi, &nu, LiftKind::Horizontal), lift_local(&local, &xi, &eperp, LiftKind::Vertical)];
        let normals = normal_frame(&imm, &[s, t]).unwrap();
        let big = crate::sasaki::sasaki_metric_local(&local, &xi);
        // each expected normal lies in the span of the computed ones
        for n in expected {
            let proj: Vec4 = normals.iter().map(|m| m * m.dot(&(big * n))).sum();
            assert!((proj - n).norm() < 1e-8);
        }
    }

    #[test]
    fn tm_restriction_cases() {
        let flat = ChartMetric::flat(Domain::new((-2.0, 2.0), (-2.0, 2.0)));
        let line = geodesic_integrate(&flat, Vec2::new(-1.0, 0.2), Vec2::new(0.8, 0.6), 1.5, 1e-3).unwrap();
        let r = tg_residual(&make_tm_restriction(&flat, line).unwrap(), &GridSpec::uniform(3, 4)).unwrap();
        assert_eq!(r.verdict, Verdict::TotallyGeodesic);

        let chart = sphere();
        let eq = geodesic_integrate(&chart, Vec2::new(0.0, -1.0), Vec2::new(0.0, 1.0), 2.0, 1e-3).unwrap();
        let imm = make_tm_restriction(&chart, eq).unwrap();
        let r = tg_residual(&imm, &GridSpec::uniform(3, 4)).unwrap();
        assert_eq!(r.verdict, Verdict::NotTotallyGeodesic);
        let n = normal_frame(&imm, &[0.5, 0.3, -0.2]).unwrap();
        assert_eq!(n.len(), 1);
        // single normal ν^h = ±∂u at the equator
        assert!((n[0].abs() - Vec4::new(1.0, 0.0, 0.0, 0.0)).norm() < 1e-8);

        let cubic = ChartMetric::semi_geodesic("cubic", Domain::new((-0.5, 0.5), (-1.5, 1.5)), Warp::Cubic { c: 1.0 });
        let axis = geodesic_integrate(&cubic, Vec2::new(0.0, -1.0), Vec2::new(0.0, 1.0), 2.0, 1e-3).unwrap();
        let r = tg_residual(&make_tm_restriction(&cubic, axis).unwrap(), &GridSpec::uniform(3, 4)).unwrap();
        assert!(r.max_residual <= 1e-5, "{}", r.max_residual);
    }

    #[test]
    fn affine_families() {
        let flat = ChartMetric::flat(Domain::new((-1.0, 1.0), (-1.0, 1.0)));
        let plane = AffineFamily3D {
            chart: flat.clone(),
            alpha: ScalarField::constant(0.4),
            beta: ScalarField::affine(0.1, 0.3, -0.2),
        };
        let r = tg_residual(&make_affine_family(&plane, (-1.0, 1.0)).unwrap(), &GridSpec::uniform(3, 4)).unwrap();
        assert_eq!(r.verdict, Verdict::TotallyGeodesic);
        let bent = AffineFamily3D {
            beta: ScalarField::Quadratic { c0: 0.0, cu: 0.0, cv: 0.0, cuu: 1.0, cuv: 0.0, cvv: 0.0 },
            ..plane
        };
        let r = tg_residual(&make_affine_family(&bent, (-1.0, 1.0)).unwrap(), &GridSpec::uniform(3, 4)).unwrap();
        assert_eq!(r.verdict, Verdict::NotTotallyGeodesic);
        let curved =
            AffineFamily3D { chart: sphere(), alpha: ScalarField::constant(0.4), beta: ScalarField::constant(0.0) };
        let r = tg_residual(&make_affine_family(&curved, (-1.0, 1.0)).unwrap(), &GridSpec::uniform(3, 4)).unwrap();
        assert_eq!(r.verdict, Verdict::NotTotallyGeodesic);
    }

    #[test]
    fn sasaki_geodesic_immersion_has_no_second_form() {
        let chart = sphere();
        let start = TangentBundlePoint::new(Vec2::new(0.1, 0.0), Vec2::new(0.3, 0.2));
        let local = chart.local(&start.q).unwrap();
        let v = lift_local(&local, &start.xi, &Vec2::new(0.6, 0.0), LiftKind::Horizontal)
            + lift_local(&local, &start.xi, &Vec2::new(0.0, 0.8 / 0.1f64.cos()), LiftKind::Vertical);
        let (imm, geo) = make_tm_geodesic(&chart, start, v, 1.0, 1e-3).unwrap();
        assert!(geo.speed_drift() < 1e-7);
        let r = tg_residual(&imm, &GridSpec::uniform(1, 9)).unwrap();
        assert_eq!(r.verdict, Verdict::TotallyGeodesic, "{}", r.max_residual);
    }
}
