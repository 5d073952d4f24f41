//! Randomised self-consistency checks of the base and bundle geometry.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::ChartSpec;
use crate::catalog::{eq5_residual, graph_second_form_norm, make_vector_field_graph};
use crate::error::Result;
use crate::geometry::{
    geodesic_integrate, integrate_curve, parallel_transport, ChartMetric, Domain, Mat2, Vec2, Vec4, VectorField,
};
use crate::immersion::{second_fundamental_form, Thresholds};
use crate::sasaki::{
    compose_local, lift_local, nabla_lifts, project_local, sasaki_christoffels_at, sasaki_christoffels_lifted,
    sasaki_metric_at, sasaki_metric_local, tm_geodesic_integrate, LiftCase, LiftKind, TangentBundlePoint,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Analytic Christoffel symbols against central differences of `g`.
    ChristoffelAgreement,
    /// Gaussian curvature against the closed form of the chart family.
    CurvatureCalibration,
    /// `G(X^h,Y^h) = G(X^v,Y^v) = g(X,Y)`, `G(X^h,Y^v) = 0`.
    LiftIsometry,
    /// Projections of lifts and lifts of projections.
    ProjectionRoundTrip,
    /// Lift-assembled Sasaki Christoffel symbols against differences of `G`.
    ConnectionAgreement,
    /// Covariant derivatives of lifted fields against a finite-difference connection.
    LiftDerivatives,
    /// Speed drift of base geodesics per unit length.
    GeodesicSpeed,
    /// Inner products preserved by parallel transport.
    TransportIsometry,
    /// Sasaki speed drift of bundle geodesics per unit length.
    SasakiEnergy,
    /// Graph second fundamental form against its closed form.
    GraphOracle,
}

impl CheckKind {
    pub const ALL: [CheckKind; 10] = [
        CheckKind::ChristoffelAgreement,
        CheckKind::CurvatureCalibration,
        CheckKind::LiftIsometry,
        CheckKind::ProjectionRoundTrip,
        CheckKind::ConnectionAgreement,
        CheckKind::LiftDerivatives,
        CheckKind::GeodesicSpeed,
        CheckKind::TransportIsometry,
        CheckKind::SasakiEnergy,
        CheckKind::GraphOracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::ChristoffelAgreement => "christoffel_agreement",
            CheckKind::CurvatureCalibration => "curvature_calibration",
            CheckKind::LiftIsometry => "lift_isometry",
            CheckKind::ProjectionRoundTrip => "projection_round_trip",
            CheckKind::ConnectionAgreement => "connection_agreement",
            CheckKind::LiftDerivatives => "lift_derivatives",
            CheckKind::GeodesicSpeed => "geodesic_speed",
            CheckKind::TransportIsometry => "transport_isometry",
            CheckKind::SasakiEnergy => "sasaki_energy",
            CheckKind::GraphOracle => "graph_oracle",
        }
    }

    pub fn tolerance(self) -> f64 {
        match self {
            CheckKind::ChristoffelAgreement => 1e-6,
            CheckKind::CurvatureCalibration => 1e-9,
            CheckKind::LiftIsometry => 1e-10,
            CheckKind::ProjectionRoundTrip => 1e-12,
            CheckKind::ConnectionAgreement | CheckKind::LiftDerivatives => 1e-5,
            CheckKind::GeodesicSpeed | CheckKind::TransportIsometry => 1e-8,
            CheckKind::SasakiEnergy => 1e-7,
            CheckKind::GraphOracle => 1e-5,
        }
    }

    /// Samples actually drawn for a requested count; the integrator checks
    /// are costlier and use fewer.
    fn effective_samples(self, samples: usize) -> usize {
        match self {
            CheckKind::GeodesicSpeed | CheckKind::TransportIsometry | CheckKind::SasakiEnergy => samples.div_ceil(10),
            CheckKind::GraphOracle => samples.div_ceil(4),
            _ => samples,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    /// Worst discrepancy seen.
    pub value: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub passed: bool,
}

impl CheckOutcome {
    /// Non-finite values are recorded as `f64::MAX` and fail.
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64, samples: usize) -> Self {
        let value = if value.is_finite() { value } else { f64::MAX };
        CheckOutcome { name: name.into(), value, tolerance, samples, passed: value <= tolerance }
    }
}

struct Sampler {
    rng: ChaCha8Rng,
    domain: Domain,
}

impl Sampler {
    fn new(chart: &ChartMetric, seed: u64, kind: CheckKind) -> Self {
        let salt = CheckKind::ALL.iter().position(|&k| k == kind).unwrap_or(0) as u64;
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9).wrapping_add(salt)),
            domain: chart.domain().shrink(0.1),
        }
    }

    fn point(&mut self) -> Vec2 {
        let d = self.domain;
        Vec2::new(self.rng.random_range(d.u.0..d.u.1), self.rng.random_range(d.v.0..d.v.1))
    }

    fn vector(&mut self, scale: f64) -> Vec2 {
        Vec2::new(self.rng.random_range(-scale..scale), self.rng.random_range(-scale..scale))
    }

    /// A vector of `g`-length one.
    fn unit(&mut self, g: &Mat2) -> Vec2 {
        loop {
            let v = self.vector(1.0);
            let n = crate::geometry::norm(g, &v);
            if n > 0.1 {
                return v / n;
            }
        }
    }

    fn bundle_point(&mut self) -> TangentBundlePoint {
        TangentBundlePoint::new(self.point(), self.vector(1.5))
    }

    fn affine_field(&mut self) -> VectorField {
        let o = self.vector(1.0);
        let m = [self.vector(0.5), self.vector(0.5)];
        VectorField::Affine { offset: [o[0], o[1]], matrix: [[m[0][0], m[0][1]], [m[1][0], m[1][1]]] }
    }
}

/// Runs one check over `samples` random draws.
pub fn run_check(
    kind: CheckKind,
    spec: &ChartSpec,
    chart: &ChartMetric,
    samples: usize,
    seed: u64,
) -> Result<CheckOutcome> {
    let n = kind.effective_samples(samples);
    let mut s = Sampler::new(chart, seed, kind);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let value = match kind {
            CheckKind::ChristoffelAgreement => christoffel_agreement(chart, s.point())?,
            CheckKind::CurvatureCalibration => {
                let q = s.point();
                let k = chart.curvature_at(&q)?.1;
                let expected = spec.expected_curvature(&q);
                (k - expected).abs() / expected.abs().max(1.0)
            }
            CheckKind::LiftIsometry => {
                let at = s.bundle_point();
                let (x, y) = (s.vector(1.0), s.vector(1.0));
                let local = chart.local(&at.q)?;
                let gs = sasaki_metric_local(&local, &at.xi);
                let l = |v: &Vec2, k| lift_local(&local, &at.xi, v, k);
                let (h, v) = (LiftKind::Horizontal, LiftKind::Vertical);
                let base = local.inner(&x, &y);
                let hh = l(&x, h).dot(&(gs * l(&y, h)));
                let vv = l(&x, v).dot(&(gs * l(&y, v)));
                let hv = l(&x, h).dot(&(gs * l(&y, v)));
                (hh - base).abs().max((vv - base).abs()).max(hv.abs())
            }
            CheckKind::ProjectionRoundTrip => {
                let at = s.bundle_point();
                let x = s.vector(1.0);
                let (a, b) = (s.vector(1.0), s.vector(1.0));
                let w = Vec4::new(a[0], a[1], b[0], b[1]);
                let local = chart.local(&at.q)?;
                let (h1, v1) = project_local(&local, &at.xi, &lift_local(&local, &at.xi, &x, LiftKind::Horizontal));
                let (h2, v2) = project_local(&local, &at.xi, &lift_local(&local, &at.xi, &x, LiftKind::Vertical));
                let (ph, pv) = project_local(&local, &at.xi, &w);
                let back = compose_local(&local, &at.xi, &ph, &pv);
                [(h1 - x).amax(), v1.amax(), h2.amax(), (v2 - x).amax(), (back - w).amax()]
                    .into_iter()
                    .fold(0.0, f64::max)
            }
            CheckKind::ConnectionAgreement => {
                let at = s.bundle_point();
                sasaki_christoffels_lifted(chart, &at)?.max_abs_diff(&sasaki_christoffels_at(chart, &at)?)
            }
            CheckKind::LiftDerivatives => {
                let at = s.bundle_point();
                let (x, y) = (s.affine_field(), s.affine_field());
                lift_derivatives(chart, &at, &x, &y)?
            }
            CheckKind::GeodesicSpeed => {
                let q = s.point();
                let x0 = s.unit(&chart.metric_at(&q)?);
                let curve = geodesic_integrate(chart, q, x0, 1.0, 1e-3)?;
                let length = curve.s_range().1 - curve.s_range().0;
                let drift = curve
                    .samples()
                    .iter()
                    .map(|p| chart.local_unchecked(&p.q).map(|l| (l.norm(&p.qdot) - 1.0).abs()))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                drift / length.max(1e-3)
            }
            CheckKind::TransportIsometry => {
                let q = s.point();
                let g = chart.metric_at(&q)?;
                let x0 = s.unit(&g);
                let curve = integrate_curve(chart, q, x0, 0.0, 1.0, 1e-3, 0.3)?;
                let (a, b) = (s.vector(1.0), s.vector(1.0));
                let ta = parallel_transport(chart, &curve, a)?;
                let tb = parallel_transport(chart, &curve, b)?;
                let (ia, ib) = (crate::geometry::inner(&g, &a, &a), crate::geometry::inner(&g, &a, &b));
                let mut d = 0.0f64;
                for ((pa, pb), c) in ta.samples().iter().zip(tb.samples()).zip(curve.samples()) {
                    let l = chart.local_unchecked(&c.q)?;
                    d = d.max((l.inner(&pa.x, &pa.x) - ia).abs()).max((l.inner(&pa.x, &pb.x) - ib).abs());
                }
                d
            }
            CheckKind::SasakiEnergy => {
                let at = s.bundle_point();
                let local = chart.local(&at.q)?;
                let v = compose_local(&local, &at.xi, &s.vector(1.0), &s.vector(1.0));
                let norm = v.dot(&(sasaki_metric_at(chart, &at)? * v)).sqrt();
                let geo = tm_geodesic_integrate(chart, &at, &(v / norm), 1.0, 1e-3)?;
                let length = geo.samples.last().map_or(0.0, |p| p.s);
                geo.speed_drift() / length.max(1e-3)
            }
            CheckKind::GraphOracle => graph_oracle(chart, &mut s)?,
        };
        worst = if value.is_nan() { f64::NAN } else { worst.max(value) };
    }
    Ok(CheckOutcome::new(kind.name(), worst, kind.tolerance(), n))
}

fn christoffel_agreement(chart: &ChartMetric, q: Vec2) -> Result<f64> {
    let g_inv = chart.metric_at(&q)?.try_inverse().expect("metric is invertible on its domain");
    let mut dg = [Mat2::zeros(); 2];
    for (m, d) in dg.iter_mut().enumerate() {
        let h = (1e-5 * q[m].abs()).max(1e-5);
        let mut qp = q;
        let mut qm = q;
        qp[m] += h;
        qm[m] -= h;
        *d = (chart.metric_jet_unchecked(&qp).g - chart.metric_jet_unchecked(&qm).g) / (2.0 * h);
    }
    let gamma = chart.christoffels_at(&q)?;
    let mut worst = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let fd =
                    0.5 * (0..2).map(|l| g_inv[(i, l)] * (dg[j][(l, k)] + dg[k][(l, j)] - dg[l][(j, k)])).sum::<f64>();
                let a = gamma.0[i][j][k];
                worst = worst.max((a - fd).abs() / a.abs().max(1.0));
            }
        }
    }
    Ok(worst)
}

/// `∇̃_{X^a} Y^b` from the lift formulas against differentiating the lifted
/// field `Y^b` numerically and adding the difference-quotient connection.
fn lift_derivatives(chart: &ChartMetric, at: &TangentBundlePoint, x: &VectorField, y: &VectorField) -> Result<f64> {
    let gamma_fd = sasaki_christoffels_at(chart, at)?;
    let xv = x.value(chart, &at.q)?;
    let mut worst = 0.0f64;
    for (case, xk, yk) in [
        (LiftCase::HH, LiftKind::Horizontal, LiftKind::Horizontal),
        (LiftCase::VH, LiftKind::Vertical, LiftKind::Horizontal),
        (LiftCase::HV, LiftKind::Horizontal, LiftKind::Vertical),
        (LiftCase::VV, LiftKind::Vertical, LiftKind::Vertical),
    ] {
        let lifted = nabla_lifts(chart, at, x, y, case)?.comps;
        let local = chart.local(&at.q)?;
        let dir = lift_local(&local, &at.xi, &xv, xk);
        let field = |p: &TangentBundlePoint| -> Result<Vec4> {
            let l = chart.local_unchecked(&p.q)?;
            Ok(lift_local(&l, &p.xi, &y.value(chart, &p.q)?, yk))
        };
        let h = 1e-5;
        let c = at.coords();
        let wp = field(&TangentBundlePoint::from_coords(&(c + dir * h)))?;
        let wm = field(&TangentBundlePoint::from_coords(&(c - dir * h)))?;
        let fd = (wp - wm) / (2.0 * h) + gamma_fd.contract(&dir, &field(at)?);
        worst = worst.max((lifted - fd).amax());
    }
    Ok(worst)
}

/// Numerical `‖II‖` of a random graph at one point against the closed form,
/// relative to `1 + ‖II‖`, plus agreement of the two verdicts.
fn graph_oracle(chart: &ChartMetric, s: &mut Sampler) -> Result<f64> {
    let xi = s.affine_field();
    let q = s.point();
    let imm = make_vector_field_graph(chart, xi.clone())?;
    let sf = second_fundamental_form(&imm, &[q[0], q[1]])?;
    let t = Thresholds::default();
    let mut worst = 0.0f64;
    let mut e_max = 0.0f64;
    for a in 0..2 {
        for b in 0..2 {
            let (x, y) = (VectorField::coordinate(a), VectorField::coordinate(b));
            let exact = graph_second_form_norm(chart, &xi, &x, &y, q)?;
            worst = worst.max((sf.norms[a * 2 + b] - exact).abs() / (1.0 + exact));
            let g = chart.metric_at(&q)?;
            e_max = e_max.max(crate::geometry::norm(&g, &eq5_residual(chart, &xi, &x, &y, q)?));
        }
    }
    let ambient = t.classify(sf.max_norm());
    let pde = t.classify(e_max);
    if ambient != pde
        && ambient != crate::immersion::Verdict::Inconclusive
        && pde != crate::immersion::Verdict::Inconclusive
    {
        return Ok(f64::INFINITY);
    }
    Ok(worst)
}
