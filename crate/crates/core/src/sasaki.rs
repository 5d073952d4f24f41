//! The tangent bundle of a surface as a Riemannian 4-manifold with the
//! Sasaki metric, in the induced coordinates `(x¹, x², ξ¹, ξ²)`.

use nalgebra::{Matrix2x4, Vector4};

use crate::error::{GeometryError, Result};
use crate::geometry::covariant::{nabla, FirstJet};
use crate::geometry::{ChartMetric, LocalGeometry, Mat4, Vec2, Vec4, VectorField};

/// A point `Q = (q, ξ)` of the tangent bundle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentBundlePoint {
    pub q: Vec2,
    pub xi: Vec2,
}

impl TangentBundlePoint {
    pub fn new(q: Vec2, xi: Vec2) -> Self {
        TangentBundlePoint { q, xi }
    }

    pub fn from_coords(c: &Vec4) -> Self {
        TangentBundlePoint { q: Vec2::new(c[0], c[1]), xi: Vec2::new(c[2], c[3]) }
    }

    pub fn coords(&self) -> Vec4 {
        Vec4::new(self.q[0], self.q[1], self.xi[0], self.xi[1])
    }
}

/// A tangent vector to the bundle in the natural frame `∂̃_1 … ∂̃_4`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BundleTangent {
    pub at: TangentBundlePoint,
    pub comps: Vec4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LiftKind {
    Horizontal,
    Vertical,
}

/// Which pair of lifts a covariant derivative combines: `∇̃_{X^a} Y^b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LiftCase {
    HH,
    VH,
    HV,
    VV,
}

/// Christoffel symbols of the Sasaki metric, `Γ̃^A_{BC}` stored as `[A][B][C]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct SasakiChristoffel(pub [[[f64; 4]; 4]; 4]);

impl SasakiChristoffel {
    /// `Γ̃^A_{BC} x^B y^C`.
    pub fn contract(&self, x: &Vec4, y: &Vec4) -> Vec4 {
        let mut out = Vec4::zeros();
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    out[a] += self.0[a][b][c] * x[b] * y[c];
                }
            }
        }
        out
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..b {
                    worst = worst.max((self.0[a][b][c] - self.0[a][c][b]).abs());
                }
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &SasakiChristoffel) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    worst = worst.max((self.0[a][b][c] - other.0[a][b][c]).abs());
                }
            }
        }
        worst
    }
}

fn split(v: &Vec4) -> (Vec2, Vec2) {
    (Vec2::new(v[0], v[1]), Vec2::new(v[2], v[3]))
}

fn join(a: &Vec2, b: &Vec2) -> Vec4 {
    Vec4::new(a[0], a[1], b[0], b[1])
}

/// The 2×4 matrix of the connection map `K` at `ξ`.
fn connection_map(local: &LocalGeometry, xi: &Vec2) -> Matrix2x4<f64> {
    let a = local.gamma.along(xi);
    Matrix2x4::new(a[(0, 0)], a[(0, 1)], 1.0, 0.0, a[(1, 0)], a[(1, 1)], 0.0, 1.0)
}

/// `(π_* X̃, K X̃)` with the base geometry already evaluated.
pub fn project_local(local: &LocalGeometry, xi: &Vec2, comps: &Vec4) -> (Vec2, Vec2) {
    let (h, v) = split(comps);
    (h, v + local.gamma.along(xi) * h)
}

/// Coordinates of a lift with the base geometry already evaluated.
pub fn lift_local(local: &LocalGeometry, xi: &Vec2, x: &Vec2, kind: LiftKind) -> Vec4 {
    match kind {
        LiftKind::Horizontal => join(x, &-(local.gamma.along(xi) * x)),
        LiftKind::Vertical => join(&Vec2::zeros(), x),
    }
}

/// `h^h + v^v`: the bundle vector with the given projections.
pub fn compose_local(local: &LocalGeometry, xi: &Vec2, h: &Vec2, v: &Vec2) -> Vec4 {
    lift_local(local, xi, h, LiftKind::Horizontal) + lift_local(local, xi, v, LiftKind::Vertical)
}

pub fn sasaki_metric_local(local: &LocalGeometry, xi: &Vec2) -> Mat4 {
    let p = Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
    let k = connection_map(local, xi);
    p.transpose() * local.g * p + k.transpose() * local.g * k
}

/// Horizontal and vertical projections of a bundle tangent vector.
pub fn project(chart: &ChartMetric, xt: &BundleTangent) -> Result<(Vec2, Vec2)> {
    let local = chart.local(&xt.at.q)?;
    Ok(project_local(&local, &xt.at.xi, &xt.comps))
}

pub fn lift(chart: &ChartMetric, at: &TangentBundlePoint, x: Vec2, kind: LiftKind) -> Result<BundleTangent> {
    let local = chart.local(&at.q)?;
    Ok(BundleTangent { at: *at, comps: lift_local(&local, &at.xi, &x, kind) })
}

/// The Sasaki metric `G_{AB}` in the natural frame.
pub fn sasaki_metric_at(chart: &ChartMetric, at: &TangentBundlePoint) -> Result<Mat4> {
    let local = chart.local(&at.q)?;
    Ok(sasaki_metric_local(&local, &at.xi))
}

/// Sasaki Christoffel symbols from central differences of `G`.
pub fn sasaki_christoffels_at(chart: &ChartMetric, at: &TangentBundlePoint) -> Result<SasakiChristoffel> {
    let x = at.coords();
    let g0 = sasaki_metric_at(chart, at)?;
    let g_inv = g0.try_inverse().ok_or_else(|| GeometryError::degenerate(at.q, "Sasaki metric is singular"))?;
    let mut dg = [Mat4::zeros(); 4];
    for (d, dgd) in dg.iter_mut().enumerate() {
        let h = (1e-5 * x[d].abs()).max(1e-5);
        let mut xp = x;
        let mut xm = x;
        xp[d] += h;
        xm[d] -= h;
        let gp = sasaki_metric_local(&chart.local_unchecked(&Vec2::new(xp[0], xp[1]))?, &Vec2::new(xp[2], xp[3]));
        let gm = sasaki_metric_local(&chart.local_unchecked(&Vec2::new(xm[0], xm[1]))?, &Vec2::new(xm[2], xm[3]));
        *dgd = (gp - gm) / (2.0 * h);
    }
    let mut out = SasakiChristoffel::default();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                out.0[a][b][c] =
                    0.5 * (0..4).map(|d| g_inv[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)])).sum::<f64>();
            }
        }
    }
    Ok(out)
}

/// Covariant derivatives of lifted base fields at `Q`:
///
/// * `hh`: `(∇_X Y)^h − ½ (R(X,Y)ξ)^v`
/// * `vh`: `½ (R(ξ,X)Y)^h`
/// * `hv`: `(∇_X Y)^v + ½ (R(ξ,Y)X)^h`
/// * `vv`: `0`
pub fn nabla_lifts(
    chart: &ChartMetric,
    at: &TangentBundlePoint,
    x: &VectorField,
    y: &VectorField,
    case: LiftCase,
) -> Result<BundleTangent> {
    let local = chart.local(&at.q)?;
    let xv = x.value(chart, &at.q)?;
    let yj = FirstJet::from(&y.jet(chart, &at.q)?);
    Ok(BundleTangent { at: *at, comps: nabla_lifts_local(&local, &at.xi, &xv, &yj, case) })
}

pub fn nabla_lifts_local(local: &LocalGeometry, xi: &Vec2, x: &Vec2, y: &FirstJet, case: LiftCase) -> Vec4 {
    let r = |a: &Vec2, b: &Vec2, c: &Vec2| local.riemann.apply(a, b, c);
    let zero = Vec2::zeros();
    let (h, v) = match case {
        LiftCase::HH => (nabla(local, x, y), r(x, &y.value, xi) * -0.5),
        LiftCase::VH => (r(xi, x, &y.value) * 0.5, zero),
        LiftCase::HV => (r(xi, &y.value, x) * 0.5, nabla(local, x, y)),
        LiftCase::VV => (zero, zero),
    };
    compose_local(local, xi, &h, &v)
}

/// `∇̃_{∂̃_A} ∂̃_B` from the lift formulas.
///
/// The natural frame is not a frame of lifts: `∂̃_m = ∂_m^h + Γ^i_{jm}ξ^j ∂_i^v`
/// has coefficients depending on `ξ`, and their derivatives contribute.
pub fn nabla_coordinate_frame(
    chart: &ChartMetric,
    at: &TangentBundlePoint,
    a: usize,
    b: usize,
) -> Result<BundleTangent> {
    if a >= 4 || b >= 4 {
        return Err(GeometryError::InvalidArgument(format!("frame indices must be < 4, got ({a}, {b})")));
    }
    let local = chart.local(&at.q)?;
    Ok(BundleTangent { at: *at, comps: frame_derivative(&local, &at.xi, a, b) })
}

fn unit(i: usize) -> Vec2 {
    let mut e = Vec2::zeros();
    e[i] = 1.0;
    e
}

fn frame_derivative(local: &LocalGeometry, xi: &Vec2, a: usize, b: usize) -> Vec4 {
    let half_r = |x: &Vec2, y: &Vec2, z: &Vec2| local.riemann.apply(x, y, z) * 0.5;
    // ∇_{∂n} ∂m = Γ^p_{nm} ∂_p
    let cov = |n: usize, m: usize| Vec2::new(local.gamma.0[0][n][m], local.gamma.0[1][n][m]);
    let along = local.gamma.along(xi);
    let (mut h, mut v) = (Vec2::zeros(), Vec2::zeros());
    match (a < 2, b < 2) {
        (false, false) => {}
        (true, false) => {
            let (n, m) = (a, b - 2);
            v += cov(n, m);
            h += half_r(xi, &unit(m), &unit(n));
        }
        (false, true) => {
            let (n, m) = (a - 2, b);
            h += half_r(xi, &unit(n), &unit(m));
            v += cov(n, m);
        }
        (true, true) => {
            let (n, m) = (a, b);
            let c_a = along.column(n).into_owned();
            let c_b = along.column(m).into_owned();
            h += cov(n, m);
            v -= half_r(&unit(n), &unit(m), xi);
            for p in 0..2 {
                h += half_r(xi, &unit(p), &unit(m)) * c_a[p];
            }
            v += local.dgamma[n].along(xi).column(m);
            for i in 0..2 {
                v += cov(n, i) * c_b[i];
                h += half_r(xi, &unit(i), &unit(n)) * c_b[i];
            }
        }
    }
    compose_local(local, xi, &h, &v)
}

/// All Sasaki Christoffel symbols assembled from [`nabla_coordinate_frame`].
pub fn sasaki_christoffels_lifted(chart: &ChartMetric, at: &TangentBundlePoint) -> Result<SasakiChristoffel> {
    let local = chart.local_unchecked(&at.q)?;
    Ok(lifted_christoffels_local(&local, &at.xi))
}

pub(crate) fn lifted_christoffels_local(local: &LocalGeometry, xi: &Vec2) -> SasakiChristoffel {
    let mut out = SasakiChristoffel::default();
    for b in 0..4 {
        for c in 0..4 {
            let d = frame_derivative(local, xi, b, c);
            for a in 0..4 {
                out.0[a][b][c] = d[a];
            }
        }
    }
    out
}

/// `∇̃_V W` for a bundle vector field `W` given in natural-frame components,
/// differentiating `W` by central differences of step `h`.
pub fn nabla_bundle_field(
    chart: &ChartMetric,
    at: &TangentBundlePoint,
    v: &Vec4,
    w: impl Fn(&TangentBundlePoint) -> Result<Vec4>,
    h: f64,
) -> Result<Vec4> {
    let x = at.coords();
    let wp = w(&TangentBundlePoint::from_coords(&(x + v * h)))?;
    let wm = w(&TangentBundlePoint::from_coords(&(x - v * h)))?;
    let gamma = sasaki_christoffels_lifted(chart, at)?;
    Ok((wp - wm) / (2.0 * h) + gamma.contract(v, &w(at)?))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TmGeodesicSample {
    pub s: f64,
    pub point: TangentBundlePoint,
    pub velocity: Vec4,
    pub acceleration: Vec4,
    /// Sasaki length of `velocity`.
    pub speed: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TmGeodesic {
    pub samples: Vec<TmGeodesicSample>,
    pub step: f64,
    pub truncated: bool,
}

impl TmGeodesic {
    /// Largest deviation of the Sasaki speed from its initial value.
    pub fn speed_drift(&self) -> f64 {
        let s0 = self.samples[0].speed;
        self.samples.iter().map(|s| (s.speed - s0).abs()).fold(0.0, f64::max)
    }
}

/// Geodesic of the Sasaki metric by fixed-step RK4.
pub fn tm_geodesic_integrate(
    chart: &ChartMetric,
    start: &TangentBundlePoint,
    v0: &Vec4,
    length: f64,
    step: f64,
) -> Result<TmGeodesic> {
    if !(step > 0.0) {
        return Err(GeometryError::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if !(length > 0.0) || !length.is_finite() {
        return Err(GeometryError::InvalidArgument(format!("length must be positive, got {length}")));
    }
    let local0 = chart.local(&start.q)?;
    let speed0 = v0.dot(&(sasaki_metric_local(&local0, &start.xi) * v0)).sqrt();
    if (speed0 - 1.0).abs() > 1e-9 {
        return Err(GeometryError::Precondition(format!("initial velocity must be Sasaki-unit, |V0| = {speed0}")));
    }
    let n = ((length / step).round() as usize).max(1);
    let h = length / n as f64;

    let accel = |x: &Vec4, v: &Vec4| -> Result<(Vec4, f64)> {
        let local = chart.local_unchecked(&Vec2::new(x[0], x[1]))?;
        let xi = Vec2::new(x[2], x[3]);
        let speed = v.dot(&(sasaki_metric_local(&local, &xi) * v)).max(0.0).sqrt();
        Ok((-lifted_christoffels_local(&local, &xi).contract(v, v), speed))
    };
    let rhs = |x: &Vec4, v: &Vec4| -> Result<(Vec4, Vec4)> { Ok((*v, accel(x, v)?.0)) };

    let (mut x, mut v) = (start.coords(), *v0);
    let (a0, sp0) = accel(&x, &v)?;
    let mut samples = vec![TmGeodesicSample { s: 0.0, point: *start, velocity: v, acceleration: a0, speed: sp0 }];
    let mut truncated = false;
    for i in 1..=n {
        let (k1x, k1v) = rhs(&x, &v)?;
        let (k2x, k2v) = rhs(&(x + k1x * (h / 2.0)), &(v + k1v * (h / 2.0)))?;
        let (k3x, k3v) = rhs(&(x + k2x * (h / 2.0)), &(v + k2v * (h / 2.0)))?;
        let (k4x, k4v) = rhs(&(x + k3x * h), &(v + k3v * h))?;
        let nx: Vector4<f64> = x + (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0);
        let nv: Vector4<f64> = v + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
        if !chart.domain().contains(&Vec2::new(nx[0], nx[1])) {
            truncated = true;
            break;
        }
        x = nx;
        v = nv;
        let (a, sp) = accel(&x, &v)?;
        samples.push(TmGeodesicSample {
            s: h * i as f64,
            point: TangentBundlePoint::from_coords(&x),
            velocity: v,
            acceleration: a,
            speed: sp,
        });
    }
    Ok(TmGeodesic { samples, step: h, truncated })
}
