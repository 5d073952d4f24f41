use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::connection::LocalGeometry;
use super::{Mat2, Vec2};
use crate::error::{GeometryError, Result};
use crate::jet::Jet2;

/// Smallest admissible `det g` before a metric is treated as singular.
pub const DEGENERACY_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub u: (f64, f64),
    pub v: (f64, f64),
}

impl Domain {
    pub fn new(u: (f64, f64), v: (f64, f64)) -> Self {
        Domain { u, v }
    }

    pub fn contains(&self, q: &Vec2) -> bool {
        q[0] >= self.u.0 && q[0] <= self.u.1 && q[1] >= self.v.0 && q[1] <= self.v.1
    }

    /// The box shrunk towards its centre by `fraction` of each side.
    pub fn shrink(&self, fraction: f64) -> Domain {
        let cut = |(a, b): (f64, f64)| {
            let m = fraction * (b - a) / 2.0;
            (a + m, b - m)
        };
        Domain { u: cut(self.u), v: cut(self.v) }
    }
}

/// Warping function `b(u, v)` of a semi-geodesic metric `du² + b² dv²`.
#[derive(Clone)]
pub enum Warp {
    /// `b ≡ 1`, the Euclidean plane.
    Unit,
    /// `b = cos(u/r)`, curvature `+1/r²`.
    Cos {
        r: f64,
    },
    /// `b = sin(u/r)`, curvature `+1/r²`.
    Sin {
        r: f64,
    },
    /// `b = cosh(u/r)`, curvature `-1/r²`.
    Cosh {
        r: f64,
    },
    /// `b = sinh(u/r)`, curvature `-1/r²`.
    Sinh {
        r: f64,
    },
    /// `b = exp(u/r)`, curvature `-1/r²`.
    Exp {
        r: f64,
    },
    /// `b = m - αu`, flat (polar-type coordinates).
    Linear {
        alpha: f64,
        m: f64,
    },
    /// `b = 1 + c u³`; `K = 0` and `k = 0` along `u = 0`.
    Cubic {
        c: f64,
    },
    Custom(Arc<dyn Fn(Jet2, Jet2) -> Jet2 + Send + Sync>),
}

impl fmt::Debug for Warp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warp::Unit => write!(f, "Unit"),
            Warp::Cos { r } => write!(f, "Cos {{ r: {r} }}"),
            Warp::Sin { r } => write!(f, "Sin {{ r: {r} }}"),
            Warp::Cosh { r } => write!(f, "Cosh {{ r: {r} }}"),
            Warp::Sinh { r } => write!(f, "Sinh {{ r: {r} }}"),
            Warp::Exp { r } => write!(f, "Exp {{ r: {r} }}"),
            Warp::Linear { alpha, m } => write!(f, "Linear {{ alpha: {alpha}, m: {m} }}"),
            Warp::Cubic { c } => write!(f, "Cubic {{ c: {c} }}"),
            Warp::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Warp {
    pub fn eval(&self, u: Jet2, v: Jet2) -> Jet2 {
        match self {
            Warp::Unit => Jet2::constant(1.0),
            Warp::Cos { r } => (u / *r).cos(),
            Warp::Sin { r } => (u / *r).sin(),
            Warp::Cosh { r } => (u / *r).cosh(),
            Warp::Sinh { r } => (u / *r).sinh(),
            Warp::Exp { r } => (u / *r).exp(),
            Warp::Linear { alpha, m } => *m - u * *alpha,
            Warp::Cubic { c } => 1.0 + u.powi(3) * *c,
            Warp::Custom(f) => f(u, v),
        }
    }

    pub fn jet(&self, q: &Vec2) -> Jet2 {
        let (u, v) = Jet2::seed(q[0], q[1]);
        self.eval(u, v)
    }
}

/// The five constant-curvature warps with `A(v) ≡ 1`, `θ ≡ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureFamily {
    Cos,
    Sin,
    Cosh,
    Sinh,
    Exp,
}

impl CurvatureFamily {
    pub const ALL: [CurvatureFamily; 5] = [
        CurvatureFamily::Cos,
        CurvatureFamily::Sin,
        CurvatureFamily::Cosh,
        CurvatureFamily::Sinh,
        CurvatureFamily::Exp,
    ];

    /// Gaussian curvature of the family at radius `r`.
    pub fn curvature(self, r: f64) -> f64 {
        match self {
            CurvatureFamily::Cos | CurvatureFamily::Sin => 1.0 / (r * r),
            _ => -1.0 / (r * r),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CurvatureFamily::Cos => "cos",
            CurvatureFamily::Sin => "sin",
            CurvatureFamily::Cosh => "cosh",
            CurvatureFamily::Sinh => "sinh",
            CurvatureFamily::Exp => "exp",
        }
    }
}

pub fn make_constant_curvature_chart(family: CurvatureFamily, r: f64) -> Result<ChartMetric> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(GeometryError::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    let (warp, u) = match family {
        CurvatureFamily::Cos => (Warp::Cos { r }, (-1.3 * r, 1.3 * r)),
        CurvatureFamily::Sin => (Warp::Sin { r }, (0.2 * r, 1.3 * r)),
        CurvatureFamily::Cosh => (Warp::Cosh { r }, (-1.3 * r, 1.3 * r)),
        CurvatureFamily::Sinh => (Warp::Sinh { r }, (0.2 * r, 1.3 * r)),
        CurvatureFamily::Exp => (Warp::Exp { r }, (-1.3 * r, 1.3 * r)),
    };
    Ok(ChartMetric::semi_geodesic(format!("{}(r={r})", family.name()), Domain::new(u, (-1.5, 1.5)), warp))
}

/// Metric components with their first and second partial derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricJet {
    pub g: Mat2,
    /// `dg[m] = ∂_m g`.
    pub dg: [Mat2; 2],
    /// `d2g[m][n] = ∂_m ∂_n g`.
    pub d2g: [[Mat2; 2]; 2],
}

impl MetricJet {
    fn from_components(c: [[Jet2; 2]; 2]) -> Self {
        let mat = |f: &dyn Fn(&Jet2) -> f64| Mat2::new(f(&c[0][0]), f(&c[0][1]), f(&c[1][0]), f(&c[1][1]));
        MetricJet {
            g: mat(&|j| j.v),
            dg: [mat(&|j| j.d[0]), mat(&|j| j.d[1])],
            d2g: [[mat(&|j| j.h[0][0]), mat(&|j| j.h[0][1])], [mat(&|j| j.h[1][0]), mat(&|j| j.h[1][1])]],
        }
    }
}

type SampledMetric = Arc<dyn Fn(f64, f64) -> Mat2 + Send + Sync>;
type SampledFirst = Arc<dyn Fn(f64, f64) -> [Mat2; 2] + Send + Sync>;
type SampledSecond = Arc<dyn Fn(f64, f64) -> [[Mat2; 2]; 2] + Send + Sync>;

#[derive(Clone)]
enum MetricSource {
    SemiGeodesic(Warp),
    Jet(Arc<dyn Fn(Jet2, Jet2) -> [[Jet2; 2]; 2] + Send + Sync>),
    Sampled { g: SampledMetric, dg: Option<SampledFirst>, d2g: Option<SampledSecond> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartKind {
    SemiGeodesic,
    General,
}

/// A coordinate patch of a Riemannian surface.
#[derive(Clone)]
pub struct ChartMetric {
    name: String,
    domain: Domain,
    source: MetricSource,
}

impl fmt::Debug for ChartMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let source = match &self.source {
            MetricSource::SemiGeodesic(w) => format!("semi_geodesic({w:?})"),
            MetricSource::Jet(_) => "jet".to_string(),
            MetricSource::Sampled { dg, d2g, .. } => {
                format!("sampled(dg: {}, d2g: {})", dg.is_some(), d2g.is_some())
            }
        };
        f.debug_struct("ChartMetric")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("source", &source)
            .finish()
    }
}

impl ChartMetric {
    /// `du² + b(u,v)² dv²`.
    pub fn semi_geodesic(name: impl Into<String>, domain: Domain, warp: Warp) -> Self {
        ChartMetric { name: name.into(), domain, source: MetricSource::SemiGeodesic(warp) }
    }

    pub fn flat(domain: Domain) -> Self {
        Self::semi_geodesic("flat", domain, Warp::Unit)
    }

    /// A general metric whose components are written over [`Jet2`], so all
    /// derivatives are exact.
    pub fn from_jet_fn(
        name: impl Into<String>,
        domain: Domain,
        g: impl Fn(Jet2, Jet2) -> [[Jet2; 2]; 2] + Send + Sync + 'static,
    ) -> Self {
        ChartMetric { name: name.into(), domain, source: MetricSource::Jet(Arc::new(g)) }
    }

    /// A general metric known only by value; derivatives fall back to
    /// central finite differences.
    pub fn sampled(
        name: impl Into<String>,
        domain: Domain,
        g: impl Fn(f64, f64) -> Mat2 + Send + Sync + 'static,
    ) -> Self {
        ChartMetric { name: name.into(), domain, source: MetricSource::Sampled { g: Arc::new(g), dg: None, d2g: None } }
    }

    /// Attaches analytic first derivatives to a sampled metric.
    pub fn with_first_derivatives(mut self, dg: impl Fn(f64, f64) -> [Mat2; 2] + Send + Sync + 'static) -> Self {
        if let MetricSource::Sampled { dg: slot, .. } = &mut self.source {
            *slot = Some(Arc::new(dg));
        }
        self
    }

    pub fn with_second_derivatives(mut self, d2g: impl Fn(f64, f64) -> [[Mat2; 2]; 2] + Send + Sync + 'static) -> Self {
        if let MetricSource::Sampled { d2g: slot, .. } = &mut self.source {
            *slot = Some(Arc::new(d2g));
        }
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn kind(&self) -> ChartKind {
        match self.source {
            MetricSource::SemiGeodesic(_) => ChartKind::SemiGeodesic,
            _ => ChartKind::General,
        }
    }

    pub fn warp(&self) -> Option<&Warp> {
        match &self.source {
            MetricSource::SemiGeodesic(w) => Some(w),
            _ => None,
        }
    }

    pub fn check_domain(&self, q: &Vec2) -> Result<()> {
        if self.domain.contains(q) && q.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(GeometryError::OutOfDomain { u: q[0], v: q[1] })
        }
    }

    /// Metric jet without the domain check; finite-difference stencils and
    /// interpolation near the boundary step slightly outside the box.
    pub fn metric_jet_unchecked(&self, q: &Vec2) -> MetricJet {
        match &self.source {
            MetricSource::SemiGeodesic(warp) => {
                let b = warp.jet(q);
                let zero = Jet2::constant(0.0);
                MetricJet::from_components([[Jet2::constant(1.0), zero], [zero, b * b]])
            }
            MetricSource::Jet(f) => {
                let (u, v) = Jet2::seed(q[0], q[1]);
                MetricJet::from_components(f(u, v))
            }
            MetricSource::Sampled { g, dg, d2g } => {
                let first = |x: f64, y: f64| match dg {
                    Some(dg) => dg(x, y),
                    None => fd_first(g.as_ref(), x, y),
                };
                let second = match d2g {
                    Some(d2g) => d2g(q[0], q[1]),
                    None => {
                        // nested central differences of the first derivatives
                        let h = 1e-4;
                        let du = [first(q[0] + h, q[1]), first(q[0] - h, q[1])];
                        let dv = [first(q[0], q[1] + h), first(q[0], q[1] - h)];
                        let mut out = [[Mat2::zeros(); 2]; 2];
                        for n in 0..2 {
                            out[0][n] = (du[0][n] - du[1][n]) / (2.0 * h);
                            out[1][n] = (dv[0][n] - dv[1][n]) / (2.0 * h);
                        }
                        let sym = (out[0][1] + out[1][0]) / 2.0;
                        out[0][1] = sym;
                        out[1][0] = sym;
                        out
                    }
                };
                MetricJet { g: g(q[0], q[1]), dg: first(q[0], q[1]), d2g: second }
            }
        }
    }

    pub fn metric_at(&self, q: &Vec2) -> Result<Mat2> {
        self.check_domain(q)?;
        let g = self.metric_jet_unchecked(q).g;
        check_positive(&g, q)?;
        Ok(g)
    }

    /// Connection and curvature data at `q`.
    pub fn local(&self, q: &Vec2) -> Result<LocalGeometry> {
        self.check_domain(q)?;
        self.local_unchecked(q)
    }

    pub fn local_unchecked(&self, q: &Vec2) -> Result<LocalGeometry> {
        LocalGeometry::from_jet(*q, &self.metric_jet_unchecked(q))
    }

    pub fn christoffels_at(&self, q: &Vec2) -> Result<super::Christoffel> {
        Ok(self.local(q)?.gamma)
    }

    /// Riemann tensor and Gaussian curvature at `q`.
    pub fn curvature_at(&self, q: &Vec2) -> Result<(super::Riemann, f64)> {
        let local = self.local(q)?;
        Ok((local.riemann, local.gauss))
    }

    /// Geodesic curvature `-∂₁b/b` of the `v`-curve through `q`.
    pub fn geodesic_curvature_of_v_curve(&self, q: &Vec2) -> Result<f64> {
        self.check_domain(q)?;
        let warp = self
            .warp()
            .ok_or_else(|| GeometryError::InvalidArgument(format!("chart {} is not semi-geodesic", self.name)))?;
        let b = warp.jet(q);
        if !(b.v > 0.0) {
            return Err(GeometryError::degenerate(*q, format!("warp b = {} is not positive", b.v)));
        }
        Ok(-b.d[0] / b.v)
    }
}

pub(crate) fn check_positive(g: &Mat2, q: &Vec2) -> Result<()> {
    let det = g.determinant();
    if !(det > DEGENERACY_EPS && g[(0, 0)] > 0.0) || !det.is_finite() {
        return Err(GeometryError::degenerate(*q, format!("metric not positive definite (det = {det:e})")));
    }
    if (g[(0, 1)] - g[(1, 0)]).abs() > 1e-12 * (1.0 + g.abs().max()) {
        return Err(GeometryError::degenerate(*q, "metric is not symmetric"));
    }
    Ok(())
}

fn fd_first(g: &(dyn Fn(f64, f64) -> Mat2 + Send + Sync), u: f64, v: f64) -> [Mat2; 2] {
    let hu = (1e-5 * u.abs()).max(1e-5);
    let hv = (1e-5 * v.abs()).max(1e-5);
    [(g(u + hu, v) - g(u - hu, v)) / (2.0 * hu), (g(u, v + hv) - g(u, v - hv)) / (2.0 * hv)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn flat_metric_is_identity() {
        let chart = ChartMetric::flat(Domain::new((-1.0, 1.0), (-1.0, 1.0)));
        assert_eq!(chart.metric_at(&Vec2::new(0.3, -0.2)).unwrap(), Mat2::identity());
    }

    #[test]
    fn sphere_and_hyperbolic_metrics() {
        let sphere = make_constant_curvature_chart(CurvatureFamily::Cos, 1.0).unwrap();
        let g = sphere.metric_at(&Vec2::new(0.5, 0.0)).unwrap();
        assert_abs_diff_eq!(g, Mat2::new(1.0, 0.0, 0.0, 0.5f64.cos().powi(2)), epsilon = 1e-15);

        let hyper = make_constant_curvature_chart(CurvatureFamily::Exp, 1.0).unwrap();
        let g = hyper.metric_at(&Vec2::new(0.3, 1.0)).unwrap();
        assert_abs_diff_eq!(g, Mat2::new(1.0, 0.0, 0.0, 0.6f64.exp()), epsilon = 1e-14);
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let sphere = make_constant_curvature_chart(CurvatureFamily::Cos, 1.0).unwrap();
        assert!(matches!(sphere.metric_at(&Vec2::new(1.4, 0.0)), Err(GeometryError::OutOfDomain { .. })));
        let sin = make_constant_curvature_chart(CurvatureFamily::Sin, 2.0).unwrap();
        assert!(sin.metric_at(&Vec2::new(0.1, 0.0)).is_err());
        assert!(sin.metric_at(&Vec2::new(0.5, 0.0)).is_ok());
    }

    #[test]
    fn bad_radius_is_rejected() {
        assert!(make_constant_curvature_chart(CurvatureFamily::Cos, 0.0).is_err());
        assert!(make_constant_curvature_chart(CurvatureFamily::Exp, -1.0).is_err());
    }

    #[test]
    fn singular_metric_is_degenerate() {
        let chart = ChartMetric::sampled("singular", Domain::new((-1.0, 1.0), (-1.0, 1.0)), |u, _| {
            Mat2::new(1.0, 0.0, 0.0, u * u)
        });
        assert!(matches!(chart.metric_at(&Vec2::new(0.0, 0.0)), Err(GeometryError::Degenerate { .. })));
        assert!(matches!(chart.christoffels_at(&Vec2::new(0.0, 0.3)), Err(GeometryError::Degenerate { .. })));
    }

    #[test]
    fn geodesic_curvature_of_v_curves() {
        let flat = ChartMetric::flat(Domain::new((-1.0, 1.0), (-1.0, 1.0)));
        assert_eq!(flat.geodesic_curvature_of_v_curve(&Vec2::new(0.2, 0.1)).unwrap(), 0.0);
        let sphere = make_constant_curvature_chart(CurvatureFamily::Cos, 1.0).unwrap();
        assert_abs_diff_eq!(sphere.geodesic_curvature_of_v_curve(&Vec2::new(0.0, 0.4)).unwrap(), 0.0);
        let exp = make_constant_curvature_chart(CurvatureFamily::Exp, 1.0).unwrap();
        for u in [-1.0, 0.0, 0.7] {
            assert_abs_diff_eq!(exp.geodesic_curvature_of_v_curve(&Vec2::new(u, 0.0)).unwrap(), -1.0, epsilon = 1e-14);
        }
        let general = ChartMetric::sampled("g", Domain::new((-1.0, 1.0), (-1.0, 1.0)), |_, _| Mat2::identity());
        assert!(general.geodesic_curvature_of_v_curve(&Vec2::new(0.0, 0.0)).is_err());
        let degenerate = ChartMetric::semi_geodesic(
            "neg",
            Domain::new((-1.0, 1.0), (-1.0, 1.0)),
            Warp::Linear { alpha: 1.0, m: 0.0 },
        );
        assert!(degenerate.geodesic_curvature_of_v_curve(&Vec2::new(0.5, 0.0)).is_err());
    }
}
