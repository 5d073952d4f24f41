//! Immersed submanifolds of the tangent bundle: frames, second fundamental
//! form, grid residual reports and intrinsic curvature of surfaces.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::geometry::{ChartMetric, Mat4, Vec4};
use crate::sasaki::{
    lifted_christoffels_local, sasaki_christoffels_at, sasaki_metric_local, SasakiChristoffel, TangentBundlePoint,
};

/// Step of the fourth-order first-derivative stencil.
pub const FIRST_STEP: f64 = 1e-3;
/// Step of the central second-derivative stencils.
pub const SECOND_STEP: f64 = 1e-4;
/// Smallest admissible singular value of the Jacobian.
pub const RANK_EPS: f64 = 1e-8;

pub type ParamMap = dyn Fn(&[f64]) -> Result<TangentBundlePoint> + Send + Sync;

/// A map from a `k`-dimensional parameter box into the tangent bundle.
#[derive(Clone)]
pub struct Immersion {
    dim: usize,
    map: Arc<ParamMap>,
    param_box: Vec<(f64, f64)>,
    label: String,
    chart: ChartMetric,
}

impl fmt::Debug for Immersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Immersion")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("param_box", &self.param_box)
            .field("chart", &self.chart.name())
            .finish()
    }
}

impl Immersion {
    pub fn new(
        chart: ChartMetric,
        label: impl Into<String>,
        param_box: Vec<(f64, f64)>,
        map: impl Fn(&[f64]) -> Result<TangentBundlePoint> + Send + Sync + 'static,
    ) -> Result<Self> {
        let dim = param_box.len();
        if !(1..=3).contains(&dim) {
            return Err(GeometryError::InvalidArgument(format!("immersion dimension must be 1, 2 or 3, got {dim}")));
        }
        if param_box.iter().any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(GeometryError::InvalidArgument(format!("empty or non-finite parameter box {param_box:?}")));
        }
        Ok(Immersion { dim, map: Arc::new(map), param_box, label: label.into(), chart })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn chart(&self) -> &ChartMetric {
        &self.chart
    }

    pub fn param_box(&self) -> &[(f64, f64)] {
        &self.param_box
    }

    pub fn eval(&self, u: &[f64]) -> Result<TangentBundlePoint> {
        (self.map)(u)
    }

    /// The same submanifold with parameters `w = u / factor`, i.e. `f̂(w) = f(factor·w)`.
    pub fn rescaled(&self, factor: f64) -> Result<Immersion> {
        if !(factor > 0.0) {
            return Err(GeometryError::InvalidArgument(format!("rescale factor must be positive, got {factor}")));
        }
        let inner = Arc::clone(&self.map);
        let param_box = self.param_box.iter().map(|(a, b)| (a / factor, b / factor)).collect();
        Immersion::new(self.chart.clone(), format!("{}*{factor}", self.label), param_box, move |w: &[f64]| {
            let u: Vec<f64> = w.iter().map(|x| x * factor).collect();
            inner(&u)
        })
    }

    /// Parameters reordered: new parameter `i` is old parameter `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Immersion> {
        let mut seen = order.to_vec();
        seen.sort_unstable();
        if seen != (0..self.dim).collect::<Vec<_>>() {
            return Err(GeometryError::InvalidArgument(format!("{order:?} is not a permutation of 0..{}", self.dim)));
        }
        let inner = Arc::clone(&self.map);
        let order = order.to_vec();
        let param_box = order.iter().map(|&i| self.param_box[i]).collect();
        let perm = order.clone();
        Immersion::new(self.chart.clone(), format!("{}{order:?}", self.label), param_box, move |w: &[f64]| {
            let mut u = vec![0.0; w.len()];
            for (i, &o) in perm.iter().enumerate() {
                u[o] = w[i];
            }
            inner(&u)
        })
    }

    fn coords(&self, u: &[f64]) -> Result<Vec4> {
        Ok(self.eval(u)?.coords())
    }

    fn shifted(&self, u: &[f64], steps: &[(usize, f64)]) -> Result<Vec4> {
        let mut w = u.to_vec();
        for &(a, h) in steps {
            w[a] += h;
        }
        self.coords(&w)
    }

    fn first_derivative(&self, u: &[f64], a: usize) -> Result<Vec4> {
        let h = FIRST_STEP;
        let p2 = self.shifted(u, &[(a, 2.0 * h)])?;
        let p1 = self.shifted(u, &[(a, h)])?;
        let m1 = self.shifted(u, &[(a, -h)])?;
        let m2 = self.shifted(u, &[(a, -2.0 * h)])?;
        Ok((m2 - p2 + (p1 - m1) * 8.0) / (12.0 * h))
    }

    fn second_derivative(&self, u: &[f64], a: usize, b: usize, center: &Vec4) -> Result<Vec4> {
        let h = SECOND_STEP;
        if a == b {
            let p = self.shifted(u, &[(a, h)])?;
            let m = self.shifted(u, &[(a, -h)])?;
            Ok((p - center * 2.0 + m) / (h * h))
        } else {
            let pp = self.shifted(u, &[(a, h), (b, h)])?;
            let pm = self.shifted(u, &[(a, h), (b, -h)])?;
            let mp = self.shifted(u, &[(a, -h), (b, h)])?;
            let mm = self.shifted(u, &[(a, -h), (b, -h)])?;
            Ok((pp - pm - mp + mm) / (4.0 * h * h))
        }
    }

    fn check_param(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.dim {
            return Err(GeometryError::InvalidArgument(format!("expected {} parameters, got {}", self.dim, u.len())));
        }
        let slack = 1e-9;
        for (x, (a, b)) in u.iter().zip(&self.param_box) {
            if !(*x >= a - slack && *x <= b + slack) {
                return Err(self.immersion_error(u, format!("parameter {x} outside [{a}, {b}]")));
            }
        }
        Ok(())
    }

    fn immersion_error(&self, u: &[f64], detail: impl Into<String>) -> GeometryError {
        GeometryError::Immersion { params: u.to_vec(), detail: detail.into() }
    }
}

/// Which route supplies the Sasaki Christoffel symbols.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionRoute {
    /// Lift decomposition with product-rule corrections.
    #[default]
    Lifted,
    /// Central differences of the Sasaki metric.
    FiniteDifference,
}

fn christoffels(chart: &ChartMetric, at: &TangentBundlePoint, route: ConnectionRoute) -> Result<SasakiChristoffel> {
    match route {
        ConnectionRoute::Lifted => Ok(lifted_christoffels_local(&chart.local_unchecked(&at.q)?, &at.xi)),
        ConnectionRoute::FiniteDifference => sasaki_christoffels_at(chart, at),
    }
}

fn metric(chart: &ChartMetric, at: &TangentBundlePoint) -> Result<Mat4> {
    Ok(sasaki_metric_local(&chart.local_unchecked(&at.q)?, &at.xi))
}

fn g_inner(g: &Mat4, a: &Vec4, b: &Vec4) -> f64 {
    a.dot(&(g * b))
}

/// Columns of the Jacobian `f_*` at `u`.
pub fn tangent_frame(imm: &Immersion, u: &[f64]) -> Result<Vec<Vec4>> {
    imm.check_param(u)?;
    let frame: Vec<Vec4> = (0..imm.dim).map(|a| imm.first_derivative(u, a)).collect::<Result<_>>()?;
    let jac = DMatrix::from_fn(4, imm.dim, |r, c| frame[c][r]);
    let smallest = jac.singular_values().min();
    if !(smallest >= RANK_EPS) {
        return Err(imm.immersion_error(u, format!("Jacobian rank deficient, smallest singular value {smallest:e}")));
    }
    Ok(frame)
}

fn gram_schmidt(g: &Mat4, seeds: impl IntoIterator<Item = Vec4>, basis: &mut Vec<Vec4>, want: usize) {
    for s in seeds {
        if basis.len() >= want {
            break;
        }
        let mut w = s;
        for _ in 0..2 {
            for b in basis.iter() {
                w -= b * g_inner(g, b, &w);
            }
        }
        let n = g_inner(g, &w, &w).max(0.0).sqrt();
        if n >= 1e-8 {
            basis.push(w / n);
        }
    }
}

/// Sasaki-orthonormal normal frame, seeded by the coordinate axes in order.
pub fn normal_frame(imm: &Immersion, u: &[f64]) -> Result<Vec<Vec4>> {
    let tangents = tangent_frame(imm, u)?;
    let at = imm.eval(u)?;
    Ok(normals_from(&metric(&imm.chart, &at)?, &tangents))
}

fn normals_from(g: &Mat4, tangents: &[Vec4]) -> Vec<Vec4> {
    let mut basis = Vec::with_capacity(4);
    gram_schmidt(g, tangents.iter().copied(), &mut basis, tangents.len());
    let k = basis.len();
    gram_schmidt(g, (0..4).map(|i| Vec4::ith(i, 1.0)), &mut basis, 4);
    basis.split_off(k)
}

/// The second fundamental form at one parameter point.
#[derive(Clone, Debug, PartialEq)]
pub struct SecondForm {
    pub dim: usize,
    /// `II(∂_a, ∂_b)` in natural-frame components, row-major `k × k`.
    pub values: Vec<Vec4>,
    /// Sasaki norms of `values`.
    pub norms: Vec<f64>,
    /// `max ‖II(∂_a,∂_b) − II(∂_b,∂_a)‖`.
    pub asymmetry: f64,
    pub normals: Vec<Vec4>,
}

impl SecondForm {
    pub fn get(&self, a: usize, b: usize) -> Vec4 {
        self.values[a * self.dim + b]
    }

    pub fn max_norm(&self) -> f64 {
        self.norms.iter().copied().fold(0.0, f64::max)
    }
}

/// Normal part of `∇̃_{∂_a} f_*∂_b = f_ab + Γ̃(f_a, f_b)`.
pub fn second_fundamental_form(imm: &Immersion, u: &[f64]) -> Result<SecondForm> {
    second_fundamental_form_with(imm, u, ConnectionRoute::Lifted)
}

pub fn second_fundamental_form_with(imm: &Immersion, u: &[f64], route: ConnectionRoute) -> Result<SecondForm> {
    let tangents = tangent_frame(imm, u)?;
    let at = imm.eval(u)?;
    imm.chart.check_domain(&at.q).map_err(|e| imm.immersion_error(u, e.to_string()))?;
    let g = metric(&imm.chart, &at)?;
    let gamma = christoffels(&imm.chart, &at, route)?;
    let normals = normals_from(&g, &tangents);
    let center = at.coords();
    let k = imm.dim;
    let mut values = Vec::with_capacity(k * k);
    for a in 0..k {
        for b in 0..k {
            let acc = imm.second_derivative(u, a, b, &center)? + gamma.contract(&tangents[a], &tangents[b]);
            values.push(normals.iter().map(|n| n * g_inner(&g, n, &acc)).sum::<Vec4>());
        }
    }
    let norms: Vec<f64> = values.iter().map(|v| g_inner(&g, v, v).max(0.0).sqrt()).collect();
    let mut asymmetry: f64 = 0.0;
    for a in 0..k {
        for b in 0..a {
            let d = values[a * k + b] - values[b * k + a];
            asymmetry = asymmetry.max(g_inner(&g, &d, &d).max(0.0).sqrt());
        }
    }
    Ok(SecondForm { dim: k, values, norms, asymmetry, normals })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    TotallyGeodesic,
    NotTotallyGeodesic,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::TotallyGeodesic => "totally_geodesic",
            Verdict::NotTotallyGeodesic => "not_totally_geodesic",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Verdict {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "totally_geodesic" => Ok(Verdict::TotallyGeodesic),
            "not_totally_geodesic" => Ok(Verdict::NotTotallyGeodesic),
            "inconclusive" => Ok(Verdict::Inconclusive),
            other => Err(format!("unknown verdict '{other}'")),
        }
    }
}

/// Residual levels separating the three verdicts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub totally_geodesic: f64,
    pub not_totally_geodesic: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { totally_geodesic: 1e-6, not_totally_geodesic: 1e-3 }
    }
}

impl Thresholds {
    pub fn classify(&self, residual: f64) -> Verdict {
        if residual <= self.totally_geodesic {
            Verdict::TotallyGeodesic
        } else if residual >= self.not_totally_geodesic {
            Verdict::NotTotallyGeodesic
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = (self.totally_geodesic, self.not_totally_geodesic);
        if !(a > 0.0 && a.is_finite() && b.is_finite() && a <= b) {
            return Err(GeometryError::InvalidArgument(format!("thresholds must satisfy 0 < {a} <= {b}")));
        }
        Ok(())
    }
}

/// A tensor grid over (a sub-box of) the parameter box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub resolution: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranges: Option<Vec<(f64, f64)>>,
}

impl GridSpec {
    pub fn uniform(dim: usize, n: usize) -> Self {
        GridSpec { resolution: vec![n; dim], ranges: None }
    }

    /// Grid nodes in lexicographic order, last parameter fastest.
    pub fn points(&self, param_box: &[(f64, f64)]) -> Result<Vec<Vec<f64>>> {
        let ranges = self.ranges.clone().unwrap_or_else(|| param_box.to_vec());
        if self.resolution.len() != param_box.len() || ranges.len() != param_box.len() {
            return Err(GeometryError::InvalidArgument(format!(
                "grid has {} axes but the immersion has {} parameters",
                self.resolution.len(),
                param_box.len()
            )));
        }
        for (r, b) in ranges.iter().zip(param_box) {
            if r.0 < b.0 - 1e-12 || r.1 > b.1 + 1e-12 || r.0 > r.1 {
                return Err(GeometryError::InvalidArgument(format!("grid range {r:?} not within parameter box {b:?}")));
            }
        }
        if self.resolution.contains(&0) {
            return Err(GeometryError::InvalidArgument("grid resolution must be positive".into()));
        }
        let axes: Vec<Vec<f64>> = self
            .resolution
            .iter()
            .zip(&ranges)
            .map(|(&n, &(a, b))| {
                if n == 1 {
                    vec![0.5 * (a + b)]
                } else {
                    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
                }
            })
            .collect();
        let mut out = vec![Vec::new()];
        for axis in &axes {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<f64>| {
                    axis.iter().map(move |&x| {
                        let mut p = prefix.clone();
                        p.push(x);
                        p
                    })
                })
                .collect();
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointFailure {
    pub index: usize,
    pub params: Vec<f64>,
    pub message: String,
}

/// Totally-geodesic residuals of an immersion over a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondFormReport {
    pub grid: Vec<Vec<f64>>,
    /// `max_{a,b} ‖II(∂_a,∂_b)‖` per grid point; `None` where evaluation failed.
    pub per_point: Vec<Option<f64>>,
    pub max_residual: f64,
    pub max_asymmetry: f64,
    pub tolerance: Thresholds,
    pub verdict: Verdict,
    pub failures: Vec<PointFailure>,
}

pub fn tg_residual(imm: &Immersion, grid: &GridSpec) -> Result<SecondFormReport> {
    tg_residual_with(imm, grid, Thresholds::default(), ConnectionRoute::Lifted)
}

/// Grid sweep of the second fundamental form. Points are evaluated in
/// parallel; the reduction runs in grid order.
pub fn tg_residual_with(
    imm: &Immersion,
    grid: &GridSpec,
    thresholds: Thresholds,
    route: ConnectionRoute,
) -> Result<SecondFormReport> {
    thresholds.validate()?;
    let points = grid.points(&imm.param_box)?;
    let results: Vec<Result<SecondForm>> =
        points.par_iter().map(|u| second_fundamental_form_with(imm, u, route)).collect();
    let mut per_point = Vec::with_capacity(points.len());
    let mut failures = Vec::new();
    let (mut max_residual, mut max_asymmetry) = (0.0f64, 0.0f64);
    for (index, (u, r)) in points.iter().zip(results).enumerate() {
        match r {
            Ok(sf) => {
                let m = sf.max_norm();
                max_residual = max_residual.max(m);
                max_asymmetry = max_asymmetry.max(sf.asymmetry);
                per_point.push(Some(m));
            }
            Err(e) => {
                failures.push(PointFailure { index, params: u.clone(), message: e.to_string() });
                per_point.push(None);
            }
        }
    }
    let verdict = if failures.is_empty() { thresholds.classify(max_residual) } else { Verdict::Inconclusive };
    Ok(SecondFormReport {
        grid: points,
        per_point,
        max_residual,
        max_asymmetry,
        tolerance: thresholds,
        verdict,
        failures,
    })
}

/// Step for derivatives of the induced metric.
const BRIOSCHI_STEP: f64 = 1e-3;

fn induced_metric(imm: &Immersion, u: &[f64]) -> Result<[f64; 3]> {
    let t = tangent_frame(imm, u)?;
    let g = metric(&imm.chart, &imm.eval(u)?)?;
    Ok([g_inner(&g, &t[0], &t[0]), g_inner(&g, &t[0], &t[1]), g_inner(&g, &t[1], &t[1])])
}

/// Gaussian curvature of the induced metric of a 2-dimensional immersion
/// (Brioschi formula).
pub fn intrinsic_gauss(imm: &Immersion, u: &[f64]) -> Result<f64> {
    if imm.dim != 2 {
        return Err(GeometryError::InvalidArgument(format!("intrinsic curvature needs a surface, dim = {}", imm.dim)));
    }
    imm.check_param(u)?;
    let h = BRIOSCHI_STEP;
    let at = |du: f64, dv: f64| induced_metric(imm, &[u[0] + du, u[1] + dv]);
    let c = at(0.0, 0.0)?;
    let (up, um, vp, vm) = (at(h, 0.0)?, at(-h, 0.0)?, at(0.0, h)?, at(0.0, -h)?);
    let (pp, pm, mp, mm) = (at(h, h)?, at(h, -h)?, at(-h, h)?, at(-h, -h)?);
    let d_u = |i: usize| (up[i] - um[i]) / (2.0 * h);
    let d_v = |i: usize| (vp[i] - vm[i]) / (2.0 * h);
    let [e, f, g] = c;
    let (e_u, e_v, f_u, f_v, g_u, g_v) = (d_u(0), d_v(0), d_u(1), d_v(1), d_u(2), d_v(2));
    let e_vv = (vp[0] - 2.0 * e + vm[0]) / (h * h);
    let g_uu = (up[2] - 2.0 * g + um[2]) / (h * h);
    let f_uv = (pp[1] - pm[1] - mp[1] + mm[1]) / (4.0 * h * h);
    let det = e * g - f * f;
    if !(det > 1e-14) {
        return Err(imm.immersion_error(u, format!("induced metric degenerate, det = {det:e}")));
    }
    let a = Matrix3::new(
        -0.5 * e_vv + f_uv - 0.5 * g_uu,
        0.5 * e_u,
        f_u - 0.5 * e_v,
        f_v - 0.5 * g_u,
        e,
        f,
        0.5 * g_v,
        f,
        g,
    );
    let b = Matrix3::new(0.0, 0.5 * e_v, 0.5 * g_u, 0.5 * e_v, e, f, 0.5 * g_u, f, g);
    Ok((a.determinant() - b.determinant()) / (det * det))
}
