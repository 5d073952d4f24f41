use super::SemiGeodesicField;
use crate::error::{GeometryError, Result};
use crate::geometry::covariant::{hessian, nabla, nabla_nabla, second_derivative, FirstJet};
use crate::geometry::{rotate_quarter, ChartMetric, LocalGeometry, Mat2, ScalarField, Vec2, VectorField};
use crate::jet::Jet2;

/// Tolerance on the pointwise preconditions of the scalar systems.
const PRECONDITION_TOL: f64 = 1e-8;

struct Fields<'a> {
    chart: &'a ChartMetric,
    local: LocalGeometry,
    q: Vec2,
}

impl<'a> Fields<'a> {
    fn new(chart: &'a ChartMetric, q: Vec2) -> Result<Self> {
        Ok(Fields { chart, local: chart.local(&q)?, q })
    }

    fn first(&self, f: &VectorField) -> Result<FirstJet> {
        Ok(FirstJet::from(&f.jet(self.chart, &self.q)?))
    }

    fn cov(&self, x: &Vec2, y: &FirstJet) -> Vec2 {
        nabla(&self.local, x, y)
    }
}

/// `r(X,Y)ξ + r(Y,X)ξ − ∇_{h_ξ(X,Y)} ξ` with
/// `h_ξ(X,Y) = R(ξ,∇_Xξ)Y + R(ξ,∇_Yξ)X`.
pub fn eq5_residual(chart: &ChartMetric, xi: &VectorField, x: &VectorField, y: &VectorField, q: Vec2) -> Result<Vec2> {
    let f = Fields::new(chart, q)?;
    let xi_j = xi.jet(chart, &q)?;
    let xi_f = FirstJet::from(&xi_j);
    let (xj, yj) = (f.first(x)?, f.first(y)?);
    let r = |a: &Vec2, b: &Vec2, c: &Vec2| f.local.riemann.apply(a, b, c);
    let nx = f.cov(&xj.value, &xi_f);
    let ny = f.cov(&yj.value, &xi_f);
    let h = r(&xi_j.value, &nx, &yj.value) + r(&xi_j.value, &ny, &xj.value);
    Ok(second_derivative(&f.local, &xj, &yj, &xi_j) + second_derivative(&f.local, &yj, &xj, &xi_j) - f.cov(&h, &xi_f))
}

/// `r(X,X)ξ − ∇_{R(ξ,∇_Xξ)X} ξ`, half the diagonal of [`eq5_residual`].
pub fn eq7_residual(chart: &ChartMetric, xi: &VectorField, x: &VectorField, q: Vec2) -> Result<Vec2> {
    let f = Fields::new(chart, q)?;
    let xi_j = xi.jet(chart, &q)?;
    let xi_f = FirstJet::from(&xi_j);
    let xj = f.first(x)?;
    let nx = f.cov(&xj.value, &xi_f);
    let z = f.local.riemann.apply(&xi_j.value, &nx, &xj.value);
    Ok(second_derivative(&f.local, &xj, &xj, &xi_j) - f.cov(&z, &xi_f))
}

/// `‖II(X,Y)‖` of the graph `ξ(M)` in closed form.
///
/// The normal space of the graph is spanned by `(−A*W)^h + W^v` with
/// `A = ∇ξ`, and the second fundamental form pairs with it as half the
/// [`eq5_residual`] `E`, giving `‖II‖ = ½ √(Eᵀ (I + AA*)⁻¹ E)` in an
/// orthonormal frame.
pub fn graph_second_form_norm(
    chart: &ChartMetric,
    xi: &VectorField,
    x: &VectorField,
    y: &VectorField,
    q: Vec2,
) -> Result<f64> {
    let e = eq5_residual(chart, xi, x, y, q)?;
    let f = Fields::new(chart, q)?;
    let xi_f = FirstJet::from(&xi.jet(chart, &q)?);
    let a = Mat2::from_columns(&[f.cov(&Vec2::new(1.0, 0.0), &xi_f), f.cov(&Vec2::new(0.0, 1.0), &xi_f)]);
    // columns of p are a g-orthonormal frame
    let chol = f.local.g.cholesky().ok_or_else(|| GeometryError::degenerate(q, "metric is not positive definite"))?;
    let p_inv = chol.l().transpose();
    let p = p_inv.try_inverse().ok_or_else(|| GeometryError::degenerate(q, "singular frame"))?;
    let a_hat = p_inv * a * p;
    let e_hat = p_inv * e;
    let m = Mat2::identity() + a_hat * a_hat.transpose();
    let w = m.try_inverse().ok_or_else(|| GeometryError::degenerate(q, "singular normal Gram matrix"))? * e_hat;
    Ok(0.5 * e_hat.dot(&w).max(0.0).sqrt())
}

/// The two equations for `ξ = ρ e_ξ`: the scalar one along `e_ξ` and the
/// vector one orthogonal to it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma1Residual {
    pub parallel: f64,
    pub normal: Vec2,
}

pub fn lemma1_residual(
    chart: &ChartMetric,
    rho: &ScalarField,
    e_xi: &VectorField,
    x: &VectorField,
    q: Vec2,
) -> Result<Lemma1Residual> {
    let f = Fields::new(chart, q)?;
    let rj = rho.jet(&q);
    if !(rj.v > 0.0) {
        return Err(GeometryError::Precondition(format!("length function must be positive, ρ = {}", rj.v)));
    }
    let e_j = e_xi.jet(chart, &q)?;
    let e_len = f.local.norm(&e_j.value);
    if (e_len - 1.0).abs() > PRECONDITION_TOL {
        return Err(GeometryError::Precondition(format!("e_ξ must be unit, |e_ξ| = {e_len}")));
    }
    let e_f = FirstJet::from(&e_j);
    let xj = f.first(x)?;
    let grad = Vec2::new(rj.d[0], rj.d[1]);
    let r = rj.v;

    let nxe = f.cov(&xj.value, &e_f);
    let z = f.local.riemann.apply(&e_j.value, &nxe, &xj.value);
    let nxe2 = f.local.inner(&nxe, &nxe);
    let parallel = hessian(&f.local, &xj, &xj, &rj) - r * r * grad.dot(&z) - r * nxe2;
    let normal = f.cov(&z, &e_f) * r.powi(3)
        - nxe * (2.0 * grad.dot(&xj.value))
        - (second_derivative(&f.local, &xj, &xj, &e_j) + e_j.value * nxe2) * r;
    Ok(Lemma1Residual { parallel, normal })
}

/// Pointwise quantities of a semi-geodesic field.
struct Semi {
    b: Jet2,
    rho: Jet2,
    k: f64,
    gauss: f64,
    lambda: f64,
    c: f64,
    c_u: f64,
    c_v: f64,
}

fn semi_quantities(field: &SemiGeodesicField, q: &Vec2) -> Result<Semi> {
    field.chart.check_domain(q)?;
    let warp = field
        .chart
        .warp()
        .ok_or_else(|| GeometryError::InvalidArgument(format!("{} is not semi-geodesic", field.chart.name())))?;
    let b = warp.jet(q);
    if !(b.v > 0.0) {
        return Err(GeometryError::degenerate(*q, format!("warp b = {} is not positive", b.v)));
    }
    let rho = field.rho.jet(q);
    let w = field.omega.jet(q);
    let (bu, bv) = (b.d[0], b.d[1]);
    let k = -bu / b.v;
    let gauss = -b.h[0][0] / b.v;
    // λ = e₂(ω) − k = (∂₂ω + ∂₁b)/b
    let num = w.d[1] + bu;
    let lambda = num / b.v;
    let lambda_u = (w.h[0][1] + b.h[0][0]) / b.v - num * bu / (b.v * b.v);
    let lambda_v = (w.h[1][1] + b.h[0][1]) / b.v - num * bv / (b.v * b.v);
    let c = rho.v * rho.v * lambda;
    let c_u = 2.0 * rho.v * rho.d[0] * lambda + rho.v * rho.v * lambda_u;
    let c_v = 2.0 * rho.v * rho.d[1] * lambda + rho.v * rho.v * lambda_v;
    Ok(Semi { b, rho, k, gauss, lambda, c, c_u, c_v })
}

/// The four scalar equations for a semi-geodesic field, plus the defect of
/// the frame commutator `e₁(e₂ρ) − e₂(e₁ρ) = k e₂ρ` evaluated independently.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma2Residual {
    pub residuals: [f64; 4],
    pub commutator_defect: f64,
}

impl Lemma2Residual {
    pub fn max_abs(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

pub fn lemma2_residual(field: &SemiGeodesicField, q: Vec2) -> Result<Lemma2Residual> {
    let s = semi_quantities(field, &q)?;
    let rho_uu = s.rho.h[0][0];
    if rho_uu.abs() > PRECONDITION_TOL {
        return Err(GeometryError::Precondition(format!("∂₁²ρ = {rho_uu:e} must vanish")));
    }
    let omega_u = field.omega.jet(&q).d[0];
    if omega_u.abs() > PRECONDITION_TOL {
        return Err(GeometryError::Precondition(format!("ω must not depend on u, ∂₁ω = {omega_u:e}")));
    }
    let (b, r) = (s.b.v, &s.rho);
    let e1_rho = r.d[0];
    let e2_rho = r.d[1] / b;
    let e2e2_rho = (r.h[1][1] / b - r.d[1] * s.b.d[1] / (b * b)) / b;
    let e1e2_rho = r.h[0][1] / b - r.d[1] * s.b.d[0] / (b * b);
    let kc = s.k + s.c * s.gauss;
    let residuals = [
        e2e2_rho - kc * e1_rho - r.v * s.lambda * s.lambda,
        s.c_v / b,
        2.0 * e1e2_rho + s.c * s.gauss * e2_rho,
        s.c_u + s.c * kc,
    ];

    let warp = field.chart.warp().expect("checked by semi_quantities");
    let h = 1e-4;
    let e2_of = |p: Vec2| field.rho.jet(&p).d[1] / warp.jet(&p).v;
    let e1_of = |p: Vec2| field.rho.jet(&p).d[0];
    let du = Vec2::new(h, 0.0);
    let dv = Vec2::new(0.0, h);
    let e1e2 = (e2_of(q + du) - e2_of(q - du)) / (2.0 * h);
    let e2e1 = (e1_of(q + dv) - e1_of(q - dv)) / (2.0 * h) / b;
    let commutator_defect = (e1e2 - e2e1 - s.k * e2_rho).abs();
    Ok(Lemma2Residual { residuals, commutator_defect })
}

/// The reduced system for `e₂(ρ) = 0`:
/// `−(k+cK)∂₁ρ − ρλ²`, `∂₂c`, `∂₁c + c(k+cK)`.
pub fn tg_eqn3_residual(field: &SemiGeodesicField, q: Vec2) -> Result<[f64; 3]> {
    let s = semi_quantities(field, &q)?;
    if s.rho.d[1].abs() > PRECONDITION_TOL {
        return Err(GeometryError::Precondition(format!("∂₂ρ = {:e} must vanish", s.rho.d[1])));
    }
    let kc = s.k + s.c * s.gauss;
    Ok([-kc * s.rho.d[0] - s.rho.v * s.lambda * s.lambda, s.c_v, s.c_u + s.c * kc])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelDirection {
    /// Unit vector spanning the kernel of `Z ↦ ∇_Z e_ξ`.
    pub direction: Vec2,
    /// Set when `∇e_ξ` vanishes at the point and every direction is a kernel direction.
    pub parallel: bool,
}

/// The direction along which the unit field `e_ξ` is parallel at `q`.
pub fn find_kernel_direction(chart: &ChartMetric, e_xi: &VectorField, q: Vec2) -> Result<KernelDirection> {
    let f = Fields::new(chart, q)?;
    let e = f.first(e_xi)?;
    let len = f.local.norm(&e.value);
    if (len - 1.0).abs() > PRECONDITION_TOL {
        return Err(GeometryError::Precondition(format!("e_ξ must be unit, |e_ξ| = {len}")));
    }
    let nu = rotate_quarter(&f.local.g, &e.value);
    let alpha = Vec2::new(
        f.local.inner(&f.cov(&Vec2::new(1.0, 0.0), &e), &nu),
        f.local.inner(&f.cov(&Vec2::new(0.0, 1.0), &e), &nu),
    );
    let dual = alpha.dot(&(f.local.g_inv * alpha)).max(0.0).sqrt();
    if dual <= 1e-10 {
        return Ok(KernelDirection { direction: Vec2::new(1.0 / f.local.g[(0, 0)].sqrt(), 0.0), parallel: true });
    }
    let mut z = Vec2::new(-alpha[1], alpha[0]);
    z /= f.local.norm(&z);
    if z[0] < 0.0 || (z[0] == 0.0 && z[1] < 0.0) {
        z = -z;
    }
    Ok(KernelDirection { direction: z, parallel: false })
}

/// Residuals of the reduced system for a field parallel along the
/// `u`-geodesics of a semi-geodesic chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParallelFamilyResidual {
    /// `∇_{e₂}∇_{e₂}ξ`.
    pub along: Vec2,
    /// `∇_{e₁}∇_{e₂}ξ + (k + cK)∇_{e₂}ξ`.
    pub cross: Vec2,
    pub c: f64,
    /// `|∇_{e₁}ξ|`, which the reduction assumes to vanish.
    pub precondition_defect: f64,
    pub precondition_ok: bool,
}

impl ParallelFamilyResidual {
    pub fn max_norm(&self, chart: &ChartMetric, q: &Vec2) -> Result<f64> {
        let g = chart.metric_at(q)?;
        Ok(crate::geometry::norm(&g, &self.along).max(crate::geometry::norm(&g, &self.cross)))
    }
}

pub fn parallel_family_check(chart: &ChartMetric, xi: &VectorField, q: Vec2) -> Result<ParallelFamilyResidual> {
    let f = Fields::new(chart, q)?;
    let warp =
        chart.warp().ok_or_else(|| GeometryError::InvalidArgument(format!("{} is not semi-geodesic", chart.name())))?;
    let b = warp.jet(&q);
    let xi_j = xi.jet(chart, &q)?;
    let xi_f = FirstJet::from(&xi_j);
    let e1 = f.first(&VectorField::frame(1.0, 0.0))?;
    let e2 = f.first(&VectorField::frame(0.0, 1.0))?;
    let d1 = f.cov(&e1.value, &xi_f);
    let d2 = f.cov(&e2.value, &xi_f);
    let k = -b.d[0] / b.v;
    let c = f.local.inner(&rotate_quarter(&f.local.g, &xi_j.value), &d2);
    let along = nabla_nabla(&f.local, &e2.value, &e2, &xi_j);
    let cross = nabla_nabla(&f.local, &e1.value, &e2, &xi_j) + d2 * (k + c * f.local.gauss);
    let precondition_defect = f.local.norm(&d1);
    Ok(ParallelFamilyResidual { along, cross, c, precondition_defect, precondition_ok: precondition_defect <= 1e-6 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_constant_curvature_chart, CurvatureFamily, Domain, Warp};

    fn sphere() -> ChartMetric {
        make_constant_curvature_chart(CurvatureFamily::Cos, 1.0).unwrap()
    }

    fn flat() -> ChartMetric {
        ChartMetric::flat(Domain::new((-1.0, 1.0), (-1.0, 1.0)))
    }

    #[test]
    fn trivial_fields_have_no_residual() {
        let q = Vec2::new(0.2, 0.3);
        let (x, y) = (VectorField::constant(0.3, 0.5), VectorField::constant(-0.2, 0.9));
        assert_eq!(eq5_residual(&sphere(), &VectorField::Zero, &x, &y, q).unwrap(), Vec2::zeros());
        assert!(eq5_residual(&flat(), &VectorField::constant(0.4, 0.1), &x, &y, q).unwrap().norm() < 1e-15);
    }

    #[test]
    fn graph_of_first_frame_vector_fails_on_sphere() {
        let e2 = VectorField::frame(0.0, 1.0);
        let r = eq5_residual(&sphere(), &VectorField::frame(0.5, 0.0), &e2, &e2, Vec2::new(0.3, 0.0)).unwrap();
        assert!(r.norm() > 1e-2);
        let r7 = eq7_residual(&sphere(), &VectorField::frame(0.5, 0.0), &e2, Vec2::new(0.3, 0.0)).unwrap();
        assert!((r * 0.5 - r7).norm() < 1e-14);
    }

    #[test]
    fn field_equations_vanish_on_flat_solutions() {
        let f = SemiGeodesicField::new(flat(), ScalarField::constant(0.7), ScalarField::constant(0.4)).unwrap();
        let r = lemma2_residual(&f, Vec2::new(0.1, 0.2)).unwrap();
        assert!(r.max_abs() < 1e-12);

        // b = m − αu with ω = αv makes λ = 0
        let (alpha, m) = (0.4, 2.0);
        let chart =
            ChartMetric::semi_geodesic("linear", Domain::new((-1.0, 1.0), (-1.0, 1.0)), Warp::Linear { alpha, m });
        let f =
            SemiGeodesicField::new(chart, ScalarField::constant(1.3), ScalarField::affine(0.0, 0.0, alpha)).unwrap();
        for q in [Vec2::new(0.3, -0.4), Vec2::new(-0.7, 0.6)] {
            let r = lemma2_residual(&f, q).unwrap();
            assert!(r.max_abs() < 1e-8, "{r:?}");
            assert!(r.commutator_defect < 1e-8);
        }
    }

    #[test]
    fn field_equations_check_their_preconditions() {
        let bad = SemiGeodesicField::new(
            sphere(),
            ScalarField::Quadratic { c0: 1.0, cu: 0.0, cv: 0.0, cuu: 0.5, cuv: 0.0, cvv: 0.0 },
            ScalarField::constant(0.0),
        )
        .unwrap();
        assert!(matches!(lemma2_residual(&bad, Vec2::zeros()), Err(GeometryError::Precondition(_))));
        let bad =
            SemiGeodesicField::new(sphere(), ScalarField::constant(1.0), ScalarField::affine(0.0, 0.2, 0.0)).unwrap();
        assert!(matches!(lemma2_residual(&bad, Vec2::zeros()), Err(GeometryError::Precondition(_))));
    }

    #[test]
    fn tg_eqn3_on_sphere() {
        let f =
            SemiGeodesicField::new(sphere(), ScalarField::affine(1.0, 0.3, 0.0), ScalarField::constant(0.0)).unwrap();
        let r = tg_eqn3_residual(&f, Vec2::new(0.2, 0.1)).unwrap();
        assert!(r.iter().any(|x| x.abs() > 1e-3));
        let flat_f = SemiGeodesicField::new(flat(), ScalarField::constant(1.0), ScalarField::constant(0.3)).unwrap();
        assert!(tg_eqn3_residual(&flat_f, Vec2::new(0.2, 0.1)).unwrap().iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn kernel_directions() {
        let k = find_kernel_direction(&flat(), &VectorField::constant(0.6, 0.8), Vec2::zeros()).unwrap();
        assert!(k.parallel);
        let k = find_kernel_direction(&sphere(), &VectorField::frame(1.0, 0.0), Vec2::new(0.4, 0.1)).unwrap();
        assert!(!k.parallel);
        assert!((k.direction - Vec2::new(1.0, 0.0)).norm() < 1e-12);
        assert!(find_kernel_direction(&sphere(), &VectorField::frame(2.0, 0.0), Vec2::zeros()).is_err());
    }

    #[test]
    fn parallel_family_on_flat_and_sphere() {
        let r = parallel_family_check(&flat(), &VectorField::constant(0.5, 0.2), Vec2::new(0.1, 0.1)).unwrap();
        assert!(r.along.norm() < 1e-14 && r.cross.norm() < 1e-14 && r.precondition_ok);
        let xi =
            VectorField::Polar { rho: ScalarField::affine(1.0, 0.0, 0.4), omega: ScalarField::affine(0.2, 0.0, 0.5) };
        let q = Vec2::new(0.3, 0.2);
        let r = parallel_family_check(&sphere(), &xi, q).unwrap();
        assert!(r.precondition_ok);
        assert!(r.max_norm(&sphere(), &q).unwrap() > 1e-3);
        let bad = parallel_family_check(&sphere(), &VectorField::constant(0.5, 0.0), Vec2::new(0.3, 0.0)).unwrap();
        assert!(bad.precondition_ok, "∂u is parallel along u-geodesics");
        let bad = parallel_family_check(&sphere(), &VectorField::constant(0.0, 0.5), Vec2::new(0.3, 0.0)).unwrap();
        assert!(!bad.precondition_ok);
    }
}
