//! Registries of scalar and vector fields on a chart.
//!
//! Fields are evaluated over [`Jet2`] so their first and second partials are
//! exact. Frame-based fields (`Frame`, `Polar`) live in the orthonormal frame
//! `e₁ = ∂₁`, `e₂ = ∂₂/b` of a semi-geodesic chart.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ChartMetric, Vec2};
use crate::error::{GeometryError, Result};
use crate::jet::Jet2;

pub type ScalarJet = Jet2;

type ScalarFn = Arc<dyn Fn(Jet2, Jet2) -> Jet2 + Send + Sync>;
type VectorFn = Arc<dyn Fn(Jet2, Jet2) -> [Jet2; 2] + Send + Sync>;

/// A closure-backed field; compares by identity.
pub struct Custom<F: ?Sized>(pub Arc<F>);

impl<F: ?Sized> Clone for Custom<F> {
    fn clone(&self) -> Self {
        Custom(Arc::clone(&self.0))
    }
}

impl<F: ?Sized> fmt::Debug for Custom<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Custom(..)")
    }
}

impl<F: ?Sized> PartialEq for Custom<F> {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarField {
    Const {
        value: f64,
    },
    /// `c0 + cu·u + cv·v`.
    Affine {
        c0: f64,
        #[serde(default)]
        cu: f64,
        #[serde(default)]
        cv: f64,
    },
    /// Full quadratic polynomial in `(u, v)`.
    Quadratic {
        #[serde(default)]
        c0: f64,
        #[serde(default)]
        cu: f64,
        #[serde(default)]
        cv: f64,
        #[serde(default)]
        cuu: f64,
        #[serde(default)]
        cuv: f64,
        #[serde(default)]
        cvv: f64,
    },
    /// `offset + amplitude·sin(ku·u + kv·v + phase)`.
    Wave {
        #[serde(default)]
        offset: f64,
        amplitude: f64,
        #[serde(default)]
        ku: f64,
        #[serde(default)]
        kv: f64,
        #[serde(default)]
        phase: f64,
    },
    #[serde(skip)]
    Custom(Custom<dyn Fn(Jet2, Jet2) -> Jet2 + Send + Sync>),
}

impl ScalarField {
    pub fn constant(value: f64) -> Self {
        ScalarField::Const { value }
    }

    pub fn affine(c0: f64, cu: f64, cv: f64) -> Self {
        ScalarField::Affine { c0, cu, cv }
    }

    pub fn custom(f: impl Fn(Jet2, Jet2) -> Jet2 + Send + Sync + 'static) -> Self {
        let f: ScalarFn = Arc::new(f);
        ScalarField::Custom(Custom(f))
    }

    pub fn eval_jet(&self, u: Jet2, v: Jet2) -> Jet2 {
        match self {
            ScalarField::Const { value } => Jet2::constant(*value),
            ScalarField::Affine { c0, cu, cv } => u * *cu + v * *cv + *c0,
            ScalarField::Quadratic { c0, cu, cv, cuu, cuv, cvv } => {
                u * *cu + v * *cv + u * u * *cuu + u * v * *cuv + v * v * *cvv + *c0
            }
            ScalarField::Wave { offset, amplitude, ku, kv, phase } => {
                (u * *ku + v * *kv + *phase).sin() * *amplitude + *offset
            }
            ScalarField::Custom(f) => (f.0)(u, v),
        }
    }

    pub fn jet(&self, q: &Vec2) -> ScalarJet {
        let (u, v) = Jet2::seed(q[0], q[1]);
        self.eval_jet(u, v)
    }

    pub fn value(&self, q: &Vec2) -> f64 {
        self.jet(q).v
    }
}

/// Components of a vector field with first and second partials:
/// `d[j][i] = ∂_j ξ^i`, `dd[j][k][i] = ∂_j ∂_k ξ^i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldJet {
    pub value: Vec2,
    pub d: [Vec2; 2],
    pub dd: [[Vec2; 2]; 2],
}

impl FieldJet {
    fn from_components(c: [Jet2; 2]) -> Self {
        let v = |f: &dyn Fn(&Jet2) -> f64| Vec2::new(f(&c[0]), f(&c[1]));
        FieldJet {
            value: v(&|j| j.v),
            d: [v(&|j| j.d[0]), v(&|j| j.d[1])],
            dd: [[v(&|j| j.h[0][0]), v(&|j| j.h[0][1])], [v(&|j| j.h[1][0]), v(&|j| j.h[1][1])]],
        }
    }

    /// A field equal to `value` at the point with vanishing partials.
    pub fn frozen(value: Vec2) -> Self {
        FieldJet { value, d: [Vec2::zeros(); 2], dd: [[Vec2::zeros(); 2]; 2] }
    }

    /// `(x^j ∂_j) ξ` at the point.
    pub fn directional(&self, x: &Vec2) -> Vec2 {
        self.d[0] * x[0] + self.d[1] * x[1]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorField {
    Zero,
    /// Constant coordinate components.
    Constant {
        components: [f64; 2],
    },
    /// `offset + matrix · (u, v)` in coordinate components.
    Affine {
        offset: [f64; 2],
        matrix: [[f64; 2]; 2],
    },
    /// Coordinate components given by two scalar fields.
    Components {
        x1: ScalarField,
        x2: ScalarField,
    },
    /// `c1·e₁ + c2·e₂` in the orthonormal frame of a semi-geodesic chart.
    Frame {
        c1: ScalarField,
        c2: ScalarField,
    },
    /// `ρ (cos ω e₁ + sin ω e₂)` in the orthonormal frame of a semi-geodesic chart.
    Polar {
        rho: ScalarField,
        omega: ScalarField,
    },
    #[serde(skip)]
    Custom(Custom<dyn Fn(Jet2, Jet2) -> [Jet2; 2] + Send + Sync>),
}

impl VectorField {
    pub fn constant(x1: f64, x2: f64) -> Self {
        VectorField::Constant { components: [x1, x2] }
    }

    /// The coordinate field `∂_index`.
    pub fn coordinate(index: usize) -> Self {
        let mut c = [0.0; 2];
        c[index] = 1.0;
        VectorField::Constant { components: c }
    }

    pub fn frame(c1: f64, c2: f64) -> Self {
        VectorField::Frame { c1: ScalarField::constant(c1), c2: ScalarField::constant(c2) }
    }

    pub fn custom(f: impl Fn(Jet2, Jet2) -> [Jet2; 2] + Send + Sync + 'static) -> Self {
        let f: VectorFn = Arc::new(f);
        VectorField::Custom(Custom(f))
    }

    /// Whether evaluation needs the orthonormal frame of a semi-geodesic chart.
    pub fn needs_frame(&self) -> bool {
        matches!(self, VectorField::Frame { .. } | VectorField::Polar { .. })
    }

    pub fn eval_jet(&self, chart: &ChartMetric, u: Jet2, v: Jet2) -> Result<[Jet2; 2]> {
        let zero = Jet2::constant(0.0);
        Ok(match self {
            VectorField::Zero => [zero, zero],
            VectorField::Constant { components } => [components[0].into(), components[1].into()],
            VectorField::Affine { offset, matrix } => {
                [u * matrix[0][0] + v * matrix[0][1] + offset[0], u * matrix[1][0] + v * matrix[1][1] + offset[1]]
            }
            VectorField::Components { x1, x2 } => [x1.eval_jet(u, v), x2.eval_jet(u, v)],
            VectorField::Frame { c1, c2 } => {
                let b = frame_warp(chart, u, v)?;
                [c1.eval_jet(u, v), c2.eval_jet(u, v) / b]
            }
            VectorField::Polar { rho, omega } => {
                let b = frame_warp(chart, u, v)?;
                let r = rho.eval_jet(u, v);
                let w = omega.eval_jet(u, v);
                [r * w.cos(), r * w.sin() / b]
            }
            VectorField::Custom(f) => (f.0)(u, v),
        })
    }

    pub fn jet(&self, chart: &ChartMetric, q: &Vec2) -> Result<FieldJet> {
        let (u, v) = Jet2::seed(q[0], q[1]);
        Ok(FieldJet::from_components(self.eval_jet(chart, u, v)?))
    }

    pub fn value(&self, chart: &ChartMetric, q: &Vec2) -> Result<Vec2> {
        Ok(self.jet(chart, q)?.value)
    }
}

fn frame_warp(chart: &ChartMetric, u: Jet2, v: Jet2) -> Result<Jet2> {
    let warp = chart.warp().ok_or_else(|| {
        GeometryError::InvalidArgument(format!("frame-based field needs a semi-geodesic chart, got {}", chart.name()))
    })?;
    let b = warp.eval(u, v);
    if !(b.v > 0.0) {
        return Err(GeometryError::Degenerate { u: u.v, v: v.v, detail: format!("warp b = {} is not positive", b.v) });
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::super::{make_constant_curvature_chart, CurvatureFamily};
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn frame_fields_are_orthonormal_combinations() {
        let chart = make_constant_curvature_chart(CurvatureFamily::Cos, 1.0).unwrap();
        let q = Vec2::new(0.4, 0.1);
        let g = chart.metric_at(&q).unwrap();
        let e2 = VectorField::frame(0.0, 1.0).value(&chart, &q).unwrap();
        assert_abs_diff_eq!(super::super::norm(&g, &e2), 1.0, epsilon = 1e-15);
        let polar = VectorField::Polar { rho: ScalarField::constant(2.0), omega: ScalarField::constant(0.7) };
        let x = polar.value(&chart, &q).unwrap();
        assert_abs_diff_eq!(super::super::norm(&g, &x), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn frame_fields_need_semi_geodesic_chart() {
        let chart = ChartMetric::sampled("g", super::super::Domain::new((-1.0, 1.0), (-1.0, 1.0)), |_, _| {
            super::super::Mat2::identity()
        });
        assert!(VectorField::frame(1.0, 0.0).jet(&chart, &Vec2::zeros()).is_err());
        assert!(VectorField::constant(1.0, 0.0).jet(&chart, &Vec2::zeros()).is_ok());
    }

    #[test]
    fn field_config_round_trip() {
        let f = VectorField::Polar {
            rho: ScalarField::Affine { c0: 1.0, cu: 0.3, cv: 0.0 },
            omega: ScalarField::Const { value: 0.0 },
        };
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<VectorField>(&s).unwrap(), f);
    }
}
