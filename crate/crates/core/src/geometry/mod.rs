//! Base-surface machinery: charts, connection, curvature, fields and curves.

mod chart;
mod connection;
pub mod covariant;
mod curves;
mod fields;

pub use chart::{make_constant_curvature_chart, ChartKind, ChartMetric, CurvatureFamily, Domain, MetricJet, Warp};
pub use connection::{Christoffel, LocalGeometry, Riemann};
pub use curves::{
    geodesic_integrate, geodesic_residual, integrate_curve, parallel_transport, BaseTangent, CurveOnBase, CurveSample,
    TransportSample, TransportedField,
};
pub use fields::{FieldJet, ScalarField, ScalarJet, VectorField};

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Mat2 = nalgebra::Matrix2<f64>;
pub type Vec4 = nalgebra::Vector4<f64>;
pub type Mat4 = nalgebra::Matrix4<f64>;

/// `⟨x, y⟩_g`.
pub fn inner(g: &Mat2, x: &Vec2, y: &Vec2) -> f64 {
    x.dot(&(g * y))
}

pub fn norm(g: &Mat2, x: &Vec2) -> f64 {
    inner(g, x, x).max(0.0).sqrt()
}

/// Rotation by +π/2 in the oriented metric `g`: `⟨x, Jx⟩ = 0`, `|Jx| = |x|`,
/// and `(x, Jx)` is positively oriented with respect to `(∂₁, ∂₂)`.
pub fn rotate_quarter(g: &Mat2, x: &Vec2) -> Vec2 {
    let s = g.determinant().sqrt();
    Vec2::new(-(g[(0, 1)] * x[0] + g[(1, 1)] * x[1]) / s, (g[(0, 0)] * x[0] + g[(0, 1)] * x[1]) / s)
}
