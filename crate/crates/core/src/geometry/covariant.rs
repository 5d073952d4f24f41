//! Levi-Civita covariant derivatives of jet-evaluated fields at a point.

use super::{FieldJet, LocalGeometry, Vec2};

/// A vector field known to first order at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FirstJet {
    pub value: Vec2,
    /// `d[j] = ∂_j` of the components.
    pub d: [Vec2; 2],
}

impl From<&FieldJet> for FirstJet {
    fn from(j: &FieldJet) -> Self {
        FirstJet { value: j.value, d: j.d }
    }
}

impl FirstJet {
    pub fn directional(&self, x: &Vec2) -> Vec2 {
        self.d[0] * x[0] + self.d[1] * x[1]
    }
}

/// `∇_x Y` for a tangent vector `x` and a field `Y`.
pub fn nabla(local: &LocalGeometry, x: &Vec2, y: &FirstJet) -> Vec2 {
    y.directional(x) + local.gamma.contract(x, &y.value)
}

/// The field `∇_Y ξ` to first order.
pub fn nabla_field(local: &LocalGeometry, y: &FirstJet, xi: &FieldJet) -> FirstJet {
    let value = xi.directional(&y.value) + local.gamma.contract(&y.value, &xi.value);
    let mut d = [Vec2::zeros(); 2];
    for (j, dj) in d.iter_mut().enumerate() {
        let second = xi.dd[j][0] * y.value[0] + xi.dd[j][1] * y.value[1];
        *dj = xi.directional(&y.d[j])
            + second
            + local.dgamma[j].contract(&y.value, &xi.value)
            + local.gamma.contract(&y.d[j], &xi.value)
            + local.gamma.contract(&y.value, &xi.d[j]);
    }
    FirstJet { value, d }
}

/// `∇_X (∇_Y ξ)` as fields.
pub fn nabla_nabla(local: &LocalGeometry, x: &Vec2, y: &FirstJet, xi: &FieldJet) -> Vec2 {
    nabla(local, x, &nabla_field(local, y, xi))
}

/// `r(X,Y)ξ = ∇_X∇_Y ξ − ∇_{∇_X Y} ξ`, tensorial in `X` and `Y`.
pub fn second_derivative(local: &LocalGeometry, x: &FirstJet, y: &FirstJet, xi: &FieldJet) -> Vec2 {
    let nxy = nabla(local, &x.value, y);
    nabla_nabla(local, &x.value, y, xi) - nabla(local, &nxy, &FirstJet::from(xi))
}

/// Hessian `X(Y(f)) − (∇_X Y)(f)` of a scalar jet.
pub fn hessian(local: &LocalGeometry, x: &FirstJet, y: &FirstJet, f: &crate::jet::Jet2) -> f64 {
    let grad = Vec2::new(f.d[0], f.d[1]);
    let mut xyf = 0.0;
    for j in 0..2 {
        for m in 0..2 {
            xyf += x.value[j] * (y.d[j][m] * f.d[m] + y.value[m] * f.h[j][m]);
        }
    }
    xyf - grad.dot(&nabla(local, &x.value, y))
}
