use super::chart::{check_positive, MetricJet};
use super::{Mat2, Vec2};
use crate::error::Result;

/// Christoffel symbols `Γ^i_{jk}` stored as `[i][j][k]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Christoffel(pub [[[f64; 2]; 2]; 2]);

impl Christoffel {
    /// `Γ^i_{jk} x^j y^k`.
    pub fn contract(&self, x: &Vec2, y: &Vec2) -> Vec2 {
        let mut out = Vec2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    out[i] += self.0[i][j][k] * x[j] * y[k];
                }
            }
        }
        out
    }

    /// The matrix `(Γξ)^i_k = Γ^i_{jk} ξ^j`.
    pub fn along(&self, xi: &Vec2) -> Mat2 {
        let mut m = Mat2::zeros();
        for i in 0..2 {
            for k in 0..2 {
                m[(i, k)] = self.0[i][0][k] * xi[0] + self.0[i][1][k] * xi[1];
            }
        }
        m
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            worst = worst.max((self.0[i][0][1] - self.0[i][1][0]).abs());
        }
        worst
    }
}

/// Curvature tensor with `R(∂_k, ∂_l)∂_j = R^i_{jkl} ∂_i`, stored as `[i][j][k][l]`,
/// for `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]} Z`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Riemann(pub [[[[f64; 2]; 2]; 2]; 2]);

impl Riemann {
    /// `R(x, y) z`.
    pub fn apply(&self, x: &Vec2, y: &Vec2, z: &Vec2) -> Vec2 {
        let mut out = Vec2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out[i] += self.0[i][j][k][l] * z[j] * x[k] * y[l];
                    }
                }
            }
        }
        out
    }

    /// `R_{ijkl} = ⟨R(∂_k, ∂_l)∂_j, ∂_i⟩`.
    pub fn lowered(&self, g: &Mat2) -> [[[[f64; 2]; 2]; 2]; 2] {
        let mut out = [[[[0.0; 2]; 2]; 2]; 2];
        for (i, oi) in out.iter_mut().enumerate() {
            for (j, oj) in oi.iter_mut().enumerate() {
                for (k, ok) in oj.iter_mut().enumerate() {
                    for (l, ol) in ok.iter_mut().enumerate() {
                        *ol = (0..2).map(|m| g[(i, m)] * self.0[m][j][k][l]).sum();
                    }
                }
            }
        }
        out
    }
}

/// Everything the connection needs at a single base point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalGeometry {
    pub q: Vec2,
    pub g: Mat2,
    pub g_inv: Mat2,
    pub gamma: Christoffel,
    /// `dgamma[m] = ∂_m Γ`.
    pub dgamma: [Christoffel; 2],
    pub riemann: Riemann,
    pub gauss: f64,
}

impl LocalGeometry {
    pub fn from_jet(q: Vec2, jet: &MetricJet) -> Result<Self> {
        check_positive(&jet.g, &q)?;
        let g_inv = jet.g.try_inverse().expect("positive definite metric is invertible");
        let dg_inv = [-g_inv * jet.dg[0] * g_inv, -g_inv * jet.dg[1] * g_inv];

        // first-kind symbols S_{ljk} = ∂_j g_lk + ∂_k g_lj − ∂_l g_jk and their derivatives
        let s = |l: usize, j: usize, k: usize| jet.dg[j][(l, k)] + jet.dg[k][(l, j)] - jet.dg[l][(j, k)];
        let ds = |m: usize, l: usize, j: usize, k: usize| {
            jet.d2g[m][j][(l, k)] + jet.d2g[m][k][(l, j)] - jet.d2g[m][l][(j, k)]
        };

        let mut gamma = Christoffel::default();
        let mut dgamma = [Christoffel::default(); 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    gamma.0[i][j][k] = 0.5 * (0..2).map(|l| g_inv[(i, l)] * s(l, j, k)).sum::<f64>();
                    for m in 0..2 {
                        dgamma[m].0[i][j][k] = 0.5
                            * (0..2)
                                .map(|l| dg_inv[m][(i, l)] * s(l, j, k) + g_inv[(i, l)] * ds(m, l, j, k))
                                .sum::<f64>();
                    }
                }
            }
        }

        let mut riemann = Riemann::default();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let mut r = dgamma[k].0[i][l][j] - dgamma[l].0[i][k][j];
                        for m in 0..2 {
                            r += gamma.0[m][l][j] * gamma.0[i][k][m] - gamma.0[m][k][j] * gamma.0[i][l][m];
                        }
                        riemann.0[i][j][k][l] = r;
                    }
                }
            }
        }
        let lowered = riemann.lowered(&jet.g);
        let gauss = lowered[0][1][0][1] / jet.g.determinant();

        Ok(LocalGeometry { q, g: jet.g, g_inv, gamma, dgamma, riemann, gauss })
    }

    pub fn inner(&self, x: &Vec2, y: &Vec2) -> f64 {
        super::inner(&self.g, x, y)
    }

    pub fn norm(&self, x: &Vec2) -> f64 {
        super::norm(&self.g, x)
    }

    /// Directional derivative of the Christoffel symbols, `(x^m ∂_m Γ)`.
    pub fn dgamma_along(&self, x: &Vec2) -> Christoffel {
        let mut out = Christoffel::default();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    out.0[i][j][k] = x[0] * self.dgamma[0].0[i][j][k] + x[1] * self.dgamma[1].0[i][j][k];
                }
            }
        }
        out
    }
}
