//! Second-order forward-mode jets in two variables.
//!
//! A [`Jet2`] carries a value together with its gradient and Hessian with
//! respect to the chart coordinates `(u, v)`. Metric components and builtin
//! fields are written once as functions of `Jet2` and every derivative the
//! geometry needs (Christoffel symbols, their derivatives, second covariant
//! derivatives of fields) falls out exactly, without finite-difference noise.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub d: [f64; 2],
    pub h: [[f64; 2]; 2],
}

impl Jet2 {
    pub const fn constant(v: f64) -> Self {
        Jet2 { v, d: [0.0; 2], h: [[0.0; 2]; 2] }
    }

    /// The coordinate function `x_index` evaluated at `value`.
    pub const fn variable(value: f64, index: usize) -> Self {
        let mut d = [0.0; 2];
        d[index] = 1.0;
        Jet2 { v: value, d, h: [[0.0; 2]; 2] }
    }

    /// Seeds both chart coordinates at `(u, v)`.
    pub const fn seed(u: f64, v: f64) -> (Self, Self) {
        (Jet2::variable(u, 0), Jet2::variable(v, 1))
    }

    // Composition with a scalar function given its value and first two derivatives.
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Jet2::constant(f0);
        for a in 0..2 {
            out.d[a] = f1 * self.d[a];
            for b in 0..2 {
                out.h[a][b] = f2 * self.d[a] * self.d[b] + f1 * self.h[a][b];
            }
        }
        out
    }

    pub fn recip(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r)
    }

    pub fn sinh(self) -> Self {
        self.chain(self.v.sinh(), self.v.cosh(), self.v.sinh())
    }

    pub fn cosh(self) -> Self {
        self.chain(self.v.cosh(), self.v.sinh(), self.v.cosh())
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn powi(self, n: i32) -> Self {
        match n {
            0 => Jet2::constant(1.0),
            1 => self,
            _ => {
                let nf = f64::from(n);
                self.chain(self.v.powi(n), nf * self.v.powi(n - 1), nf * (nf - 1.0) * self.v.powi(n - 2))
            }
        }
    }

    pub fn scale(self, k: f64) -> Self {
        let mut out = self;
        out.v *= k;
        for a in 0..2 {
            out.d[a] *= k;
            for b in 0..2 {
                out.h[a][b] *= k;
            }
        }
        out
    }
}

impl From<f64> for Jet2 {
    fn from(v: f64) -> Self {
        Jet2::constant(v)
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        let mut out = self;
        out.v += o.v;
        for a in 0..2 {
            out.d[a] += o.d[a];
            for b in 0..2 {
                out.h[a][b] += o.h[a][b];
            }
        }
        out
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let mut out = Jet2::constant(self.v * o.v);
        for a in 0..2 {
            out.d[a] = self.d[a] * o.v + self.v * o.d[a];
            for b in 0..2 {
                out.h[a][b] = self.h[a][b] * o.v + self.d[a] * o.d[b] + o.d[a] * self.d[b] + self.v * o.h[a][b];
            }
        }
        out
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, o: f64) -> Jet2 {
        let mut out = self;
        out.v += o;
        out
    }
}

impl Add<Jet2> for f64 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        o + self
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(self, o: f64) -> Jet2 {
        self + (-o)
    }
}

impl Sub<Jet2> for f64 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        (-o) + self
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, k: f64) -> Jet2 {
        self.scale(k)
    }
}

impl Mul<Jet2> for f64 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        o.scale(self)
    }
}

impl Div<f64> for Jet2 {
    type Output = Jet2;
    fn div(self, k: f64) -> Jet2 {
        self.scale(1.0 / k)
    }
}

impl Div<Jet2> for f64 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        o.recip().scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Central-difference oracle for gradient and Hessian of a scalar map.
    fn fd_jet(f: &dyn Fn(f64, f64) -> f64, u: f64, v: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let h = 1e-4;
        let p = [u, v];
        let eval = |du: f64, dv: f64| f(p[0] + du, p[1] + dv);
        let grad = [(eval(h, 0.0) - eval(-h, 0.0)) / (2.0 * h), (eval(0.0, h) - eval(0.0, -h)) / (2.0 * h)];
        let uu = (eval(h, 0.0) - 2.0 * eval(0.0, 0.0) + eval(-h, 0.0)) / (h * h);
        let vv = (eval(0.0, h) - 2.0 * eval(0.0, 0.0) + eval(0.0, -h)) / (h * h);
        let uv = (eval(h, h) - eval(h, -h) - eval(-h, h) + eval(-h, -h)) / (4.0 * h * h);
        (grad, [[uu, uv], [uv, vv]])
    }

    #[allow(clippy::needless_range_loop)]
    fn check(jf: &dyn Fn(Jet2, Jet2) -> Jet2, ff: &dyn Fn(f64, f64) -> f64, u: f64, v: f64) {
        let (ju, jv) = Jet2::seed(u, v);
        let j = jf(ju, jv);
        assert!((j.v - ff(u, v)).abs() < 1e-14);
        let (g, h) = fd_jet(ff, u, v);
        for a in 0..2 {
            assert!((j.d[a] - g[a]).abs() < 1e-7, "grad {a}: {} vs {}", j.d[a], g[a]);
            for b in 0..2 {
                assert!((j.h[a][b] - h[a][b]).abs() < 1e-5, "hess {a}{b}: {} vs {}", j.h[a][b], h[a][b]);
            }
        }
    }

    #[test]
    fn products_and_quotients_match_finite_differences() {
        check(&|u, v| u * v * v / (1.0 + u * u), &|u, v| u * v * v / (1.0 + u * u), 0.4, -0.7);
    }

    #[test]
    fn transcendental_functions_match_finite_differences() {
        check(
            &|u, v| (u * 0.5).cos() * v.exp() + (u - v).sinh() - (u + 2.0).ln() + (u * u + 1.0).sqrt(),
            &|u, v| (u * 0.5).cos() * v.exp() + (u - v).sinh() - (u + 2.0).ln() + (u * u + 1.0).sqrt(),
            0.3,
            0.2,
        );
        check(&|u, v| u.sin().powi(3) * v.cosh(), &|u, v| u.sin().powi(3) * v.cosh(), -0.6, 0.9);
    }
}
