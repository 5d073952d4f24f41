//! Curves on the base surface: fixed-step RK4 geodesics, curves of prescribed
//! geodesic curvature, and parallel transport along sampled curves.

use nalgebra::Vector4;

use super::{rotate_quarter, ChartMetric, LocalGeometry, Vec2};
use crate::error::{GeometryError, Result};
use crate::interp::{self, Knot};

/// A tangent vector `x` at the base point `q`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaseTangent {
    pub q: Vec2,
    pub x: Vec2,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSample {
    pub s: f64,
    pub q: Vec2,
    pub qdot: Vec2,
    pub qddot: Vec2,
}

/// A uniformly sampled curve `s ↦ q(s)` with velocity and acceleration.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveOnBase {
    samples: Vec<CurveSample>,
    step: f64,
    truncated: bool,
}

impl CurveOnBase {
    /// Samples `f(s) = (q, q̇, q̈)` on `n + 1` uniformly spaced parameters.
    pub fn from_fn(s0: f64, length: f64, n: usize, f: impl Fn(f64) -> (Vec2, Vec2, Vec2)) -> Result<Self> {
        if n == 0 || !(length > 0.0) {
            return Err(GeometryError::InvalidArgument("a curve needs positive length and at least one step".into()));
        }
        let step = length / n as f64;
        let samples = (0..=n)
            .map(|i| {
                let s = s0 + step * i as f64;
                let (q, qdot, qddot) = f(s);
                CurveSample { s, q, qdot, qddot }
            })
            .collect();
        Ok(CurveOnBase { samples, step, truncated: false })
    }

    pub fn samples(&self) -> &[CurveSample] {
        &self.samples
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// True when integration stopped early because the curve left the chart.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn s_range(&self) -> (f64, f64) {
        (self.samples[0].s, self.samples[self.samples.len() - 1].s)
    }

    /// Interpolated position, velocity and acceleration at `s`.
    pub fn at(&self, s: f64) -> (Vec2, Vec2, Vec2) {
        let [p, dp, ddp] = interp::sample_with(self.samples.len(), |i| self.knot(i), s);
        (Vec2::new(p[0], p[1]), Vec2::new(dp[0], dp[1]), Vec2::new(ddp[0], ddp[1]))
    }

    pub fn position(&self, s: f64) -> Vec2 {
        self.at(s).0
    }

    fn knot(&self, i: usize) -> Knot<2> {
        let c = &self.samples[i];
        Knot { s: c.s, p: c.q, dp: c.qdot, ddp: c.qddot }
    }

    /// Checks uniform spacing and that every sample lies in the chart domain.
    pub fn validate(&self, chart: &ChartMetric) -> Result<()> {
        if self.samples.len() < 2 {
            return Err(GeometryError::InvalidArgument("curve has fewer than two samples".into()));
        }
        for w in self.samples.windows(2) {
            let ds = w[1].s - w[0].s;
            if !(ds > 0.0) || (ds - self.step).abs() > 1e-9 * self.step.max(1.0) {
                return Err(GeometryError::InvalidArgument("curve samples are not uniformly spaced".into()));
            }
        }
        for c in &self.samples {
            chart.check_domain(&c.q)?;
        }
        Ok(())
    }
}

fn curve_acceleration(local: &LocalGeometry, p: &Vec2, curvature: f64) -> Vec2 {
    let mut acc = -local.gamma.contract(p, p);
    if curvature != 0.0 {
        acc += rotate_quarter(&local.g, p) * (curvature * local.norm(p));
    }
    acc
}

/// Integrates `∇_{q̇} q̇ = k |q̇| J q̇` from `(q0, x0)` with classical RK4.
///
/// `k = 0` gives geodesics. The step is adjusted to divide `length` evenly.
/// If the curve leaves the chart, the samples up to the exit are returned
/// with [`CurveOnBase::truncated`] set.
pub fn integrate_curve(
    chart: &ChartMetric,
    q0: Vec2,
    x0: Vec2,
    s0: f64,
    length: f64,
    step: f64,
    curvature: f64,
) -> Result<CurveOnBase> {
    if !(step > 0.0) {
        return Err(GeometryError::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if !(length > 0.0) || !length.is_finite() {
        return Err(GeometryError::InvalidArgument(format!("length must be positive, got {length}")));
    }
    let local0 = chart.local(&q0)?;
    let speed = local0.norm(&x0);
    if (speed - 1.0).abs() > 1e-9 {
        return Err(GeometryError::Precondition(format!("initial velocity must be unit, |X0| = {speed}")));
    }
    let n = ((length / step).round() as usize).max(1);
    let h = length / n as f64;

    let rhs = |y: &Vector4<f64>| -> Result<Vector4<f64>> {
        let q = Vec2::new(y[0], y[1]);
        let p = Vec2::new(y[2], y[3]);
        let local = chart.local_unchecked(&q)?;
        let a = curve_acceleration(&local, &p, curvature);
        Ok(Vector4::new(p[0], p[1], a[0], a[1]))
    };

    let mut y = Vector4::new(q0[0], q0[1], x0[0], x0[1]);
    let mut samples = Vec::with_capacity(n + 1);
    samples.push(CurveSample { s: s0, q: q0, qdot: x0, qddot: curve_acceleration(&local0, &x0, curvature) });
    let mut truncated = false;
    for i in 1..=n {
        let k1 = rhs(&y)?;
        let k2 = rhs(&(y + k1 * (h / 2.0)))?;
        let k3 = rhs(&(y + k2 * (h / 2.0)))?;
        let k4 = rhs(&(y + k3 * h))?;
        let next = y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let q = Vec2::new(next[0], next[1]);
        if !chart.domain().contains(&q) {
            truncated = true;
            break;
        }
        y = next;
        let p = Vec2::new(y[2], y[3]);
        let local = chart.local_unchecked(&q)?;
        samples.push(CurveSample {
            s: s0 + h * i as f64,
            q,
            qdot: p,
            qddot: curve_acceleration(&local, &p, curvature),
        });
    }
    if samples.len() < 2 {
        return Err(GeometryError::OutOfDomain { u: y[0], v: y[1] });
    }
    Ok(CurveOnBase { samples, step: h, truncated })
}

/// Unit-speed geodesic from `q0` in direction `x0`, parametrized by arc length from 0.
pub fn geodesic_integrate(chart: &ChartMetric, q0: Vec2, x0: Vec2, length: f64, step: f64) -> Result<CurveOnBase> {
    integrate_curve(chart, q0, x0, 0.0, length, step, 0.0)
}

/// Largest `|q̈ + Γ(q̇, q̇)|_g` over interior samples, with `q̈` taken from
/// second differences of the sampled positions.
pub fn geodesic_residual(chart: &ChartMetric, curve: &CurveOnBase) -> Result<f64> {
    let s = curve.samples();
    let h = curve.step();
    let mut worst: f64 = 0.0;
    for w in s.windows(3) {
        let acc = (w[2].q - w[1].q * 2.0 + w[0].q) / (h * h);
        let vel = (w[2].q - w[0].q) / (2.0 * h);
        let local = chart.local_unchecked(&w[1].q)?;
        worst = worst.max(local.norm(&(acc + local.gamma.contract(&vel, &vel))));
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportSample {
    pub s: f64,
    pub x: Vec2,
    pub xdot: Vec2,
    pub xddot: Vec2,
}

/// A vector field along a curve, parallel unless constructed otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportedField {
    samples: Vec<TransportSample>,
    base: Vec<Vec2>,
}

impl TransportedField {
    pub fn samples(&self) -> &[TransportSample] {
        &self.samples
    }

    pub fn tangents(&self) -> Vec<BaseTangent> {
        self.samples.iter().zip(&self.base).map(|(t, q)| BaseTangent { q: *q, x: t.x }).collect()
    }

    pub fn last(&self) -> Vec2 {
        self.samples[self.samples.len() - 1].x
    }

    /// Interpolated components at `s`.
    pub fn at(&self, s: f64) -> Vec2 {
        let knot = |i: usize| {
            let t = &self.samples[i];
            Knot { s: t.s, p: t.x, dp: t.xdot, ddp: t.xddot }
        };
        let [p, _, _] = interp::sample_with(self.samples.len(), knot, s);
        Vec2::new(p[0], p[1])
    }
}

// Ẋ = −Γ(q̇, X) and its derivative along the curve.
fn transport_derivatives(local: &LocalGeometry, qdot: &Vec2, qddot: &Vec2, x: &Vec2) -> (Vec2, Vec2) {
    let xdot = -local.gamma.contract(qdot, x);
    let xddot = -local.dgamma_along(qdot).contract(qdot, x)
        - local.gamma.contract(qddot, x)
        - local.gamma.contract(qdot, &xdot);
    (xdot, xddot)
}

/// Parallel transport of `x0` along `curve` (RK4 on the interpolated curve).
pub fn parallel_transport(chart: &ChartMetric, curve: &CurveOnBase, x0: Vec2) -> Result<TransportedField> {
    curve.validate(chart)?;
    let h = curve.step();
    let rhs = |s: f64, x: &Vec2| -> Result<Vec2> {
        let (q, qd, _) = curve.at(s);
        let local = chart.local_unchecked(&q)?;
        Ok(-local.gamma.contract(&qd, x))
    };

    let mut samples = Vec::with_capacity(curve.samples().len());
    let mut x = x0;
    for (i, c) in curve.samples().iter().enumerate() {
        if i > 0 {
            let s = curve.samples()[i - 1].s;
            let k1 = rhs(s, &x)?;
            let k2 = rhs(s + h / 2.0, &(x + k1 * (h / 2.0)))?;
            let k3 = rhs(s + h / 2.0, &(x + k2 * (h / 2.0)))?;
            let k4 = rhs(s + h, &(x + k3 * h))?;
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        let local = chart.local_unchecked(&c.q)?;
        let (xdot, xddot) = transport_derivatives(&local, &c.qdot, &c.qddot, &x);
        samples.push(TransportSample { s: c.s, x, xdot, xddot });
    }
    Ok(TransportedField { samples, base: curve.samples().iter().map(|c| c.q).collect() })
}
