//! Quintic Hermite interpolation of uniformly sampled trajectories.
//!
//! Samples carry position, first and second derivative, so the interpolant is
//! C² and finite-difference second derivatives of anything built on top of it
//! stay free of knot artefacts.

use nalgebra::SVector;

/// One knot: value, first and second derivative with respect to the parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Knot<const D: usize> {
    pub s: f64,
    pub p: SVector<f64, D>,
    pub dp: SVector<f64, D>,
    pub ddp: SVector<f64, D>,
}

/// Value and first two derivatives of the interpolant between `k0` and `k1`.
pub fn quintic<const D: usize>(k0: &Knot<D>, k1: &Knot<D>, s: f64) -> [SVector<f64, D>; 3] {
    let h = k1.s - k0.s;
    let t = (s - k0.s) / h;
    let (t2, t3) = (t * t, t * t * t);
    let (t4, t5) = (t3 * t, t3 * t2);

    let h0 = [
        1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5,
        -30.0 * t2 + 60.0 * t3 - 30.0 * t4,
        -60.0 * t + 180.0 * t2 - 120.0 * t3,
    ];
    let h1 = [
        t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5,
        1.0 - 18.0 * t2 + 32.0 * t3 - 15.0 * t4,
        -36.0 * t + 96.0 * t2 - 60.0 * t3,
    ];
    let h2 = [
        0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5,
        t - 4.5 * t2 + 6.0 * t3 - 2.5 * t4,
        1.0 - 9.0 * t + 18.0 * t2 - 10.0 * t3,
    ];
    let h3 = [0.5 * t3 - t4 + 0.5 * t5, 1.5 * t2 - 4.0 * t3 + 2.5 * t4, 3.0 * t - 12.0 * t2 + 10.0 * t3];
    let h4 = [-4.0 * t3 + 7.0 * t4 - 3.0 * t5, -12.0 * t2 + 28.0 * t3 - 15.0 * t4, -24.0 * t + 84.0 * t2 - 60.0 * t3];
    let h5 = [1.0 - h0[0], -h0[1], -h0[2]];

    let mut out = [SVector::<f64, D>::zeros(); 3];
    let scale = [1.0, 1.0 / h, 1.0 / (h * h)];
    for (order, o) in out.iter_mut().enumerate() {
        *o = (k0.p * h0[order]
            + k0.dp * (h * h1[order])
            + k0.ddp * (h * h * h2[order])
            + k1.ddp * (h * h * h3[order])
            + k1.dp * (h * h4[order])
            + k1.p * h5[order])
            * scale[order];
    }
    out
}

/// Interpolates a uniformly spaced knot sequence; extrapolates with the end
/// segments slightly outside the sampled range.
pub fn sample<const D: usize>(knots: &[Knot<D>], s: f64) -> [SVector<f64, D>; 3] {
    sample_with(knots.len(), |i| knots[i], s)
}

/// Like [`sample`], building only the two knots that bracket `s`.
pub fn sample_with<const D: usize>(len: usize, knot: impl Fn(usize) -> Knot<D>, s: f64) -> [SVector<f64, D>; 3] {
    assert!(len >= 2, "interpolation needs at least two knots");
    let (k0, k1) = (knot(0), knot(1));
    let raw = ((s - k0.s) / (k1.s - k0.s)).floor();
    let i = if raw.is_finite() { (raw.max(0.0) as usize).min(len - 2) } else { 0 };
    if i == 0 {
        quintic(&k0, &k1, s)
    } else {
        quintic(&knot(i), &knot(i + 1), s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector1;

    #[test]
    fn reproduces_quintic_polynomials() {
        let f = |s: f64| 1.0 - 2.0 * s + 0.5 * s * s + 3.0 * s.powi(3) - s.powi(4) + 0.7 * s.powi(5);
        let df = |s: f64| -2.0 + s + 9.0 * s * s - 4.0 * s.powi(3) + 3.5 * s.powi(4);
        let ddf = |s: f64| 1.0 + 18.0 * s - 12.0 * s * s + 14.0 * s.powi(3);
        let knots: Vec<Knot<1>> = (0..5)
            .map(|i| {
                let s = -0.5 + 0.25 * i as f64;
                Knot { s, p: Vector1::new(f(s)), dp: Vector1::new(df(s)), ddp: Vector1::new(ddf(s)) }
            })
            .collect();
        for s in [-0.45, -0.1, 0.0, 0.13, 0.49] {
            let [p, dp, ddp] = sample(&knots, s);
            assert!((p[0] - f(s)).abs() < 1e-13);
            assert!((dp[0] - df(s)).abs() < 1e-12);
            assert!((ddp[0] - ddf(s)).abs() < 1e-11);
        }
    }
}
