//! Truncated Taylor series used to push jets through reparametrizations.
//!
//! A [`Taylor`] stores normalized coefficients `c[j] = f^(j)(t0) / j!`. All
//! arithmetic truncates at [`LEN`] coefficients, so a result is exact up to the
//! order that every operand supplies.

use std::ops::{Add, Mul, Sub};

/// Number of stored coefficients (orders 0..=8).
pub const LEN: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taylor(pub [f64; LEN]);

impl Taylor {
    pub const ZERO: Taylor = Taylor([0.0; LEN]);

    /// Builds a series from derivative values `f^(j)(t0)`.
    pub fn from_derivatives(derivs: &[f64]) -> Self {
        let mut c = [0.0; LEN];
        let mut fact = 1.0;
        for (j, (slot, d)) in c.iter_mut().zip(derivs).enumerate() {
            if j > 0 {
                fact *= j as f64;
            }
            *slot = d / fact;
        }
        Taylor(c)
    }

    /// The j-th derivative at the expansion point.
    pub fn derivative_at(&self, j: usize) -> f64 {
        let fact: f64 = (1..=j).map(|i| i as f64).product();
        self.0[j] * fact
    }

    /// Series of the derivative. The last coefficient becomes zero.
    pub fn diff(&self) -> Self {
        let mut c = [0.0; LEN];
        for (j, cj) in c.iter_mut().take(LEN - 1).enumerate() {
            *cj = (j + 1) as f64 * self.0[j + 1];
        }
        Taylor(c)
    }

    /// Antiderivative vanishing at the expansion point.
    pub fn integrate(&self) -> Self {
        let mut c = [0.0; LEN];
        for (j, cj) in c.iter_mut().enumerate().skip(1) {
            *cj = self.0[j - 1] / j as f64;
        }
        Taylor(c)
    }

    pub fn scale(&self, a: f64) -> Self {
        Taylor(self.0.map(|v| a * v))
    }

    /// `self^p` for a series with positive constant term.
    pub fn powf(&self, p: f64) -> Self {
        let f = &self.0;
        assert!(f[0] > 0.0, "powf needs a positive constant term");
        let mut g = [0.0; LEN];
        g[0] = f[0].powf(p);
        // g' f = p f' g, compared coefficientwise.
        for n in 1..LEN {
            let mut acc = 0.0;
            for k in 1..=n {
                acc += (p * k as f64 - (n - k) as f64) * f[k] * g[n - k];
            }
            g[n] = acc / (n as f64 * f[0]);
        }
        Taylor(g)
    }

    /// Composition `self(inner(t))`, where `inner` has zero constant term.
    pub fn compose(&self, inner: &Taylor) -> Self {
        debug_assert!(inner.0[0] == 0.0);
        // Horner in the ring of truncated series.
        let mut acc = Taylor::ZERO;
        for j in (0..LEN).rev() {
            acc = acc * *inner;
            acc.0[0] += self.0[j];
        }
        acc
    }

    /// Compositional inverse of a series with `c0 = 0`, `c1 != 0`.
    pub fn revert(&self) -> Self {
        let f = self;
        assert!(f.0[0] == 0.0 && f.0[1] != 0.0, "series is not invertible");
        let mut g = Taylor::ZERO;
        g.0[1] = 1.0 / f.0[1];
        // Fix one order per pass: the coefficient of t^n in f(g(t)) must vanish.
        for n in 2..LEN {
            let fg = f.compose(&g);
            g.0[n] = -fg.0[n] / f.0[1];
        }
        g
    }
}

impl Add for Taylor {
    type Output = Taylor;
    fn add(self, rhs: Taylor) -> Taylor {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(rhs.0) {
            *a += b;
        }
        Taylor(c)
    }
}

impl Sub for Taylor {
    type Output = Taylor;
    fn sub(self, rhs: Taylor) -> Taylor {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        Taylor(c)
    }
}

impl Mul for Taylor {
    type Output = Taylor;
    fn mul(self, rhs: Taylor) -> Taylor {
        let mut c = [0.0; LEN];
        for i in 0..LEN {
            if self.0[i] == 0.0 {
                continue;
            }
            for j in 0..LEN - i {
                c[i + j] += self.0[i] * rhs.0[j];
            }
        }
        Taylor(c)
    }
}

/// A planar curve germ: one series per coordinate.
#[derive(Clone, Copy, Debug)]
pub struct PlanarTaylor {
    pub x: Taylor,
    pub y: Taylor,
}

impl PlanarTaylor {
    pub fn diff(&self) -> Self {
        PlanarTaylor {
            x: self.x.diff(),
            y: self.y.diff(),
        }
    }

    pub fn compose(&self, inner: &Taylor) -> Self {
        PlanarTaylor {
            x: self.x.compose(inner),
            y: self.y.compose(inner),
        }
    }

    /// Series of the area form `u.x v.y - u.y v.x`.
    pub fn wedge(&self, other: &PlanarTaylor) -> Taylor {
        self.x * other.y - self.y * other.x
    }

    /// The j-th derivative vector at the expansion point.
    pub fn derivative_at(&self, j: usize) -> [f64; 2] {
        [self.x.derivative_at(j), self.y.derivative_at(j)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_series() -> Taylor {
        Taylor::from_derivatives(&[1.0; LEN])
    }

    #[test]
    fn product_of_exponentials() {
        let e = exp_series();
        let e2 = e * e;
        let expected = Taylor::from_derivatives(&[1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0]);
        for j in 0..LEN {
            assert!((e2.0[j] - expected.0[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn reversion_of_log1p_is_expm1() {
        // log(1+t) = t - t^2/2 + t^3/3 - ...
        let mut c = [0.0; LEN];
        for (j, slot) in c.iter_mut().enumerate().skip(1) {
            *slot = if j % 2 == 1 { 1.0 } else { -1.0 } / j as f64;
        }
        let g = Taylor(c).revert();
        let mut fact = 1.0;
        for j in 1..LEN {
            fact *= j as f64;
            assert!((g.0[j] - 1.0 / fact).abs() < 1e-14, "order {j}");
        }
    }

    #[test]
    fn cube_root_powers_back() {
        let f = Taylor([2.0, 0.3, -0.1, 0.05, 0.0, 0.01, 0.0, 0.0, 0.0]);
        let g = f.powf(1.0 / 3.0);
        let back = g * g * g;
        for j in 0..LEN {
            assert!((back.0[j] - f.0[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn integrate_then_diff_is_identity_below_top_order() {
        let f = Taylor([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]);
        let back = f.integrate().diff();
        for j in 0..LEN - 1 {
            assert_eq!(back.0[j], f.0[j]);
        }
    }
}
