//! Trigonometric interpolation of periodic samples on a uniform grid.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Fourier coefficients of a real periodic signal sampled at `period·j/N`.
#[derive(Clone, Debug)]
pub struct PeriodicSeries {
    period: f64,
    /// `coeffs[m]` for `m = 0..=N/2`; negative modes are the conjugates.
    coeffs: Vec<Complex64>,
    len: usize,
    /// Modes at and above this index are zero.
    active: usize,
}

impl PeriodicSeries {
    /// `samples.len()` must be even.
    pub fn from_samples(samples: &[f64], period: f64) -> Self {
        let n = samples.len();
        assert!(n >= 2 && n.is_multiple_of(2), "sample count must be even");
        let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let scale = 1.0 / n as f64;
        let coeffs = buf[..=n / 2].iter().map(|c| c * scale).collect();
        PeriodicSeries {
            period,
            coeffs,
            len: n,
            active: n / 2 + 1,
        }
    }

    /// Drops every mode above the last one whose magnitude exceeds
    /// `rel_floor` times the largest. Removes roundoff noise that spectral
    /// differentiation would otherwise amplify, and shortens evaluation.
    pub fn truncated(mut self, rel_floor: f64) -> Self {
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let last = self
            .coeffs
            .iter()
            .rposition(|c| c.norm() > rel_floor * max)
            .unwrap_or(0);
        for c in &mut self.coeffs[last + 1..] {
            *c = Complex64::new(0.0, 0.0);
        }
        self.active = last + 1;
        self
    }

    /// Number of retained modes, counting the mean.
    pub fn bandwidth(&self) -> usize {
        self.active
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Magnitude of the highest resolved modes relative to the largest one;
    /// a cheap resolution indicator.
    pub fn tail_ratio(&self) -> f64 {
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        let nyq = self.len / 2;
        let tail = self.coeffs[nyq.saturating_sub(nyq / 8)..]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        tail / max
    }

    fn wavenumber(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// `d^order f / dt^order` at `t`. The Nyquist mode is kept (as a cosine)
    /// only for `order = 0`.
    pub fn eval_derivative(&self, t: f64, order: u32) -> f64 {
        let w = self.wavenumber();
        let nyq = self.len / 2;
        let mut acc = if order == 0 { self.coeffs[0].re } else { 0.0 };
        for (m, c) in self.coeffs.iter().enumerate().take(nyq.min(self.active)).skip(1) {
            let km = w * m as f64;
            let factor = Complex64::new(0.0, km).powu(order);
            acc += 2.0 * (c * factor * Complex64::from_polar(1.0, km * t)).re;
        }
        if order == 0 && self.active > nyq {
            acc += self.coeffs[nyq].re * (w * nyq as f64 * t).cos();
        }
        acc
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_derivative(t, 0)
    }

    /// `∫_0^t f` of the interpolant.
    pub fn antiderivative(&self, t: f64) -> f64 {
        let w = self.wavenumber();
        let nyq = self.len / 2;
        let mut acc = self.coeffs[0].re * t;
        for (m, c) in self.coeffs.iter().enumerate().take(nyq.min(self.active)).skip(1) {
            let km = w * m as f64;
            let e = Complex64::from_polar(1.0, km * t) - 1.0;
            acc += 2.0 * (c * e / Complex64::new(0.0, km)).re;
        }
        if self.active > nyq {
            acc += self.coeffs[nyq].re * (w * nyq as f64 * t).sin() / (w * nyq as f64);
        }
        acc
    }

    /// Derivative samples on the original grid (spectral differentiation).
    pub fn derivative_samples(&self, order: u32) -> Vec<f64> {
        let n = self.len;
        let nyq = n / 2;
        let w = self.wavenumber();
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (m, c) in self.coeffs.iter().enumerate().take(nyq) {
            let d = c * Complex64::new(0.0, w * m as f64).powu(order);
            buf[m] = d;
            if m > 0 {
                buf[n - m] = d.conj();
            }
        }
        if order == 0 {
            buf[nyq] = self.coeffs[nyq];
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}
