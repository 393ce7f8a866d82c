//! Affine arc length reparametrization and affine curvature.
//!
//! With `σ(θ) = ds/dθ = κ^{1/3}|x'| = ω(x', x'')^{1/3}`, the affine length is
//! `λ = ∮σ dθ`. Jets in `s` are obtained by pushing the exact θ-germ of the
//! curve through the inverse of `s(θ)` as truncated power series, so
//! `ω(x_s, x_ss) = 1` and `ω(x_s, x_sss) = 0` hold to roundoff. The affine
//! curvature is `k = ω(x_ss, x_sss)`; `k'` and `k''` come from spectral
//! differentiation of `k` on the uniform `s` grid.

use std::f64::consts::PI;

use serde::Serialize;

use crate::curve::{omega, Curve, CurveSpec, Vec2};
use crate::error::{Error, Result};
use crate::roots::bracketed_newton;
use crate::series::PlanarTaylor;
use crate::spectral::PeriodicSeries;

pub const DEFAULT_GRID_SIZE: usize = 2048;
pub const DEFAULT_TOL_JET: f64 = 1e-10;
pub const MIN_GRID_SIZE: usize = 64;

/// Relative magnitude below which trailing Fourier modes count as roundoff.
const SPECTRAL_FLOOR: f64 = 1e-15;

/// `d^j x / ds^j` for `j = 0..=6`.
pub type AffineJet = [Vec2; 7];

#[derive(Clone, Debug)]
pub struct AffineCurve {
    curve: Curve,
    lambda: f64,
    tol_jet: f64,
    /// σ(θ) interpolated on the θ grid.
    speed: PeriodicSeries,
    s_grid: Vec<f64>,
    theta_of_s: Vec<f64>,
    jets_s: Vec<AffineJet>,
    k: Vec<f64>,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k_series: PeriodicSeries,
    k_tail: f64,
    i1: f64,
    i2: f64,
    frame_defect: f64,
    inversion_residual: f64,
}

/// Maximum deviations of the six ω-identities over the grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct OmegaReport {
    /// `|ω(x_s, x⁴) + k|`
    pub x1_x4: f64,
    /// `|ω(x_ss, x⁴) − k'|`
    pub x2_x4: f64,
    /// `|ω(x_s, x⁵) + 2k'|`
    pub x1_x5: f64,
    /// `|ω(x_sss, x⁴) − k²|`
    pub x3_x4: f64,
    /// `|ω(x_ss, x⁵) − (k'' − k²)|`
    pub x2_x5: f64,
    /// `|ω(x_s, x⁶) + 3k'' − k²|`
    pub x1_x6: f64,
}

impl OmegaReport {
    pub fn max(&self) -> f64 {
        [self.x1_x4, self.x2_x4, self.x1_x5, self.x3_x4, self.x2_x5, self.x1_x6]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

impl AffineCurve {
    pub fn from_spec(spec: &CurveSpec, grid_size: usize) -> Result<Self> {
        build_affine(&Curve::new(spec)?, grid_size)
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    /// Affine length λ.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn grid_size(&self) -> usize {
        self.s_grid.len()
    }

    pub fn tol_jet(&self) -> f64 {
        self.tol_jet
    }

    pub fn s_grid(&self) -> &[f64] {
        &self.s_grid
    }

    pub fn theta_of_s(&self) -> &[f64] {
        &self.theta_of_s
    }

    pub fn jets(&self) -> &[AffineJet] {
        &self.jets_s
    }

    pub fn k_samples(&self) -> &[f64] {
        &self.k
    }

    pub fn k1_samples(&self) -> &[f64] {
        &self.k1
    }

    pub fn k2_samples(&self) -> &[f64] {
        &self.k2
    }

    /// `∫₀^λ k ds`.
    pub fn i1(&self) -> f64 {
        self.i1
    }

    /// `∫₀^λ k² ds`.
    pub fn i2(&self) -> f64 {
        self.i2
    }

    /// Largest of `|ω(x_s, x_ss) − 1|` and `|ω(x_s, x_sss)|` over the grid.
    pub fn frame_defect(&self) -> f64 {
        self.frame_defect
    }

    /// Largest `|s(θ(s_i)) − s_i|` met while placing the grid.
    pub fn inversion_residual(&self) -> f64 {
        self.inversion_residual
    }

    /// Relative size of the top Fourier modes of `k`; small when `k'` and
    /// `k''` are resolved by the grid.
    pub fn k_resolution(&self) -> f64 {
        self.k_tail
    }

    pub fn k_min(&self) -> f64 {
        self.k.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn k_max(&self) -> f64 {
        self.k.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Affine curvature at an arbitrary `s` (trigonometric interpolation).
    pub fn k_at(&self, s: f64) -> f64 {
        self.k_series.eval(s)
    }

    pub fn k1_at(&self, s: f64) -> f64 {
        self.k_series.eval_derivative(s, 1)
    }

    pub fn k2_at(&self, s: f64) -> f64 {
        self.k_series.eval_derivative(s, 2)
    }

    /// `ds/dθ`, evaluated from the exact curve.
    pub fn speed(&self, theta: f64) -> f64 {
        self.curve.speed_wedge(theta).cbrt()
    }

    /// Affine arc length `s(θ)` measured from θ = 0, continued additively
    /// beyond one turn.
    pub fn s_of(&self, theta: f64) -> f64 {
        let turns = (theta / (2.0 * PI)).floor();
        let base = theta - turns * 2.0 * PI;
        turns * self.lambda + self.speed.antiderivative(base)
    }

    /// Inverse of [`AffineCurve::s_of`], returning θ with the same number of turns.
    pub fn theta_of(&self, s: f64) -> Result<f64> {
        let turns = (s / self.lambda).floor();
        let base = s - turns * self.lambda;
        let theta = invert_arclength(&self.speed, self.lambda, base, None)?;
        Ok(theta + turns * 2.0 * PI)
    }

    /// Point `x(s)`.
    pub fn point(&self, s: f64) -> Result<Vec2> {
        Ok(self.curve.point(self.theta_of(s)?))
    }

    /// Affine-parameter jet at an arbitrary `s`.
    pub fn jet_at(&self, s: f64) -> Result<AffineJet> {
        affine_jet(&self.curve, self.theta_of(s)?)
    }
}

/// Reparametrizes `curve` by affine arc length on a uniform grid of `grid_size` nodes.
pub fn build_affine(curve: &Curve, grid_size: usize) -> Result<AffineCurve> {
    build_affine_with_tol(curve, grid_size, DEFAULT_TOL_JET)
}

pub fn build_affine_with_tol(curve: &Curve, grid_size: usize, tol_jet: f64) -> Result<AffineCurve> {
    if grid_size < MIN_GRID_SIZE || !grid_size.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "grid size must be even and at least {MIN_GRID_SIZE}, got {grid_size}"
        )));
    }
    let n = grid_size;
    let dtheta = 2.0 * PI / n as f64;
    let mut sigma = Vec::with_capacity(n);
    for j in 0..n {
        let theta = j as f64 * dtheta;
        let w = curve.speed_wedge(theta);
        if !(w > 0.0) {
            return Err(Error::ConvexityViolation { theta, value: w });
        }
        sigma.push(w.cbrt());
    }
    let speed = PeriodicSeries::from_samples(&sigma, 2.0 * PI).truncated(SPECTRAL_FLOOR);
    let lambda = 2.0 * PI * speed.mean();

    let ds = lambda / n as f64;
    let mut s_grid = Vec::with_capacity(n);
    let mut theta_of_s = Vec::with_capacity(n);
    let mut jets_s = Vec::with_capacity(n);
    let mut k = Vec::with_capacity(n);
    let mut frame_defect: f64 = 0.0;
    let mut inversion_residual: f64 = 0.0;
    let mut theta_prev = 0.0;
    for i in 0..n {
        let s = i as f64 * ds;
        let theta = if i == 0 {
            0.0
        } else {
            let guess = theta_prev + ds / speed.eval(theta_prev);
            invert_arclength(&speed, lambda, s, Some(guess))?
        };
        inversion_residual = inversion_residual.max((speed.antiderivative(theta) - s).abs());
        let jet = affine_jet(curve, theta)?;
        frame_defect = frame_defect
            .max((omega(&jet[1], &jet[2]) - 1.0).abs())
            .max(omega(&jet[1], &jet[3]).abs());
        k.push(omega(&jet[2], &jet[3]));
        s_grid.push(s);
        theta_of_s.push(theta);
        jets_s.push(jet);
        theta_prev = theta;
    }
    if frame_defect > tol_jet {
        return Err(Error::JetInvariant {
            defect: frame_defect,
            tol: tol_jet,
        });
    }
    let k_raw = PeriodicSeries::from_samples(&k, lambda);
    let k_tail = k_raw.tail_ratio();
    let k_series = k_raw.truncated(SPECTRAL_FLOOR);
    let k1 = k_series.derivative_samples(1);
    let k2 = k_series.derivative_samples(2);
    let i1 = ds * k.iter().sum::<f64>();
    let i2 = ds * k.iter().map(|v| v * v).sum::<f64>();
    Ok(AffineCurve {
        curve: curve.clone(),
        lambda,
        tol_jet,
        speed,
        s_grid,
        theta_of_s,
        jets_s,
        k,
        k1,
        k2,
        k_series,
        k_tail,
        i1,
        i2,
        frame_defect,
        inversion_residual,
    })
}

/// Solves `s(θ) = s` for θ in `[0, 2π]`, `s ∈ [0, λ)`.
fn invert_arclength(speed: &PeriodicSeries, lambda: f64, s: f64, guess: Option<f64>) -> Result<f64> {
    let f = |theta: f64| (speed.antiderivative(theta) - s, speed.eval(theta));
    let theta = bracketed_newton(f, 0.0, 2.0 * PI, guess.or(Some(2.0 * PI * s / lambda)), 1e-15)
        .map_err(|_| Error::InversionFailed { s, residual: f64::NAN })?;
    let residual = (speed.antiderivative(theta) - s).abs();
    if residual > 1e-13 * lambda {
        return Err(Error::InversionFailed { s, residual });
    }
    Ok(theta)
}

/// Exact chain rule: the θ-germ of `x` composed with the inverse of `s(θ)`.
pub(crate) fn affine_jet(curve: &Curve, theta: f64) -> Result<AffineJet> {
    let x: PlanarTaylor = curve.germ(theta);
    let d1 = x.diff();
    let d2 = d1.diff();
    let wedge = d1.wedge(&d2);
    if !(wedge.0[0] > 0.0) {
        return Err(Error::ConvexityViolation {
            theta,
            value: wedge.0[0],
        });
    }
    let arclength = wedge.powf(1.0 / 3.0).integrate();
    let inverse = arclength.revert();
    let xs = x.compose(&inverse);
    let mut jet = [Vec2::zeros(); 7];
    for (j, slot) in jet.iter_mut().enumerate() {
        let [a, b] = xs.derivative_at(j);
        *slot = Vec2::new(a, b);
    }
    Ok(jet)
}

/// `(∫k ds, ∫k² ds)` by the periodic trapezoid rule.
pub fn curvature_integrals(ac: &AffineCurve) -> (f64, f64) {
    (ac.i1, ac.i2)
}

/// Deviations of the six ω-identities for the affine frame.
pub fn check_omega_relations(ac: &AffineCurve) -> OmegaReport {
    let mut r = OmegaReport::default();
    for (i, x) in ac.jets_s.iter().enumerate() {
        let (k, k1, k2) = (ac.k[i], ac.k1[i], ac.k2[i]);
        r.x1_x4 = r.x1_x4.max((omega(&x[1], &x[4]) + k).abs());
        r.x2_x4 = r.x2_x4.max((omega(&x[2], &x[4]) - k1).abs());
        r.x1_x5 = r.x1_x5.max((omega(&x[1], &x[5]) + 2.0 * k1).abs());
        r.x3_x4 = r.x3_x4.max((omega(&x[3], &x[4]) - k * k).abs());
        r.x2_x5 = r.x2_x5.max((omega(&x[2], &x[5]) - (k2 - k * k)).abs());
        r.x1_x6 = r.x1_x6.max((omega(&x[1], &x[6]) + 3.0 * k2 - k * k).abs());
    }
    r
}
