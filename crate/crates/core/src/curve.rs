//! Closed strictly convex curves given by finite Fourier data.
//!
//! Every curve is stored as a complex trigonometric polynomial
//! `z(θ) = Σ c_k e^{ikθ}` with the point `x(θ) = (Re z, Im z)`. Derivatives of
//! any order are then exact, and linear images of a curve stay in the same
//! representation.
//!
//! Two presets exist:
//! - `ellipse`: `x(θ) = (a cos θ, b sin θ)`.
//! - `support_fourier`: `h(θ) = a0 + Σ_m (cos[m-1] cos mθ + sin[m-1] sin mθ)` is
//!   the support function, and `x(θ) = h n(θ) + h'(θ) t(θ)` with
//!   `n = (cos θ, sin θ)`, `t = (-sin θ, cos θ)`. Entry `i` of the `cos`/`sin`
//!   lists is harmonic `i + 1`.
//!
//! Orientation is counterclockwise and `ω(u, v) = u₁v₂ − u₂v₁`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Vector2};
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{PlanarTaylor, Taylor, LEN};

pub type Vec2 = Vector2<f64>;

/// Highest jet order exposed by [`evaluate_jet`].
pub const MAX_JET_ORDER: usize = 6;

/// Samples of `h + h''` used to validate a support function.
pub const CONVEXITY_GRID: usize = 4096;

/// The area form.
#[inline]
pub fn omega(u: &Vec2, v: &Vec2) -> f64 {
    u.x * v.y - u.y * v.x
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    Ellipse {
        a: f64,
        b: f64,
    },
    SupportFourier {
        a0: f64,
        #[serde(rename = "cos", default)]
        cos_coeffs: Vec<f64>,
        #[serde(rename = "sin", default)]
        sin_coeffs: Vec<f64>,
    },
}

/// Outcome of validating a [`CurveSpec`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexityReport {
    /// Minimum of the radius of curvature `h + h''` on the validation grid
    /// (for ellipses, the minimum of `ω(x', x'')`).
    pub min_radius: f64,
    /// `a0 − Σ (m² + 1)(|cos_m| + |sin_m|)`; positive means convexity is certified.
    pub coefficient_bound: f64,
}

impl ConvexityReport {
    pub fn bound_certifies(&self) -> bool {
        self.coefficient_bound > 0.0
    }
}

impl CurveSpec {
    pub fn circle(radius: f64) -> Self {
        CurveSpec::Ellipse {
            a: radius,
            b: radius,
        }
    }

    /// Largest `m` such that the curve is invariant under rotation by `2π/m`
    /// for a Fourier support function; `None` for conics and pure circles.
    pub fn symmetry_order(&self) -> Option<u32> {
        match self {
            CurveSpec::Ellipse { .. } => None,
            CurveSpec::SupportFourier {
                cos_coeffs, sin_coeffs, ..
            } => {
                let harmonics = |c: &[f64]| {
                    c.iter()
                        .enumerate()
                        .filter(|(_, v)| **v != 0.0)
                        .map(|(i, _)| i as u32 + 1)
                        .collect::<Vec<_>>()
                };
                let all: Vec<u32> = harmonics(cos_coeffs).into_iter().chain(harmonics(sin_coeffs)).collect();
                all.into_iter().reduce(num_integer::gcd)
            }
        }
    }

    /// Parses a curve JSON document.
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: CurveSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("curve file: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the invariants. Grid failure is an error; a failed coefficient
    /// bound is only reported.
    pub fn validate(&self) -> Result<ConvexityReport> {
        match self {
            CurveSpec::Ellipse { a, b } => {
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "ellipse semi-axes must be positive, got a = {a}, b = {b}"
                    )));
                }
                Ok(ConvexityReport {
                    min_radius: a * b,
                    coefficient_bound: f64::INFINITY,
                })
            }
            CurveSpec::SupportFourier {
                a0,
                cos_coeffs,
                sin_coeffs,
            } => {
                if !a0.is_finite() || cos_coeffs.iter().chain(sin_coeffs).any(|c| !c.is_finite()) {
                    return Err(Error::InvalidInput("non-finite support coefficient".into()));
                }
                let mut bound = *a0;
                for (i, c) in cos_coeffs.iter().enumerate() {
                    let m = (i + 1) as f64;
                    bound -= (m * m + 1.0) * c.abs();
                }
                for (i, s) in sin_coeffs.iter().enumerate() {
                    let m = (i + 1) as f64;
                    bound -= (m * m + 1.0) * s.abs();
                }
                let mut min_radius = f64::INFINITY;
                for j in 0..CONVEXITY_GRID {
                    let theta = 2.0 * PI * j as f64 / CONVEXITY_GRID as f64;
                    let r = self.radius_of_curvature(theta);
                    if r <= 0.0 {
                        return Err(Error::ConvexityViolation { theta, value: r });
                    }
                    min_radius = min_radius.min(r);
                }
                Ok(ConvexityReport {
                    min_radius,
                    coefficient_bound: bound,
                })
            }
        }
    }

    /// `h + h''` for support data, `ω(x', x'')` for the ellipse preset.
    fn radius_of_curvature(&self, theta: f64) -> f64 {
        match self {
            CurveSpec::Ellipse { a, b } => a * b,
            CurveSpec::SupportFourier {
                a0,
                cos_coeffs,
                sin_coeffs,
            } => {
                let mut r = *a0;
                for (i, c) in cos_coeffs.iter().enumerate() {
                    let m = (i + 1) as f64;
                    r += (1.0 - m * m) * c * (m * theta).cos();
                }
                for (i, s) in sin_coeffs.iter().enumerate() {
                    let m = (i + 1) as f64;
                    r += (1.0 - m * m) * s * (m * theta).sin();
                }
                r
            }
        }
    }
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveSpec::Ellipse { a, b } => write!(f, "ellipse:{a},{b}"),
            CurveSpec::SupportFourier {
                a0,
                cos_coeffs,
                sin_coeffs,
            } => {
                let join = |v: &[f64]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
                write!(f, "fourier:{a0}:{}", join(cos_coeffs))?;
                if !sin_coeffs.is_empty() {
                    write!(f, ":{}", join(sin_coeffs))?;
                }
                Ok(())
            }
        }
    }
}

/// Preset strings: `circle:R`, `ellipse:a,b`, `fourier:a0:c1,c2,...[:s1,s2,...]`.
impl FromStr for CurveSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidInput(format!("curve preset '{s}': {msg}"));
        let parse_list = |body: &str| -> Result<Vec<f64>> {
            body.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<f64>().map_err(|_| bad("expected numbers")))
                .collect()
        };
        let (head, body) = s.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let spec = match head.trim() {
            "circle" => {
                let r = parse_list(body)?;
                if r.len() != 1 {
                    return Err(bad("expected circle:R"));
                }
                CurveSpec::circle(r[0])
            }
            "ellipse" => {
                let v = parse_list(body)?;
                if v.len() != 2 {
                    return Err(bad("expected ellipse:a,b"));
                }
                CurveSpec::Ellipse { a: v[0], b: v[1] }
            }
            "fourier" => {
                let mut parts = body.split(':');
                let a0 = parts
                    .next()
                    .and_then(|t| t.trim().parse::<f64>().ok())
                    .ok_or_else(|| bad("expected fourier:a0:cos-list[:sin-list]"))?;
                let cos_coeffs = parse_list(parts.next().unwrap_or(""))?;
                let sin_coeffs = parse_list(parts.next().unwrap_or(""))?;
                if parts.next().is_some() {
                    return Err(bad("too many ':' sections"));
                }
                CurveSpec::SupportFourier {
                    a0,
                    cos_coeffs,
                    sin_coeffs,
                }
            }
            _ => return Err(bad("unknown preset (circle, ellipse, fourier)")),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Derivatives `d^j x / dθ^j` for `j = 0..=order`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    pub derivs: Vec<Vec2>,
}

impl Jet {
    pub fn order(&self) -> usize {
        self.derivs.len() - 1
    }
}

/// A curve in Fourier form, optionally the image of a preset under a linear map.
#[derive(Clone, Debug)]
pub struct Curve {
    spec: CurveSpec,
    /// (frequency, coefficient), frequencies distinct.
    terms: Vec<(i32, Complex64)>,
    map: Matrix2<f64>,
}

impl Curve {
    pub fn new(spec: &CurveSpec) -> Result<Self> {
        spec.validate()?;
        let mut terms: Vec<(i32, Complex64)> = Vec::new();
        match spec {
            CurveSpec::Ellipse { a, b } => {
                push_term(&mut terms, 1, Complex64::new((a + b) / 2.0, 0.0));
                push_term(&mut terms, -1, Complex64::new((a - b) / 2.0, 0.0));
            }
            CurveSpec::SupportFourier {
                a0,
                cos_coeffs,
                sin_coeffs,
            } => {
                // h = Σ H_m e^{imθ}  ⇒  x = (h + i h') e^{iθ} = Σ H_m (1 − m) e^{i(m+1)θ}.
                push_term(&mut terms, 1, Complex64::new(*a0, 0.0));
                let harmonics = cos_coeffs.len().max(sin_coeffs.len());
                for i in 0..harmonics {
                    let m = (i + 1) as i32;
                    let c = cos_coeffs.get(i).copied().unwrap_or(0.0);
                    let s = sin_coeffs.get(i).copied().unwrap_or(0.0);
                    let h_pos = Complex64::new(c / 2.0, -s / 2.0);
                    let h_neg = Complex64::new(c / 2.0, s / 2.0);
                    push_term(&mut terms, m + 1, h_pos * (1 - m) as f64);
                    push_term(&mut terms, 1 - m, h_neg * (1 + m) as f64);
                }
            }
        }
        terms.retain(|(_, c)| c.norm() > 0.0);
        Ok(Curve {
            spec: spec.clone(),
            terms,
            map: Matrix2::identity(),
        })
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    /// Linear map applied on top of the preset (identity unless
    /// [`Curve::linear_image`] was used).
    pub fn linear_map(&self) -> &Matrix2<f64> {
        &self.map
    }

    /// Image of the curve under `m`; orientation must be preserved.
    pub fn linear_image(&self, m: &Matrix2<f64>) -> Result<Self> {
        let det = m.determinant();
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::InvalidInput(format!(
                "linear map must have positive determinant, got {det}"
            )));
        }
        // M z = α z + β z̄ in complex notation.
        let alpha = Complex64::new((m[(0, 0)] + m[(1, 1)]) / 2.0, (m[(1, 0)] - m[(0, 1)]) / 2.0);
        let beta = Complex64::new((m[(0, 0)] - m[(1, 1)]) / 2.0, (m[(1, 0)] + m[(0, 1)]) / 2.0);
        let mut terms = Vec::new();
        for &(k, c) in &self.terms {
            push_term(&mut terms, k, alpha * c);
            push_term(&mut terms, -k, beta * c.conj());
        }
        terms.retain(|(_, c)| c.norm() > 0.0);
        Ok(Curve {
            spec: self.spec.clone(),
            terms,
            map: m * self.map,
        })
    }

    /// Spread between the highest and lowest frequency present.
    pub fn bandwidth(&self) -> i32 {
        let hi = self.terms.iter().map(|t| t.0).max().unwrap_or(0);
        let lo = self.terms.iter().map(|t| t.0).min().unwrap_or(0);
        hi - lo
    }

    pub fn max_frequency(&self) -> i32 {
        self.terms.iter().map(|t| t.0.abs()).max().unwrap_or(0)
    }

    /// Constant Fourier term; an interior point of the curve.
    pub fn center(&self) -> Vec2 {
        self.terms
            .iter()
            .find(|t| t.0 == 0)
            .map(|t| Vec2::new(t.1.re, t.1.im))
            .unwrap_or_else(Vec2::zeros)
    }

    /// `d^j x/dθ^j` at `theta`.
    pub fn derivative(&self, theta: f64, j: u32) -> Vec2 {
        let mut z = Complex64::new(0.0, 0.0);
        for &(k, c) in &self.terms {
            let ik = Complex64::new(0.0, k as f64);
            z += c * ik.powu(j) * Complex64::from_polar(1.0, k as f64 * theta);
        }
        Vec2::new(z.re, z.im)
    }

    pub fn point(&self, theta: f64) -> Vec2 {
        self.derivative(theta, 0)
    }

    /// All derivatives up to `max_order` (no order cap).
    pub fn derivatives(&self, theta: f64, max_order: usize) -> Vec<Vec2> {
        let mut out = vec![Complex64::new(0.0, 0.0); max_order + 1];
        for &(k, c) in &self.terms {
            let ik = Complex64::new(0.0, k as f64);
            let mut term = c * Complex64::from_polar(1.0, k as f64 * theta);
            for slot in out.iter_mut() {
                *slot += term;
                term *= ik;
            }
        }
        out.into_iter().map(|z| Vec2::new(z.re, z.im)).collect()
    }

    /// `x(b) − x(a)` without cancellation for nearby parameters.
    pub fn chord(&self, a: f64, b: f64) -> Vec2 {
        let mut z = Complex64::new(0.0, 0.0);
        for &(k, c) in &self.terms {
            let phi = k as f64 * (b - a);
            let half = (0.5 * phi).sin();
            let expm1 = Complex64::new(-2.0 * half * half, phi.sin());
            z += c * Complex64::from_polar(1.0, k as f64 * a) * expm1;
        }
        Vec2::new(z.re, z.im)
    }

    /// Taylor germ of `x(θ0 + u)` in `u`, through order 8.
    pub fn germ(&self, theta: f64) -> PlanarTaylor {
        let d = self.derivatives(theta, LEN - 1);
        let xs: Vec<f64> = d.iter().map(|v| v.x).collect();
        let ys: Vec<f64> = d.iter().map(|v| v.y).collect();
        PlanarTaylor {
            x: Taylor::from_derivatives(&xs),
            y: Taylor::from_derivatives(&ys),
        }
    }

    /// `ω(x', x'')`, which equals `κ |x'|³`.
    pub fn speed_wedge(&self, theta: f64) -> f64 {
        let d = self.derivatives(theta, 2);
        omega(&d[1], &d[2])
    }

    /// Enclosed area `½∮ω(x, x')dθ` by the periodic trapezoid rule on `nodes` points.
    pub fn area_with_nodes(&self, nodes: usize) -> f64 {
        let h = 2.0 * PI / nodes as f64;
        let sum: f64 = (0..nodes)
            .map(|j| {
                let d = self.derivatives(j as f64 * h, 1);
                omega(&d[0], &d[1])
            })
            .sum();
        0.5 * sum * h
    }
}

fn push_term(terms: &mut Vec<(i32, Complex64)>, k: i32, c: Complex64) {
    if let Some(slot) = terms.iter_mut().find(|t| t.0 == k) {
        slot.1 += c;
    } else {
        terms.push((k, c));
    }
}

/// Exact θ-derivatives of the curve through `order`.
pub fn evaluate_jet(curve: &Curve, theta: f64, order: usize) -> Result<Jet> {
    if order > MAX_JET_ORDER {
        return Err(Error::UnsupportedOrder(order));
    }
    let derivs = curve.derivatives(theta, order);
    if order >= 1 && derivs[1].norm() == 0.0 {
        return Err(Error::ConvexityViolation { theta, value: 0.0 });
    }
    Ok(Jet { derivs })
}

/// Euclidean curvature `ω(x', x'') / |x'|³`.
pub fn ordinary_curvature(curve: &Curve, theta: f64) -> Result<f64> {
    let d = curve.derivatives(theta, 2);
    let speed = d[1].norm();
    let kappa = omega(&d[1], &d[2]) / (speed * speed * speed);
    if !(kappa > 0.0) {
        return Err(Error::ConvexityViolation { theta, value: kappa });
    }
    Ok(kappa)
}

/// Area of the convex region. The integrand is a trigonometric polynomial, so
/// the trapezoid rule is exact once the node count exceeds the bandwidth.
pub fn enclosed_area(curve: &Curve) -> f64 {
    let nodes = (4 * curve.bandwidth() as usize + 8).max(256);
    curve.area_with_nodes(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn perturbed() -> CurveSpec {
        CurveSpec::SupportFourier {
            a0: 1.0,
            cos_coeffs: vec![0.0, 0.0, 0.05],
            sin_coeffs: vec![],
        }
    }

    #[test]
    fn unit_circle_jet() {
        let c = Curve::new(&CurveSpec::circle(1.0)).unwrap();
        let jet = evaluate_jet(&c, 0.0, 1).unwrap();
        assert_abs_diff_eq!(jet.derivs[0], Vec2::new(1.0, 0.0), epsilon = 1e-15);
        assert_abs_diff_eq!(jet.derivs[1], Vec2::new(0.0, 1.0), epsilon = 1e-15);
    }

    #[test]
    fn ellipse_semi_axis_point() {
        let c = Curve::new(&CurveSpec::Ellipse { a: 2.0, b: 1.0 }).unwrap();
        let jet = evaluate_jet(&c, PI / 2.0, 0).unwrap();
        assert_abs_diff_eq!(jet.derivs[0], Vec2::new(0.0, 1.0), epsilon = 1e-15);
    }

    #[test]
    fn support_point_and_tangent() {
        // x = h n + h' t at θ = 0 with h'(0) = 0.
        let c = Curve::new(&perturbed()).unwrap();
        let jet = evaluate_jet(&c, 0.0, 1).unwrap();
        assert_abs_diff_eq!(jet.derivs[0], Vec2::new(1.05, 0.0), epsilon = 1e-15);
        // x' = (h + h'') t, h + h'' = 1 − 8·0.05 at θ = 0.
        assert_abs_diff_eq!(jet.derivs[1], Vec2::new(0.0, 0.6), epsilon = 1e-15);
        let theta: f64 = 0.37;
        let h = 1.0 + 0.05 * (3.0 * theta).cos();
        let hp = -0.15 * (3.0 * theta).sin();
        let n = Vec2::new(theta.cos(), theta.sin());
        let t = Vec2::new(-theta.sin(), theta.cos());
        assert_abs_diff_eq!(c.point(theta), n * h + t * hp, epsilon = 1e-15);
    }

    #[test]
    fn jet_order_cap() {
        let c = Curve::new(&CurveSpec::circle(1.0)).unwrap();
        assert_eq!(evaluate_jet(&c, 0.0, 7), Err(Error::UnsupportedOrder(7)));
        assert_eq!(evaluate_jet(&c, 0.0, 6).unwrap().order(), 6);
    }

    #[test]
    fn curvatures() {
        let circle = Curve::new(&CurveSpec::circle(2.0)).unwrap();
        assert_abs_diff_eq!(ordinary_curvature(&circle, 1.234).unwrap(), 0.5, epsilon = 1e-15);
        let ellipse = Curve::new(&CurveSpec::Ellipse { a: 2.0, b: 1.0 }).unwrap();
        assert_abs_diff_eq!(ordinary_curvature(&ellipse, 0.0).unwrap(), 2.0, epsilon = 1e-14);
        let p = Curve::new(&perturbed()).unwrap();
        assert_abs_diff_eq!(ordinary_curvature(&p, 0.0).unwrap(), 1.0 / 0.6, epsilon = 1e-13);
    }

    #[test]
    fn jet_matches_central_differences() {
        let c = Curve::new(&perturbed()).unwrap();
        let theta = 0.81;
        let exact = c.derivatives(theta, 6);
        for j in 1..=6 {
            let mut prev_err = f64::INFINITY;
            for h in [1e-2, 5e-3, 2.5e-3] {
                let fd = (c.derivative(theta + h, j - 1) - c.derivative(theta - h, j - 1)) / (2.0 * h);
                let err = (fd - exact[j as usize]).norm();
                // O(h²): halving h cuts the error by about four.
                assert!(err < prev_err / 3.5 || err < 1e-9, "order {j}: {err} vs {prev_err}");
                prev_err = err;
            }
        }
    }

    #[test]
    fn areas() {
        let circle = Curve::new(&CurveSpec::circle(1.0)).unwrap();
        assert_abs_diff_eq!(enclosed_area(&circle), PI, epsilon = 1e-14);
        let ellipse = Curve::new(&CurveSpec::Ellipse { a: 2.0, b: 1.0 }).unwrap();
        assert_abs_diff_eq!(enclosed_area(&ellipse), 2.0 * PI, epsilon = 1e-14);
    }

    #[test]
    fn perturbed_area_matches_dense_quadrature() {
        let c = Curve::new(&perturbed()).unwrap();
        // Independent oracle: ½∫(h² − h'²)dθ by a million-node midpoint sum.
        let nodes = 1_000_000;
        let dt = 2.0 * PI / nodes as f64;
        let oracle: f64 = (0..nodes)
            .map(|j| {
                let t = (j as f64 + 0.5) * dt;
                let h = 1.0 + 0.05 * (3.0 * t).cos();
                let hp = -0.15 * (3.0 * t).sin();
                0.5 * (h * h - hp * hp) * dt
            })
            .sum();
        assert_abs_diff_eq!(enclosed_area(&c), oracle, epsilon = 1e-11);
        assert_abs_diff_eq!(enclosed_area(&c), 0.99 * PI, epsilon = 1e-14);
    }

    #[test]
    fn area_grid_convergence() {
        let c = Curve::new(&perturbed()).unwrap();
        for n in [256, 512, 1024] {
            let a = c.area_with_nodes(n);
            let b = c.area_with_nodes(2 * n);
            assert!(((a - b) / b).abs() <= 1e-13);
        }
    }

    #[test]
    fn wedge_is_curvature_times_speed_cubed() {
        let c = Curve::new(&perturbed()).unwrap();
        for j in 0..64 {
            let t = j as f64 * 0.1;
            let d = c.derivatives(t, 2);
            let w = omega(&d[1], &d[2]);
            assert!(w > 0.0);
            let k = ordinary_curvature(&c, t).unwrap();
            assert_abs_diff_eq!(w, k * d[1].norm().powi(3), epsilon = 1e-13);
        }
    }

    #[test]
    fn convexity_validation() {
        let bad = CurveSpec::SupportFourier {
            a0: 1.0,
            cos_coeffs: vec![0.0, 0.4],
            sin_coeffs: vec![],
        };
        assert!(matches!(bad.validate(), Err(Error::ConvexityViolation { .. })));
        // Convex on the grid but not certified by the coefficient bound.
        let warn = CurveSpec::SupportFourier {
            a0: 1.0,
            cos_coeffs: vec![0.0, 0.3],
            sin_coeffs: vec![],
        };
        let r = warn.validate().unwrap();
        assert!(!r.bound_certifies());
        assert_abs_diff_eq!(r.min_radius, 0.1, epsilon = 1e-12);
        let r = perturbed().validate().unwrap();
        assert!(r.bound_certifies());
        assert_abs_diff_eq!(r.coefficient_bound, 0.5, epsilon = 1e-15);
        assert!(CurveSpec::Ellipse { a: -1.0, b: 1.0 }.validate().is_err());
        assert!(CurveSpec::Ellipse { a: f64::NAN, b: 1.0 }.validate().is_err());
    }

    #[test]
    fn json_and_presets() {
        let e = CurveSpec::from_json(r#"{"kind":"ellipse","a":2.0,"b":1.0}"#).unwrap();
        assert_eq!(e, CurveSpec::Ellipse { a: 2.0, b: 1.0 });
        let f = CurveSpec::from_json(r#"{"kind":"support_fourier","a0":1.0,"cos":[0,0,0.05],"sin":[]}"#)
            .unwrap();
        assert_eq!(f, perturbed());
        assert!(CurveSpec::from_json(r#"{"kind":"square"}"#).is_err());
        assert_eq!("circle:2".parse::<CurveSpec>().unwrap(), CurveSpec::circle(2.0));
        assert_eq!("fourier:1:0,0,0.05".parse::<CurveSpec>().unwrap(), perturbed());
        let round = perturbed().to_string().parse::<CurveSpec>().unwrap();
        assert_eq!(round, perturbed());
        assert!("ellipse:1".parse::<CurveSpec>().is_err());
    }

    #[test]
    fn linear_image_of_circle_is_ellipse() {
        let circle = Curve::new(&CurveSpec::circle(1.0)).unwrap();
        let ellipse = Curve::new(&CurveSpec::Ellipse { a: 2.0, b: 0.5 }).unwrap();
        let m = Matrix2::new(2.0, 0.0, 0.0, 0.5);
        let image = circle.linear_image(&m).unwrap();
        for j in 0..16 {
            let t = j as f64 * 0.4;
            assert_abs_diff_eq!(image.point(t), ellipse.point(t), epsilon = 1e-15);
            let shear = Matrix2::new(1.0, 0.7, 0.0, 1.0);
            let sheared = ellipse.linear_image(&shear).unwrap();
            assert_abs_diff_eq!(sheared.point(t), shear * ellipse.point(t), epsilon = 1e-14);
        }
        assert!(circle.linear_image(&Matrix2::new(1.0, 0.0, 0.0, -1.0)).is_err());
    }

    #[test]
    fn chord_matches_difference() {
        let c = Curve::new(&perturbed()).unwrap();
        let (a, b) = (0.3, 1.9);
        assert_abs_diff_eq!(c.chord(a, b), c.point(b) - c.point(a), epsilon = 1e-15);
    }
}
