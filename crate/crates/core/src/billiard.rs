//! Symplectic and outer billiard maps.
//!
//! A symplectic billiard state is an ordered pair of boundary points `(s0, s1)`
//! given by affine parameter; the map sends it to `(s1, s2)` where the chord
//! from `x(s0)` to `x(s2)` is parallel to the tangent at `x(s1)`. The outer
//! billiard map reflects an exterior point through the tangency point of the
//! tangent line that leaves the curve on the left.

use std::f64::consts::PI;

use num_integer::Integer;
use serde::Serialize;

use crate::affine::AffineCurve;
use crate::curve::{omega, Curve, Vec2};
use crate::error::{Error, Result};
use crate::roots::bracketed_newton;

const TWO_PI: f64 = 2.0 * PI;

/// Ordered pair of boundary points in affine parameters, each in `[0, λ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChordState {
    pub s0: f64,
    pub s1: f64,
}

/// A point strictly outside the curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OuterState {
    pub p: Vec2,
}

fn wrap(value: f64, period: f64) -> f64 {
    let r = value.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Solves `f(u) = 0` on `[lo, 2π]` for a function that is positive near `lo`
/// and negative at `2π`.
fn solve_on_turn<F>(f: F, lo: f64, start: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    bracketed_newton(f, lo, TWO_PI, Some(start), 1e-15)
}

/// Parameter of the other point with tangent parallel to the tangent at `s`.
pub fn parallel_tangent(ac: &AffineCurve, s: f64) -> Result<f64> {
    let curve = ac.curve();
    let theta = ac.theta_of(wrap(s, ac.lambda()))?;
    let t0 = curve.derivative(theta, 1);
    let w0 = omega(&t0, &curve.derivative(theta, 2));
    // ω(x'(θ), x'(θ+u)) / sin(u/2), extended continuously to u = 0 and 2π.
    let f = |u: f64| {
        if u == 0.0 {
            return (2.0 * w0, 0.0);
        }
        if u == TWO_PI {
            return (-2.0 * w0, 0.0);
        }
        let g = omega(&t0, &curve.derivative(theta + u, 1));
        let dg = omega(&t0, &curve.derivative(theta + u, 2));
        let (sn, cs) = (0.5 * u).sin_cos();
        (g / sn, (dg * sn - 0.5 * g * cs) / (sn * sn))
    };
    let u = solve_on_turn(f, 0.0, PI)?;
    Ok(wrap(ac.s_of(theta + u), ac.lambda()))
}

/// One step of the symplectic billiard map.
pub fn symplectic_step(ac: &AffineCurve, st: ChordState) -> Result<ChordState> {
    let lambda = ac.lambda();
    for v in [st.s0, st.s1] {
        if !(0.0..lambda).contains(&v) {
            return Err(Error::PhaseSpace(format!("parameter {v} outside [0, {lambda})")));
        }
    }
    if st.s0 == st.s1 {
        return Err(Error::PhaseSpace("coincident points".into()));
    }
    let curve = ac.curve();
    let th0 = ac.theta_of(st.s0)?;
    let mut th1 = ac.theta_of(st.s1)?;
    if th1 <= th0 {
        th1 += TWO_PI;
    }
    let t0 = curve.derivative(th0, 1);
    let t1 = curve.derivative(th1, 1);
    let twist = omega(&t0, &t1);
    if !(twist > 0.0) {
        return Err(Error::PhaseSpace(format!(
            "second point is not before the parallel tangent point (ω = {twist:e})"
        )));
    }
    // ω(x(θ0+u) − x(θ0), x'(θ1)) vanishes at u = 0; divide that root out.
    let f = |u: f64| {
        if u == TWO_PI {
            return (-2.0 * twist, 0.0);
        }
        let g = omega(&curve.chord(th0, th0 + u), &t1);
        let dg = omega(&curve.derivative(th0 + u, 1), &t1);
        let (sn, cs) = (0.5 * u).sin_cos();
        (g / sn, (dg * sn - 0.5 * g * cs) / (sn * sn))
    };
    let lo = th1 - th0;
    let u = solve_on_turn(f, lo, (2.0 * lo).min(0.5 * (lo + TWO_PI)))?;
    let th2 = th0 + u;
    let xs1 = t1 / ac.speed(th1);
    let residual = omega(&curve.chord(th0, th2), &xs1);
    if residual.abs() > 1e-13 * lambda * lambda {
        return Err(Error::RootNotFound(format!("symplectic step residual {residual:e}")));
    }
    Ok(ChordState {
        s0: st.s1,
        s1: wrap(ac.s_of(th2), lambda),
    })
}

/// `steps` iterates of the symplectic map, starting with `st` itself.
pub fn symplectic_orbit(ac: &AffineCurve, st: ChordState, steps: usize) -> Result<Vec<ChordState>> {
    let mut orbit = Vec::with_capacity(steps + 1);
    orbit.push(st);
    let mut cur = st;
    for _ in 0..steps {
        cur = symplectic_step(ac, cur)?;
        orbit.push(cur);
    }
    Ok(orbit)
}

/// Parameter θ of the tangency point used by the outer map at `p`.
pub fn outer_tangency(curve: &Curve, p: Vec2) -> Result<f64> {
    if !(p.x.is_finite() && p.y.is_finite()) {
        return Err(Error::InvalidInput("point is not finite".into()));
    }
    let d = |t: f64| omega(&curve.derivative(t, 1), &(p - curve.point(t)));
    let dd = |t: f64| omega(&curve.derivative(t, 2), &(p - curve.point(t)));
    let m = (8 * curve.max_frequency().max(8) as usize).max(64);
    let h = TWO_PI / m as f64;
    let samples: Vec<f64> = (0..m).map(|j| d(j as f64 * h)).collect();
    let (jmin, _) = samples
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (j, &v)| if v < acc.1 { (j, v) } else { acc });
    // Refine the minimum so that points close to the curve are still seen.
    let mut tmin = jmin as f64 * h;
    for _ in 0..30 {
        let g = dd(tmin);
        let dg = omega(&curve.derivative(tmin, 3), &(p - curve.point(tmin)))
            - omega(&curve.derivative(tmin, 2), &curve.derivative(tmin, 1));
        if dg <= 0.0 {
            break;
        }
        let step = (g / dg).clamp(-h, h);
        tmin -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    let dmin = d(tmin).min(samples[jmin]);
    let scale = curve.derivative(tmin, 1).norm() * (p - curve.center()).norm().max(1.0);
    if !(dmin < -1e-14 * scale) {
        return Err(Error::NotExterior);
    }
    let start = if d(tmin) < samples[jmin] { tmin } else { jmin as f64 * h };
    // First upward crossing after the minimum.
    let mut a = start;
    let mut b = start + h;
    let mut steps = 0;
    while d(b) <= 0.0 {
        a = b;
        b += h;
        steps += 1;
        if steps > m {
            return Err(Error::RootNotFound("no tangency crossing".into()));
        }
    }
    let tau = bracketed_newton(|t| (d(t), dd(t)), a, b, None, 1e-15)?;
    let residual = d(tau);
    if residual.abs() > 1e-13 * scale {
        return Err(Error::RootNotFound(format!("tangency residual {residual:e}")));
    }
    Ok(tau.rem_euclid(TWO_PI))
}

/// One step of the outer billiard map: `p ↦ 2x(τ) − p`.
pub fn outer_step(curve: &Curve, st: OuterState) -> Result<OuterState> {
    let tau = outer_tangency(curve, st.p)?;
    Ok(OuterState {
        p: curve.point(tau) * 2.0 - st.p,
    })
}

pub fn outer_orbit(curve: &Curve, st: OuterState, steps: usize) -> Result<Vec<OuterState>> {
    let mut orbit = Vec::with_capacity(steps + 1);
    orbit.push(st);
    let mut cur = st;
    for _ in 0..steps {
        cur = outer_step(curve, cur)?;
        orbit.push(cur);
    }
    Ok(orbit)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RotationNumber {
    pub value: f64,
    /// `(winding, period)` in lowest terms when the orbit closes up.
    pub fraction: Option<(u64, u64)>,
    pub converged: bool,
}

/// Rotation number of a forward orbit given by positions on a circle of
/// circumference `period`. Periodicity is accepted within `1e-9·period`.
pub fn rotation_number(positions: &[f64], period: f64) -> Result<RotationNumber> {
    if positions.len() < 3 {
        return Err(Error::InvalidInput("orbit too short".into()));
    }
    let tol = 1e-9 * period;
    let mut lifted = Vec::with_capacity(positions.len());
    lifted.push(positions[0]);
    for w in positions.windows(2) {
        let step = (w[1] - w[0]).rem_euclid(period);
        lifted.push(lifted.last().unwrap() + step);
    }
    let steps = positions.len() - 1;
    let circ_dist = |a: f64, b: f64| {
        let r = (a - b).rem_euclid(period);
        r.min(period - r)
    };
    for q in 1..=steps / 2 {
        let closes = (0..=steps - q).all(|i| circ_dist(positions[i + q], positions[i]) <= tol);
        if closes {
            let p = ((lifted[q] - lifted[0]) / period).round() as u64;
            let g = p.gcd(&(q as u64)).max(1);
            let (p, q) = (p / g, q as u64 / g);
            return Ok(RotationNumber {
                value: p as f64 / q as f64,
                fraction: Some((p, q)),
                converged: true,
            });
        }
    }
    Ok(RotationNumber {
        value: (lifted[steps] - lifted[0]) / (period * steps as f64),
        fraction: None,
        converged: false,
    })
}

pub fn chord_rotation_number(ac: &AffineCurve, orbit: &[ChordState]) -> Result<RotationNumber> {
    let positions: Vec<f64> = orbit.iter().map(|st| st.s0).collect();
    rotation_number(&positions, ac.lambda())
}

/// Uses the polar angle of the orbit points about the curve's center.
pub fn outer_rotation_number(curve: &Curve, orbit: &[OuterState]) -> Result<RotationNumber> {
    let c = curve.center();
    let positions: Vec<f64> = orbit.iter().map(|st| (st.p.y - c.y).atan2(st.p.x - c.x)).collect();
    rotation_number(&positions, TWO_PI)
}
