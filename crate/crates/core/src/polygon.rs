//! Best approximating inscribed and circumscribed polygons.
//!
//! Both problems are solved as cyclic root-finding problems in the curve
//! parameters of the vertices (inscribed) or tangency points (circumscribed),
//! starting from uniform affine spacing. Linear solves go through an SVD
//! pseudo-inverse so the rotational family of the circle does not stall
//! Newton. The second-order condition is checked on the area Hessian.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::AffineCurve;
use crate::areas::{chord_area_with, tangent_area_with, CHECK_NODES, PRIMARY_NODES};
use crate::curve::{omega, Curve, Vec2};
use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;
const MAX_ITERATIONS: usize = 60;
const SVD_CUTOFF: f64 = 1e-11;
const PIN_SAMPLES: usize = 16;
const SHIFT_SAMPLES: usize = 16;
/// Hessian eigenvalue (relative to λ²) above roundoff that triggers restarts.
const RESTART_THRESHOLD: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolygonKind {
    Inscribed,
    Circumscribed,
}

impl PolygonKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PolygonKind::Inscribed => "inscribed",
            PolygonKind::Circumscribed => "circumscribed",
        }
    }
}

impl std::str::FromStr for PolygonKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inscribed" => Ok(PolygonKind::Inscribed),
            "circumscribed" => Ok(PolygonKind::Circumscribed),
            _ => Err(Error::InvalidInput(format!("unknown polygon kind '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PolygonConfig {
    pub kind: PolygonKind,
    pub n: usize,
    /// Affine parameters of the vertices or tangency points, increasing and
    /// starting in `[0, λ)`; later entries may exceed λ by less than one turn.
    pub params: Vec<f64>,
    /// Support angles matching `params`.
    pub thetas: Vec<f64>,
    /// Polygon corners. For circumscribed polygons corner `i` lies between
    /// tangency points `i` and `i + 1`.
    pub vertices: Vec<[f64; 2]>,
    /// Max-norm of the criticality residuals in affine units.
    pub residual_norm: f64,
    /// `λ_{n,i} = s_{n,i} − s_{n,i−1}`, cyclic.
    pub spacing: Vec<f64>,
    /// Largest eigenvalue of the area Hessian (inscribed) or of its negative
    /// (circumscribed), in affine units; nonpositive at a genuine extremum.
    pub extremality: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeficitSample {
    pub n: usize,
    pub delta: f64,
    pub kind: PolygonKind,
    pub accuracy_estimate: f64,
    pub residual: f64,
}

/// Residuals in θ-units and their Jacobian.
struct System {
    residual: DVector<f64>,
    jacobian: DMatrix<f64>,
    /// Row factors converting residuals to affine units.
    to_affine: DVector<f64>,
}

fn inscribed_system(curve: &Curve, ac: &AffineCurve, th: &[f64]) -> System {
    let n = th.len();
    let d1: Vec<Vec2> = th.iter().map(|&t| curve.derivative(t, 1)).collect();
    let d2: Vec<Vec2> = th.iter().map(|&t| curve.derivative(t, 2)).collect();
    let mut residual = DVector::zeros(n);
    let mut jacobian = DMatrix::zeros(n, n);
    let mut to_affine = DVector::zeros(n);
    for i in 0..n {
        let (prev, next) = ((i + n - 1) % n, (i + 1) % n);
        let chord = curve.chord(neighbor(th, i, -1), neighbor(th, i, 1));
        residual[i] = omega(&chord, &d1[i]);
        jacobian[(i, next)] += omega(&d1[next], &d1[i]);
        jacobian[(i, prev)] -= omega(&d1[prev], &d1[i]);
        jacobian[(i, i)] += omega(&chord, &d2[i]);
        to_affine[i] = 1.0 / ac.speed(th[i]);
    }
    System {
        residual,
        jacobian,
        to_affine,
    }
}

/// Angle of the cyclic neighbor `i + offset`, unwrapped relative to `θ_i`.
fn neighbor(th: &[f64], i: usize, offset: isize) -> f64 {
    let n = th.len() as isize;
    let j = i as isize + offset;
    th[j.rem_euclid(n) as usize] + TWO_PI * j.div_euclid(n) as f64
}

/// Tangent offset from point `i` toward the tangent at its neighbor
/// `i + offset`, with derivatives in the neighbor's angle and in `θ_i`.
fn offset_with_partials(curve: &Curve, th: &[f64], i: usize, offset: isize) -> (f64, f64, f64) {
    let o = neighbor(th, i, offset);
    let (to, ti) = (curve.derivative(o, 1), curve.derivative(th[i], 1));
    let (ao, ai) = (curve.derivative(o, 2), curve.derivative(th[i], 2));
    let diff = curve.chord(th[i], o);
    let a = omega(&to, &diff);
    let b = omega(&to, &ti);
    let da_o = omega(&ao, &diff);
    let da_i = -b;
    let db_o = omega(&ao, &ti);
    let db_i = omega(&to, &ai);
    let t = a / b;
    (t, (da_o * b - a * db_o) / (b * b), (da_i * b - a * db_i) / (b * b))
}

fn circumscribed_system(curve: &Curve, ac: &AffineCurve, th: &[f64]) -> System {
    let n = th.len();
    let mut residual = DVector::zeros(n);
    let mut jacobian = DMatrix::zeros(n, n);
    let mut to_affine = DVector::zeros(n);
    for i in 0..n {
        let (prev, next) = ((i + n - 1) % n, (i + 1) % n);
        let (tm, dm_o, dm_i) = offset_with_partials(curve, th, i, -1);
        let (tp, dp_o, dp_i) = offset_with_partials(curve, th, i, 1);
        residual[i] = tm + tp;
        jacobian[(i, prev)] += dm_o;
        jacobian[(i, next)] += dp_o;
        jacobian[(i, i)] += dm_i + dp_i;
        to_affine[i] = ac.speed(th[i]);
    }
    System {
        residual,
        jacobian,
        to_affine,
    }
}

/// Hessian of the polygon area in θ, exact at critical points.
fn area_hessian(curve: &Curve, kind: PolygonKind, th: &[f64], sys: &System) -> DMatrix<f64> {
    match kind {
        // R = −2∇A.
        PolygonKind::Inscribed => sys.jacobian.scale(-0.5),
        // ∇A = c ∘ G with c_i = −½(t₊ − t₋)ω(x'_i, x''_i); the c' G term vanishes at G = 0.
        PolygonKind::Circumscribed => {
            let n = th.len();
            let mut h = sys.jacobian.clone();
            for i in 0..n {
                let tm = offset_with_partials(curve, th, i, -1).0;
                let tp = offset_with_partials(curve, th, i, 1).0;
                let c = -0.5 * (tp - tm) * omega(&curve.derivative(th[i], 1), &curve.derivative(th[i], 2));
                for j in 0..n {
                    h[(i, j)] *= c;
                }
            }
            h
        }
    }
}

fn circumscribed_area(curve: &Curve, th: &[f64]) -> f64 {
    let corners = circumscribed_vertices(curve, th);
    shoelace(&corners)
}

fn circumscribed_vertices(curve: &Curve, th: &[f64]) -> Vec<Vec2> {
    let n = th.len();
    (0..n)
        .map(|i| {
            let t = offset_with_partials(curve, th, i, 1).0;
            curve.point(th[i]) + curve.derivative(th[i], 1) * t
        })
        .collect()
}

fn shoelace(points: &[Vec2]) -> f64 {
    let n = points.len();
    0.5 * (0..n).map(|i| omega(&points[i], &points[(i + 1) % n])).sum::<f64>()
}

fn system(curve: &Curve, ac: &AffineCurve, kind: PolygonKind, th: &[f64]) -> System {
    match kind {
        PolygonKind::Inscribed => inscribed_system(curve, ac, th),
        PolygonKind::Circumscribed => circumscribed_system(curve, ac, th),
    }
}

fn affine_norm(sys: &System) -> f64 {
    sys.residual
        .iter()
        .zip(sys.to_affine.iter())
        .map(|(r, f)| (r * f).abs())
        .fold(0.0, f64::max)
}

fn tolerance(ac: &AffineCurve, kind: PolygonKind) -> f64 {
    match kind {
        PolygonKind::Inscribed => 1e-13 * ac.lambda() * ac.lambda(),
        PolygonKind::Circumscribed => 1e-13 * ac.lambda(),
    }
}

/// Largest step multiplier keeping every gap at least half its current size.
fn ordering_limit(th: &[f64], step: &DVector<f64>) -> f64 {
    let n = th.len();
    let mut limit: f64 = 1.0;
    for i in 0..n {
        let j = (i + 1) % n;
        let gap = if j == 0 { th[0] + TWO_PI - th[i] } else { th[j] - th[i] };
        let shrink = step[i] - step[j];
        if shrink > 0.0 {
            limit = limit.min(0.5 * gap / shrink);
        }
    }
    limit
}

fn pseudo_solve(j: &DMatrix<f64>, r: &DVector<f64>) -> DVector<f64> {
    let svd = j.clone().svd(true, true);
    let smax = svd.singular_values.max();
    svd.solve(r, SVD_CUTOFF * smax).unwrap_or_else(|_| DVector::zeros(r.len()))
}

/// Affine residual norm, skipping the equation of a pinned vertex.
fn merit(sys: &System, pinned: Option<usize>) -> f64 {
    match pinned {
        None => affine_norm(sys),
        Some(p) => sys
            .residual
            .iter()
            .zip(sys.to_affine.iter())
            .enumerate()
            .filter(|(i, _)| *i != p)
            .map(|(_, (r, f))| (r * f).abs())
            .fold(0.0, f64::max),
    }
}

/// Damped Newton on the criticality equations. With `pinned = Some(p)` vertex
/// `p` stays fixed and its equation is left out.
fn newton(
    curve: &Curve,
    ac: &AffineCurve,
    kind: PolygonKind,
    mut th: Vec<f64>,
    pinned: Option<usize>,
) -> Result<(Vec<f64>, System, usize)> {
    let n = th.len();
    let tol = tolerance(ac, kind);
    let mut sys = system(curve, ac, kind, &th);
    let mut norm = merit(&sys, pinned);
    let mut polished = false;
    for it in 0..MAX_ITERATIONS {
        if norm <= tol && polished {
            return Ok((th, sys, it));
        }
        let scaled_r = sys.residual.component_mul(&sys.to_affine);
        let mut scaled_j = sys.jacobian.clone();
        for i in 0..n {
            for j in 0..n {
                scaled_j[(i, j)] *= sys.to_affine[i];
            }
        }
        let step = match pinned {
            None => -pseudo_solve(&scaled_j, &scaled_r),
            Some(p) => {
                let reduced = -pseudo_solve(&scaled_j.remove_row(p).remove_column(p), &scaled_r.remove_row(p));
                reduced.insert_row(p, 0.0)
            }
        };
        let mut alpha = ordering_limit(&th, &step);
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = th.iter().zip(step.iter()).map(|(t, d)| t + alpha * d).collect();
            let trial_sys = system(curve, ac, kind, &trial);
            let trial_norm = merit(&trial_sys, pinned);
            if trial_norm < norm || (norm <= tol && trial_norm <= tol) {
                accepted = Some((trial, trial_sys, trial_norm));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((t, s, nm)) => {
                th = t;
                sys = s;
                if norm <= tol {
                    polished = true;
                }
                norm = nm;
            }
            None if norm <= tol => return Ok((th, sys, it)),
            None => return Err(Error::SolverDiverged { n, residual: norm }),
        }
    }
    if norm <= tol {
        Ok((th, sys, MAX_ITERATIONS))
    } else {
        Err(Error::SolverDiverged { n, residual: norm })
    }
}

/// Largest eigenvalue of the area Hessian in affine units, with the sign
/// flipped for circumscribed polygons so that nonpositive means extremal.
fn extremality(curve: &Curve, ac: &AffineCurve, kind: PolygonKind, th: &[f64], sys: &System) -> f64 {
    let n = th.len();
    let h = area_hessian(curve, kind, th, sys);
    // θ = θ(s): the Hessian in s is D H D with D = diag(dθ/ds).
    let mut hs = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let di = 1.0 / ac.speed(th[i]);
            let dj = 1.0 / ac.speed(th[j]);
            hs[(i, j)] = di * h[(i, j)] * dj;
        }
    }
    let sym = (&hs + hs.transpose()).scale(0.5);
    let sym = match kind {
        PolygonKind::Inscribed => sym,
        PolygonKind::Circumscribed => -sym,
    };
    SymmetricEigen::new(sym).eigenvalues.max()
}

fn solve(ac: &AffineCurve, n: usize, kind: PolygonKind) -> Result<PolygonConfig> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("polygon needs n >= 3, got {n}")));
    }
    let curve = ac.curve();
    let lambda = ac.lambda();
    let eig_tol = 1e-9 * lambda * lambda;
    let start = |phase: f64| -> Result<Vec<f64>> {
        (0..n)
            .map(|i| ac.theta_of(i as f64 * lambda / n as f64 + phase))
            .collect()
    };
    let first = newton(curve, ac, kind, start(0.0)?, None);
    let mut total = 0;
    let mut best: Option<(f64, Vec<f64>, System, f64)> = None;
    let mut failure = match first {
        Ok((sol, sys, its)) => {
            let emax = extremality(curve, ac, kind, &sol, &sys);
            if emax <= RESTART_THRESHOLD * lambda * lambda {
                return Ok(assemble(ac, kind, sol, &sys, emax, its));
            }
            total = its;
            if emax <= eig_tol {
                best = Some((objective(curve, kind, &sol), sol, sys, emax));
            }
            not_extremal(n, kind, emax)
        }
        Err(e) => e,
    };
    // A saddle or a stalled solve along the near-rotational family: restart
    // from shifted uniform configurations and keep the best extremal solution.
    for k in 1..SHIFT_SAMPLES {
        let phase = k as f64 * lambda / (n * SHIFT_SAMPLES) as f64;
        let Ok((cand, cand_sys, cits)) = newton(curve, ac, kind, start(phase)?, None) else {
            continue;
        };
        total += cits;
        let e = extremality(curve, ac, kind, &cand, &cand_sys);
        if e > eig_tol {
            continue;
        }
        let value = objective(curve, kind, &cand);
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, cand, cand_sys, e));
        }
    }
    if best.is_none() {
        for cand in pinned_search(curve, ac, kind, n)? {
            let cand_sys = system(curve, ac, kind, &cand);
            if affine_norm(&cand_sys) > tolerance(ac, kind) {
                continue;
            }
            let e = extremality(curve, ac, kind, &cand, &cand_sys);
            if e > eig_tol {
                failure = not_extremal(n, kind, e);
                continue;
            }
            let value = objective(curve, kind, &cand);
            if best.as_ref().is_none_or(|b| value > b.0) {
                best = Some((value, cand, cand_sys, e));
            }
        }
    }
    match best {
        Some((_, cand, cand_sys, e)) => Ok(assemble(ac, kind, cand, &cand_sys, e, total)),
        None => Err(failure),
    }
}

/// Critical configurations found by pinning vertex 0 at affine parameter `p`,
/// solving for the rest, and bisecting on the sign of the pinned equation over
/// one spacing period. Used when the near-rotational valley stalls Newton.
fn pinned_search(curve: &Curve, ac: &AffineCurve, kind: PolygonKind, n: usize) -> Result<Vec<Vec<f64>>> {
    let lambda = ac.lambda();
    let period = lambda / n as f64;
    let tol = tolerance(ac, kind);
    let solve_at = |p: f64| -> Option<(f64, Vec<f64>)> {
        let th: Vec<f64> = (0..n)
            .map(|i| ac.theta_of(p + i as f64 * period))
            .collect::<Result<_>>()
            .ok()?;
        let (sol, sys, _) = newton(curve, ac, kind, th, Some(0)).ok()?;
        Some((sys.residual[0] * sys.to_affine[0], sol))
    };
    let samples: Vec<_> = (0..=PIN_SAMPLES)
        .map(|k| {
            let p = k as f64 * period / PIN_SAMPLES as f64;
            (p, solve_at(p))
        })
        .collect();
    let mut found = Vec::new();
    for w in samples.windows(2) {
        let (Some((r0, _)), Some((r1, _))) = (&w[0].1, &w[1].1) else {
            continue;
        };
        if r0.signum() == r1.signum() {
            continue;
        }
        let (mut lo, mut hi, mut rlo) = (w[0].0, w[1].0, *r0);
        let mut best = None;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            let Some((r, sol)) = solve_at(mid) else { break };
            let done = r.abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * lambda;
            best = Some(sol);
            if done {
                break;
            }
            if r.signum() == rlo.signum() {
                lo = mid;
                rlo = r;
            } else {
                hi = mid;
            }
        }
        found.extend(best);
    }
    Ok(found)
}

fn not_extremal(n: usize, kind: PolygonKind, eigenvalue: f64) -> Error {
    Error::NotExtremal {
        n,
        expected: match kind {
            PolygonKind::Inscribed => "maximum",
            PolygonKind::Circumscribed => "minimum",
        },
        eigenvalue,
    }
}

/// Area of the polygon with the given parameters, signed so that larger is better.
fn objective(curve: &Curve, kind: PolygonKind, th: &[f64]) -> f64 {
    match kind {
        PolygonKind::Inscribed => {
            let pts: Vec<Vec2> = th.iter().map(|&t| curve.point(t)).collect();
            shoelace(&pts)
        }
        PolygonKind::Circumscribed => -circumscribed_area(curve, th),
    }
}

fn assemble(ac: &AffineCurve, kind: PolygonKind, th: Vec<f64>, sys: &System, emax: f64, iterations: usize) -> PolygonConfig {
    let curve = ac.curve();
    let n = th.len();
    // Rotate so that the first parameter lies in [0, λ).
    let shift = (th[0] / TWO_PI).floor() * TWO_PI;
    let thetas: Vec<f64> = th.iter().map(|t| t - shift).collect();
    let params: Vec<f64> = thetas.iter().map(|&t| ac.s_of(t)).collect();
    let spacing: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 {
                params[0] + ac.lambda() - params[n - 1]
            } else {
                params[i] - params[i - 1]
            }
        })
        .collect();
    let vertices = match kind {
        PolygonKind::Inscribed => thetas.iter().map(|&t| curve.point(t)).collect(),
        PolygonKind::Circumscribed => circumscribed_vertices(curve, &thetas),
    };
    PolygonConfig {
        kind,
        n,
        params,
        thetas,
        vertices: vertices.iter().map(|v| [v.x, v.y]).collect(),
        residual_norm: affine_norm(sys),
        spacing,
        extremality: emax,
        iterations,
    }
}

pub fn solve_inscribed(ac: &AffineCurve, n: usize) -> Result<PolygonConfig> {
    solve(ac, n, PolygonKind::Inscribed)
}

pub fn solve_circumscribed(ac: &AffineCurve, n: usize) -> Result<PolygonConfig> {
    solve(ac, n, PolygonKind::Circumscribed)
}

pub fn solve_polygon(ac: &AffineCurve, n: usize, kind: PolygonKind) -> Result<PolygonConfig> {
    solve(ac, n, kind)
}

fn deficit_with(curve: &Curve, cfg: &PolygonConfig, nodes: usize) -> f64 {
    let th = &cfg.thetas;
    let n = th.len();
    (0..n)
        .map(|i| {
            let a = th[i];
            let b = if i + 1 == n { th[0] + TWO_PI } else { th[i + 1] };
            match cfg.kind {
                PolygonKind::Inscribed => chord_area_with(curve, a, b, nodes),
                PolygonKind::Circumscribed => tangent_area_with(curve, a, b, nodes),
            }
        })
        .sum()
}

/// Area of the symmetric difference between the curve and the polygon.
///
/// Summed edge by edge: chord segments for inscribed polygons and the regions
/// between the arc and the two tangents for circumscribed ones.
pub fn deficit(ac: &AffineCurve, cfg: &PolygonConfig) -> DeficitSample {
    let curve = ac.curve();
    let delta = deficit_with(curve, cfg, PRIMARY_NODES);
    let check = deficit_with(curve, cfg, CHECK_NODES);
    let accuracy_estimate = (delta - check).abs() + 4.0 * cfg.n as f64 * f64::EPSILON * delta;
    DeficitSample {
        n: cfg.n,
        delta,
        kind: cfg.kind,
        accuracy_estimate,
        residual: cfg.residual_norm,
    }
}

/// Polygon area by the shoelace formula.
pub fn polygon_area(cfg: &PolygonConfig) -> f64 {
    let pts: Vec<Vec2> = cfg.vertices.iter().map(|v| Vec2::new(v[0], v[1])).collect();
    shoelace(&pts)
}

/// `(s_{n,i}, λ_{n,i})` pairs.
pub fn spacing_profile(cfg: &PolygonConfig) -> Vec<(f64, f64)> {
    cfg.params.iter().copied().zip(cfg.spacing.iter().copied()).collect()
}

/// Third-order spacing law constant: `1/30` inscribed, `−8/5!` circumscribed.
pub fn spacing_law_constant(kind: PolygonKind) -> f64 {
    match kind {
        PolygonKind::Inscribed => 1.0 / 30.0,
        PolygonKind::Circumscribed => -8.0 / 120.0,
    }
}

/// Predicted spacings `λ/n − cλ²I₁/n³ + cλ³k(s_i)/n³`, aligned with `cfg.spacing`.
pub fn spacing_law_prediction(ac: &AffineCurve, cfg: &PolygonConfig) -> Vec<f64> {
    let (lambda, n) = (ac.lambda(), cfg.n as f64);
    let c = spacing_law_constant(cfg.kind);
    let n3 = n.powi(3);
    cfg.params
        .iter()
        .map(|&s| lambda / n - c * lambda * lambda * ac.i1() / n3 + c * lambda.powi(3) * ac.k_at(s) / n3)
        .collect()
}

/// `max_i |λ_{n,i} − prediction|`.
pub fn spacing_law_deviation(ac: &AffineCurve, cfg: &PolygonConfig) -> f64 {
    cfg.spacing
        .iter()
        .zip(spacing_law_prediction(ac, cfg))
        .map(|(l, p)| (l - p).abs())
        .fold(0.0, f64::max)
}

/// Solves and measures the deficit for every `n`, in parallel; output follows `ns`.
pub fn deficit_sweep(ac: &AffineCurve, kind: PolygonKind, ns: &[usize]) -> Result<Vec<DeficitSample>> {
    ns.par_iter()
        .map(|&n| solve(ac, n, kind).map(|cfg| deficit(ac, &cfg)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::billiard::{outer_step, symplectic_step, ChordState, OuterState};
    use crate::curve::{enclosed_area, CurveSpec};
    use approx::assert_abs_diff_eq;

    fn perturbed() -> AffineCurve {
        let spec = CurveSpec::SupportFourier {
            a0: 1.0,
            cos_coeffs: vec![0.0, 0.0, 0.05],
            sin_coeffs: vec![],
        };
        AffineCurve::from_spec(&spec, 512).unwrap()
    }

    fn circle() -> AffineCurve {
        AffineCurve::from_spec(&CurveSpec::circle(1.0), 128).unwrap()
    }

    #[test]
    fn circle_triangle() {
        let ac = circle();
        let cfg = solve_inscribed(&ac, 3).unwrap();
        assert_abs_diff_eq!(polygon_area(&cfg), 3.0 * 3f64.sqrt() / 4.0, epsilon = 1e-14);
        for l in &cfg.spacing {
            assert_abs_diff_eq!(*l, 2.0 * PI / 3.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn circle_deficits_closed_form() {
        let ac = circle();
        for n in [3usize, 6, 17, 40] {
            let nf = n as f64;
            let ins = deficit(&ac, &solve_inscribed(&ac, n).unwrap());
            assert_abs_diff_eq!(ins.delta, PI - 0.5 * nf * (2.0 * PI / nf).sin(), epsilon = 1e-13);
            let cir = deficit(&ac, &solve_circumscribed(&ac, n).unwrap());
            assert_abs_diff_eq!(cir.delta, nf * (PI / nf).tan() - PI, epsilon = 1e-13);
        }
    }

    #[test]
    fn circle_square_circumscribed() {
        let ac = circle();
        let cfg = solve_circumscribed(&ac, 4).unwrap();
        assert_abs_diff_eq!(polygon_area(&cfg), 4.0, epsilon = 1e-13);
        for v in &cfg.vertices {
            assert_abs_diff_eq!(v[0].abs(), 1.0, epsilon = 1e-13);
            assert_abs_diff_eq!(v[1].abs(), 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn ellipse_affine_images() {
        let ac = AffineCurve::from_spec(&CurveSpec::Ellipse { a: 2.0, b: 1.0 }, 128).unwrap();
        let ins = solve_inscribed(&ac, 4).unwrap();
        assert_abs_diff_eq!(polygon_area(&ins), 4.0, epsilon = 1e-13);
        let cir = solve_circumscribed(&ac, 3).unwrap();
        assert_abs_diff_eq!(polygon_area(&cir), 2.0 * 3.0 * 3f64.sqrt(), epsilon = 1e-12);
        let cfg = solve_inscribed(&ac, 8).unwrap();
        for l in &cfg.spacing {
            assert_abs_diff_eq!(*l, ac.lambda() / 8.0, epsilon = 1e-12);
        }
        let d = deficit(&ac, &solve_inscribed(&ac, 6).unwrap()).delta;
        assert_abs_diff_eq!(d, 2.0 * (PI - 3.0 * 3f64.sqrt() / 2.0), epsilon = 1e-13);
    }

    #[test]
    fn perturbed_solutions_are_critical_and_extremal() {
        let ac = perturbed();
        for n in [3usize, 5, 12, 33] {
            for kind in [PolygonKind::Inscribed, PolygonKind::Circumscribed] {
                let cfg = solve_polygon(&ac, n, kind).unwrap();
                assert!(cfg.residual_norm <= tolerance(&ac, kind), "{kind:?} {n}");
                assert!(cfg.extremality <= 1e-9 * ac.lambda().powi(2));
                assert_abs_diff_eq!(cfg.spacing.iter().sum::<f64>(), ac.lambda(), epsilon = 1e-12);
                assert!(cfg.spacing.iter().all(|l| *l > 0.0));
            }
        }
    }

    #[test]
    fn deficit_cross_checks_against_areas() {
        let ac = perturbed();
        let area = enclosed_area(ac.curve());
        for n in [4usize, 9, 20] {
            let ins = solve_inscribed(&ac, n).unwrap();
            assert_abs_diff_eq!(deficit(&ac, &ins).delta, area - polygon_area(&ins), epsilon = 1e-13);
            let cir = solve_circumscribed(&ac, n).unwrap();
            assert_abs_diff_eq!(deficit(&ac, &cir).delta, polygon_area(&cir) - area, epsilon = 1e-13);
            assert!(deficit(&ac, &cir).accuracy_estimate < 1e-14);
        }
    }

    #[test]
    fn tangency_points_bisect_edges() {
        let ac = perturbed();
        let cfg = solve_circumscribed(&ac, 7).unwrap();
        let n = cfg.n;
        for i in 0..n {
            let p = ac.curve().point(cfg.thetas[i]);
            let a = Vec2::from(cfg.vertices[(i + n - 1) % n]);
            let b = Vec2::from(cfg.vertices[i]);
            assert_abs_diff_eq!((a + b) * 0.5, p, epsilon = 1e-12);
        }
    }

    #[test]
    fn polygons_are_periodic_orbits() {
        let ac = perturbed();
        let n = 9;
        let cfg = solve_inscribed(&ac, n).unwrap();
        let lambda = ac.lambda();
        let start = ChordState {
            s0: cfg.params[0].rem_euclid(lambda),
            s1: cfg.params[1].rem_euclid(lambda),
        };
        let mut st = start;
        for _ in 0..n {
            st = symplectic_step(&ac, st).unwrap();
        }
        let gap = (st.s0 - start.s0).rem_euclid(lambda);
        assert!(gap.min(lambda - gap) <= 1e-10 * lambda);

        let cfg = solve_circumscribed(&ac, n).unwrap();
        let p0 = Vec2::from(cfg.vertices[0]);
        let mut st = OuterState { p: p0 };
        for i in 1..=n {
            st = outer_step(ac.curve(), st).unwrap();
            assert_abs_diff_eq!(st.p, Vec2::from(cfg.vertices[i % n]), epsilon = 1e-10);
        }
    }

    #[test]
    fn circumscribed_hessian_matches_finite_differences() {
        let ac = perturbed();
        let curve = ac.curve();
        let cfg = solve_circumscribed(&ac, 6).unwrap();
        let th = cfg.thetas.clone();
        let sys = circumscribed_system(curve, &ac, &th);
        let h = area_hessian(curve, PolygonKind::Circumscribed, &th, &sys);
        let eps = 1e-4;
        for i in 0..6 {
            for j in 0..6 {
                let area_at = |di: f64, dj: f64| {
                    let mut t = th.clone();
                    t[i] += di;
                    t[j] += dj;
                    circumscribed_area(curve, &t)
                };
                let fd = (area_at(eps, eps) - area_at(eps, -eps) - area_at(-eps, eps) + area_at(-eps, -eps))
                    / (4.0 * eps * eps);
                assert_abs_diff_eq!(h[(i, j)], fd, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn deficits_decrease_with_n() {
        let ac = perturbed();
        for kind in [PolygonKind::Inscribed, PolygonKind::Circumscribed] {
            let ns: Vec<usize> = (3..=24).collect();
            let sweep = deficit_sweep(&ac, kind, &ns).unwrap();
            for w in sweep.windows(2) {
                assert!(w[1].delta < w[0].delta);
            }
        }
    }

    #[test]
    fn stalled_rotational_valley_is_resolved() {
        let spec = CurveSpec::SupportFourier {
            a0: 1.0,
            cos_coeffs: vec![],
            sin_coeffs: vec![0.0, 0.0, 0.0, -0.009755050799991059],
        };
        let ac = AffineCurve::from_spec(&spec, 512).unwrap();
        let cfg = solve_inscribed(&ac, 5).unwrap();
        assert!(cfg.extremality <= 0.0);
        let d5 = deficit(&ac, &cfg).delta;
        let d4 = deficit(&ac, &solve_inscribed(&ac, 4).unwrap()).delta;
        let d6 = deficit(&ac, &solve_inscribed(&ac, 6).unwrap()).delta;
        assert!(d6 < d5 && d5 < d4);
    }

    #[test]
    fn rejects_small_n() {
        assert!(solve_inscribed(&circle(), 2).is_err());
    }
}
