//! Areas of the curvilinear pieces cut off by chords and tangent lines.
//!
//! Parameters here are support angles θ. The chord area between `a < b` is
//! `½∫_a^b ω(x(t) − x(a), x'(t)) dt`, integrated by composite Gauss–Legendre.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

use crate::curve::{omega, Curve};

/// Node counts of the primary and the comparison rule.
pub const PRIMARY_NODES: usize = 32;
pub const CHECK_NODES: usize = 24;

fn rule(nodes: usize) -> &'static GaussLegendre {
    static PRIMARY: OnceLock<GaussLegendre> = OnceLock::new();
    static CHECK: OnceLock<GaussLegendre> = OnceLock::new();
    let cell = match nodes {
        PRIMARY_NODES => &PRIMARY,
        CHECK_NODES => &CHECK,
        _ => panic!("unsupported rule size {nodes}"),
    };
    cell.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(nodes).unwrap()))
}

fn panels(curve: &Curve, a: f64, b: f64) -> usize {
    let w = curve.max_frequency().max(1) as f64;
    ((w * (b - a).abs() / 20.0).ceil() as usize).max(1)
}

fn composite(nodes: usize, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let q = rule(nodes);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * h;
            q.integrate(lo, lo + h, &mut f)
        })
        .sum()
}

/// Area between the arc from `a` to `b` and its chord, with a chosen rule.
pub fn chord_area_with(curve: &Curve, a: f64, b: f64, nodes: usize) -> f64 {
    let m = panels(curve, a, b);
    0.5 * composite(nodes, a, b, m, |t| omega(&curve.chord(a, t), &curve.derivative(t, 1)))
}

/// Area between the arc from `a` to `b` and its chord.
pub fn chord_area(curve: &Curve, a: f64, b: f64) -> f64 {
    chord_area_with(curve, a, b, PRIMARY_NODES)
}

/// Signed distance parameter along the tangent at `at` to the tangent line at `other`:
/// `x(at) + t·x'(at)` lies on the tangent at `other`.
pub fn tangent_offset(curve: &Curve, at: f64, other: f64) -> f64 {
    let to = curve.derivative(other, 1);
    omega(&to, &curve.chord(at, other)) / omega(&to, &curve.derivative(at, 1))
}

/// Area of the triangle formed by the chord from `a` to `b` and the two tangents.
pub fn tangent_triangle_area(curve: &Curve, a: f64, b: f64) -> f64 {
    let t = tangent_offset(curve, a, b);
    0.5 * t * omega(&curve.derivative(a, 1), &curve.chord(a, b))
}

/// Area between the arc from `a` to `b` and the two tangent lines at its ends.
pub fn tangent_area_with(curve: &Curve, a: f64, b: f64, nodes: usize) -> f64 {
    tangent_triangle_area(curve, a, b) - chord_area_with(curve, a, b, nodes)
}

pub fn tangent_area(curve: &Curve, a: f64, b: f64) -> f64 {
    tangent_area_with(curve, a, b, PRIMARY_NODES)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveSpec;
    use approx::assert_abs_diff_eq;

    #[test]
    fn circle_segment_and_tangent_region() {
        let c = Curve::new(&CurveSpec::circle(1.0)).unwrap();
        for d in [1e-3f64, 0.1, 1.0, 2.5] {
            let seg = 0.5 * (d - d.sin());
            assert_abs_diff_eq!(chord_area(&c, 0.4, 0.4 + d), seg, epsilon = 1e-15);
            let tan = (0.5 * d).tan() - 0.5 * d;
            assert_abs_diff_eq!(tangent_area(&c, 0.4, 0.4 + d), tan, epsilon = 2e-15);
        }
    }

    #[test]
    fn chord_areas_of_a_full_partition_sum_to_polygon_deficit() {
        let spec = CurveSpec::SupportFourier {
            a0: 1.0,
            cos_coeffs: vec![0.0, 0.1, 0.02],
            sin_coeffs: vec![0.0, 0.0, 0.03],
        };
        let c = Curve::new(&spec).unwrap();
        let nodes: Vec<f64> = (0..7).map(|i| 0.3 + i as f64 * 0.9).collect();
        let mut sum = 0.0;
        let mut shoelace = 0.0;
        for i in 0..7 {
            let a = nodes[i];
            let b = if i == 6 { nodes[0] + 2.0 * std::f64::consts::PI } else { nodes[i + 1] };
            sum += chord_area(&c, a, b);
            let (p, q) = (c.point(a), c.point(b));
            shoelace += 0.5 * omega(&p, &q);
        }
        assert_abs_diff_eq!(sum, crate::curve::enclosed_area(&c) - shoelace, epsilon = 1e-14);
    }

    #[test]
    fn rules_agree() {
        let c = Curve::new(&CurveSpec::Ellipse { a: 3.0, b: 0.5 }).unwrap();
        let a = chord_area_with(&c, 0.1, 1.4, PRIMARY_NODES);
        let b = chord_area_with(&c, 0.1, 1.4, CHECK_NODES);
        assert_abs_diff_eq!(a, b, epsilon = 1e-15);
    }
}
