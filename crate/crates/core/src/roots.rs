//! Safeguarded scalar Newton iteration on a sign-changing bracket.

use crate::error::{Error, Result};

/// Finds a root of `f` in `[lo, hi]`, where `f` returns `(value, derivative)`.
///
/// `f(lo)` and `f(hi)` must not have the same strict sign. Newton steps are
/// taken when they stay inside the current bracket and shrink it fast enough;
/// otherwise the iteration bisects. Stops once a step is below `xtol`.
pub fn bracketed_newton<F>(mut f: F, lo: f64, hi: f64, start: Option<f64>, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (mut lo, mut hi) = (lo, hi);
    let (flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::RootNotFound(format!(
            "no sign change on [{lo}, {hi}]: f = {flo:e}, {fhi:e}"
        )));
    }
    let lo_negative = flo < 0.0;
    let mut x = start.filter(|x| *x > lo && *x < hi).unwrap_or(0.5 * (lo + hi));
    let mut prev_step = hi - lo;
    for _ in 0..200 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx < 0.0) == lo_negative {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        // Newton only while it stays bracketed and at least halves the step.
        let next = if dfx != 0.0 && newton > lo && newton < hi && (newton - x).abs() < 0.5 * prev_step {
            newton
        } else {
            0.5 * (lo + hi)
        };
        prev_step = (next - x).abs();
        x = next;
        if prev_step <= xtol || hi - lo <= xtol {
            return Ok(x);
        }
    }
    Err(Error::RootNotFound(format!("no convergence near {x}")))
}
