//! One-dimensional root finding and unimodal minimization.

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::scalar::Scalar;

pub(crate) const NEWTON_MAX_ITER: usize = 100;

/// Root of an increasing function `g` bracketed by `g(lo) <= 0 <= g(hi)`.
///
/// Newton steps from `hi`; any step leaving the current bracket is
/// replaced by bisection, so the bracket shrinks every iteration.
pub(crate) fn newton_bracketed<F: Scalar>(
    g: impl Fn(F) -> F,
    dg: impl Fn(F) -> F,
    mut lo: F,
    mut hi: F,
    tol: F,
) -> Result<F> {
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let mut p = hi;
    for _ in 0..NEWTON_MAX_ITER {
        let val = g(p);
        if val == F::zero() {
            return Ok(p);
        }
        if val > F::zero() {
            hi = p;
        } else {
            lo = p;
        }
        let slope = dg(p);
        let mut next = p - val / slope;
        if !(next.is_finite() && next > lo && next < hi) {
            next = lo + (hi - lo) * F::half();
        }
        let scale = F::one().max(next.abs());
        let step_tol = tol.max(F::lit(4.0) * F::epsilon() * scale);
        if (next - p).abs() <= step_tol || hi - lo <= step_tol {
            return Ok(next);
        }
        p = next;
    }
    Err(Error::Convergence(format!(
        "bracketed Newton did not reach tolerance {tol} within {NEWTON_MAX_ITER} iterations (bracket [{lo}, {hi}])"
    )))
}

/// Golden-section search for the minimum of a unimodal function on
/// `[a, b]`. The best evaluated point (endpoints included) is returned.
pub(crate) fn golden_section_min<F: Scalar>(
    f: impl Fn(F) -> ExtReal<F>,
    mut a: F,
    mut b: F,
    rel_tol: F,
) -> (F, ExtReal<F>) {
    let inv_phi = F::lit(0.618_033_988_749_894_8);
    let mut best = (a, f(a));
    let consider = |x: F, v: ExtReal<F>, best: &mut (F, ExtReal<F>)| {
        if v < best.1 {
            *best = (x, v);
        }
    };
    let fb = f(b);
    consider(b, fb, &mut best);
    let mut c = b - (b - a) * inv_phi;
    let mut d = a + (b - a) * inv_phi;
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..400 {
        let width = b - a;
        if width <= rel_tol * (F::one() + a.abs().max(b.abs())) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * inv_phi;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * inv_phi;
            fd = f(d);
        }
    }
    consider(c, fc, &mut best);
    consider(d, fd, &mut best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_finds_cube_root() {
        let r = newton_bracketed(|p: f64| p * p * p - 2.0, |p| 3.0 * p * p, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn newton_survives_flat_start() {
        // derivative vanishes at hi; bisection fallback keeps progress
        let r = newton_bracketed(|p: f64| p.powi(3), |p| 3.0 * p * p, -1.0, 0.5, 1e-12).unwrap();
        assert!(r.abs() < 1e-4);
    }

    #[test]
    fn golden_section_handles_infinite_walls() {
        let f = |x: f64| {
            if x < 0.0 {
                ExtReal::PlusInf
            } else {
                ExtReal::finite((x - 0.3).abs())
            }
        };
        let (x, v) = golden_section_min(f, -1.0, 2.0, 1e-13);
        assert!((x - 0.3).abs() < 1e-11, "{x}");
        assert!(v.as_finite().unwrap() < 1e-11);
    }
}
