//! Adaptive Simpson quadrature.
//!
//! Integrands in this crate are trigonometric polynomials (or their
//! reciprocals on null-free intervals), so a plain recursive Simpson rule
//! with Richardson correction converges quickly. Hitting the depth limit
//! almost always means the integrand is singular on the interval.

use crate::error::{Error, Result};

/// Default recursion limit.
pub const MAX_DEPTH: usize = 30;

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate_with_depth(f, a, b, tol, MAX_DEPTH)
}

pub fn integrate_with_depth<F>(f: F, a: f64, b: f64, tol: f64, max_depth: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("bounds", format!("non-finite interval [{a}, {b}]")));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    // Seed with a few panels so that integrands that happen to vanish at
    // the five initial nodes are not accepted prematurely.
    const PANELS: usize = 8;
    let width = (hi - lo) / PANELS as f64;
    let mut total = 0.0;
    for k in 0..PANELS {
        let x0 = lo + width * k as f64;
        let x1 = if k + 1 == PANELS { hi } else { x0 + width };
        let fa = f(x0);
        let fb = f(x1);
        let m = 0.5 * (x0 + x1);
        let fm = f(m);
        let whole = simpson(x0, x1, fa, fm, fb);
        let part = recurse(&f, x0, x1, fa, fm, fb, whole, tol / PANELS as f64, max_depth)
            .ok_or(Error::Quadrature {
                a,
                b,
                tolerance: tol,
                max_depth,
            })?;
        total += part;
    }
    if !total.is_finite() {
        return Err(Error::Quadrature {
            a,
            b,
            tolerance: tol,
            max_depth,
        });
    }
    Ok(sign * total)
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return None;
    }
    if delta.abs() <= 15.0 * tol {
        return Some(left + right + delta / 15.0);
    }
    if depth == 0 {
        return None;
    }
    let l = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let r = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Some(l + r)
}
