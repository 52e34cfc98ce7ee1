//! Trigonometry with arguments in units of pi.
//!
//! Phases in this crate are of the form `pi * t` with `t = m * (2 d / lambda) * s`.
//! Reducing `t` exactly before calling `sin` keeps integer and half-integer
//! multiples of pi exact, so e.g. `A(W = 1) = 2 I` holds bit-for-bit at
//! half-wavelength spacing.

use std::f64::consts::PI;

/// Reduce `x` into `(-1, 1]`, exactly.
#[inline]
fn reduce(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    if r <= -1.0 {
        r + 2.0
    } else {
        r
    }
}

/// `sin(pi x)`.
pub fn sin_pi(x: f64) -> f64 {
    let r = reduce(x);
    let a = r.abs();
    let v = if a == 0.0 || a == 1.0 {
        0.0
    } else if a == 0.5 {
        1.0
    } else if a > 0.5 {
        (PI * (1.0 - a)).sin()
    } else {
        (PI * a).sin()
    };
    if r < 0.0 {
        -v
    } else {
        v
    }
}

/// `cos(pi x)`.
pub fn cos_pi(x: f64) -> f64 {
    let a = reduce(x).abs();
    if a == 0.5 {
        0.0
    } else if a == 0.0 {
        1.0
    } else if a == 1.0 {
        -1.0
    } else if a > 0.5 {
        -cos_first_half(1.0 - a)
    } else {
        cos_first_half(a)
    }
}

#[inline]
fn cos_first_half(a: f64) -> f64 {
    if a <= 0.25 {
        (PI * a).cos()
    } else {
        (PI * (0.5 - a)).sin()
    }
}

/// `sinc(pi t) = sin(pi t) / (pi t)` with `sinc(0) = 1`.
///
/// A two-term series is used for `|pi t| < 1e-6`.
pub fn sinc_pi(t: f64) -> f64 {
    let x = PI * t;
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        sin_pi(t) / x
    }
}

/// Plain `sinc(x) = sin(x) / x`, same small-argument branch.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}
