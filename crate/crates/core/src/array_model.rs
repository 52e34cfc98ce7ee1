//! Uniform linear array geometry, array factor, and directivity gain.
//!
//! Weights use the row-vector convention `AF(s) = v a(s)` with
//! `a(s)_m = exp(-j m kd s)`: the weights multiply the steering vector
//! *without* conjugation. Many antenna texts write `w^H a(s)` instead; a
//! weight vector from those sources must be conjugated before use here.
//!
//! Directions are expressed in the phase domain `s = cos(theta)`, where the
//! array factor is a finite Fourier series in `s` with period `lambda / d`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::fmt_float;
use crate::quadrature;
use crate::trig::{cos_pi, sin_pi};

/// Number of points in the default pattern grid over `[-1, 1]`.
pub const DEFAULT_GRID_POINTS: usize = 2001;

/// Absolute tolerance used by [`band_power`].
pub const BAND_POWER_TOLERANCE: f64 = 1e-9;

/// ULA with `elements` isotropic elements spaced `spacing_ratio` wavelengths apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArrayConfig {
    elements: usize,
    spacing_ratio: f64,
}

impl ArrayConfig {
    pub fn new(elements: usize, spacing_ratio: f64) -> Result<Self> {
        if elements == 0 {
            return Err(Error::invalid("elements", "at least one element is required"));
        }
        if !(spacing_ratio > 0.0 && spacing_ratio.is_finite()) {
            return Err(Error::invalid(
                "spacing_ratio",
                format!("d/lambda must be positive and finite, got {spacing_ratio}"),
            ));
        }
        Ok(Self {
            elements,
            spacing_ratio,
        })
    }

    /// Half-wavelength spacing (`kd = pi`).
    pub fn half_wavelength(elements: usize) -> Result<Self> {
        Self::new(elements, 0.5)
    }

    #[inline]
    pub fn elements(&self) -> usize {
        self.elements
    }

    /// `d / lambda`.
    #[inline]
    pub fn spacing_ratio(&self) -> f64 {
        self.spacing_ratio
    }

    /// `kd = 2 pi d / lambda` in radians.
    pub fn kd(&self) -> f64 {
        2.0 * PI * self.spacing_ratio
    }

    /// Period of the array factor in `s`, `s_T = lambda / d`.
    pub fn period(&self) -> f64 {
        1.0 / self.spacing_ratio
    }

    /// True when `d = lambda / 2` exactly.
    pub fn is_half_wavelength(&self) -> bool {
        self.spacing_ratio == 0.5
    }

    /// `kd * s / pi`, the per-element phase step in units of pi.
    #[inline]
    pub(crate) fn phase_step(&self, s: f64) -> f64 {
        2.0 * self.spacing_ratio * s
    }
}

/// Complex element weights (row vector `v`).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<Complex64>);

impl WeightVector {
    pub fn new(weights: Vec<Complex64>) -> Self {
        Self(weights)
    }

    pub fn from_real(weights: &[f64]) -> Self {
        Self(weights.iter().map(|&w| Complex64::new(w, 0.0)).collect())
    }

    /// Scale to unit Euclidean norm. A zero vector is returned unchanged.
    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.0.iter_mut().for_each(|w| *w /= n);
        }
        self
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|w| w.norm_sqr()).sum()
    }

    /// True if every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.0.iter().all(|w| w.im == 0.0)
    }

    /// Real parts.
    pub fn re(&self) -> Vec<f64> {
        self.0.iter().map(|w| w.re).collect()
    }

    /// Largest elementwise distance to another vector.
    pub fn max_distance(&self, other: &WeightVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub(crate) fn check_len(&self, cfg: &ArrayConfig) -> Result<()> {
        if self.len() != cfg.elements() {
            return Err(Error::DimensionMismatch {
                expected: cfg.elements(),
                actual: self.len(),
            });
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for WeightVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

/// One point of a sampled radiation pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternSample {
    pub s: f64,
    /// `arccos(s)`; NaN outside the visible region.
    pub theta: f64,
    pub af: Complex64,
    pub gain: f64,
}

/// `a(s)` with `a(s)_m = exp(-j m kd s)`.
pub fn steering_vector(cfg: &ArrayConfig, s: f64) -> Vec<Complex64> {
    let step = cfg.phase_step(s);
    (0..cfg.elements())
        .map(|m| {
            let t = m as f64 * step;
            Complex64::new(cos_pi(t), -sin_pi(t))
        })
        .collect()
}

/// `AF(s) = v a(s)`.
pub fn array_factor(v: &WeightVector, cfg: &ArrayConfig, s: f64) -> Result<Complex64> {
    v.check_len(cfg)?;
    Ok(af_unchecked(v.as_slice(), cfg, s))
}

/// `G(s) = |AF(s)|^2`.
pub fn directivity_gain(v: &WeightVector, cfg: &ArrayConfig, s: f64) -> Result<f64> {
    Ok(array_factor(v, cfg, s)?.norm_sqr())
}

/// Horner evaluation of `sum_m v_m z^m`, `z = exp(-j kd s)`.
#[inline]
pub(crate) fn af_unchecked(v: &[Complex64], cfg: &ArrayConfig, s: f64) -> Complex64 {
    let t = cfg.phase_step(s);
    let z = Complex64::new(cos_pi(t), -sin_pi(t));
    let mut acc = Complex64::new(0.0, 0.0);
    for w in v.iter().rev() {
        acc = acc * z + w;
    }
    acc
}

#[inline]
pub(crate) fn gain_unchecked(v: &[Complex64], cfg: &ArrayConfig, s: f64) -> f64 {
    af_unchecked(v, cfg, s).norm_sqr()
}

/// Evaluate the pattern at every grid point, preserving order.
pub fn sample_pattern(v: &WeightVector, cfg: &ArrayConfig, grid: &[f64]) -> Result<Vec<PatternSample>> {
    v.check_len(cfg)?;
    if let Some(bad) = grid.iter().find(|s| !s.is_finite()) {
        return Err(Error::invalid("grid", format!("non-finite grid value {bad}")));
    }
    Ok(grid
        .iter()
        .map(|&s| {
            let af = af_unchecked(v.as_slice(), cfg, s);
            PatternSample {
                s,
                theta: if (-1.0..=1.0).contains(&s) { s.acos() } else { f64::NAN },
                af,
                gain: af.norm_sqr(),
            }
        })
        .collect())
}

/// `points` uniformly spaced values from `a` to `b`, both endpoints exact.
pub fn uniform_grid(points: usize, a: f64, b: f64) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let last = points - 1;
            (0..points)
                .map(|k| {
                    if k == last {
                        b
                    } else {
                        a + (b - a) * (k as f64 / last as f64)
                    }
                })
                .collect()
        }
    }
}

/// Default 2001-point grid over the visible region.
pub fn default_grid() -> Vec<f64> {
    uniform_grid(DEFAULT_GRID_POINTS, -1.0, 1.0)
}

/// `integral_a^b G(s) ds` by adaptive Simpson.
pub fn band_power(v: &WeightVector, cfg: &ArrayConfig, a: f64, b: f64) -> Result<f64> {
    band_power_with_tolerance(v, cfg, a, b, BAND_POWER_TOLERANCE)
}

pub fn band_power_with_tolerance(
    v: &WeightVector,
    cfg: &ArrayConfig,
    a: f64,
    b: f64,
    tolerance: f64,
) -> Result<f64> {
    v.check_len(cfg)?;
    if !(a < b) {
        return Err(Error::invalid("bounds", format!("need a < b, got [{a}, {b}]")));
    }
    let w = v.as_slice();
    quadrature::integrate(|s| gain_unchecked(w, cfg, s), a, b, tolerance)
}

/// `s = cos(theta)` for `theta` in `[0, pi]`.
pub fn angle_to_phase(theta: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::invalid("theta", format!("{theta} is outside [0, pi]")));
    }
    Ok(theta.cos())
}

/// `theta = arccos(s)` for `s` in `[-1, 1]`.
pub fn phase_to_angle(s: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&s) {
        return Err(Error::invalid("s", format!("{s} is outside [-1, 1]")));
    }
    Ok(s.acos())
}

/// Phase-domain half-width of the broadside sector `[pi/2 - alpha, pi/2 + alpha]`,
/// `W = cos(pi/2 - alpha) = sin(alpha)`.
pub fn sector_half_width(alpha: f64) -> Result<f64> {
    if !(0.0..=PI / 2.0).contains(&alpha) {
        return Err(Error::invalid("alpha", format!("{alpha} is outside [0, pi/2]")));
    }
    Ok((PI / 2.0 - alpha).cos())
}

/// Write samples as CSV with header `s,theta_rad,af_re,af_im,gain`.
pub fn write_pattern_csv<W: Write>(out: &mut W, samples: &[PatternSample], digits: usize) -> Result<()> {
    writeln!(out, "s,theta_rad,af_re,af_im,gain")?;
    for p in samples {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_float(p.s, digits),
            fmt_float(p.theta, digits),
            fmt_float(p.af.re, digits),
            fmt_float(p.af.im, digits),
            fmt_float(p.gain, digits)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dft(m: usize) -> WeightVector {
        WeightVector::from_real(&vec![1.0 / (m as f64).sqrt(); m])
    }

    #[test]
    fn broadside_steering_is_all_ones() {
        let cfg = ArrayConfig::half_wavelength(6).unwrap();
        assert!(steering_vector(&cfg, 0.0).iter().all(|&x| x == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn endfire_alternates() {
        let cfg = ArrayConfig::half_wavelength(5).unwrap();
        let a = steering_vector(&cfg, 1.0);
        for (m, x) in a.iter().enumerate() {
            assert_eq!(x.re, if m % 2 == 0 { 1.0 } else { -1.0 });
            assert_eq!(x.im.abs(), 0.0);
        }
    }

    #[test]
    fn quarter_period_phases() {
        let cfg = ArrayConfig::half_wavelength(4).unwrap();
        let a = steering_vector(&cfg, 0.5);
        let expect = [(1.0, 0.0), (0.0, -1.0), (-1.0, 0.0), (0.0, 1.0)];
        for (x, (re, im)) in a.iter().zip(expect) {
            assert_eq!(x.re, re);
            assert_eq!(x.im, im);
        }
    }

    #[test]
    fn dft_peak_and_first_null() {
        let cfg = ArrayConfig::half_wavelength(5).unwrap();
        let v = dft(5);
        let peak = array_factor(&v, &cfg, 0.0).unwrap();
        assert!((peak.re - 5f64.sqrt()).abs() < 1e-14 && peak.im == 0.0);
        assert!((directivity_gain(&v, &cfg, 0.0).unwrap() - 5.0).abs() < 1e-13);
        // geometric series: sum z^m = (1 - z^5) / (1 - z) vanishes at z^5 = 1, z != 1
        let null = array_factor(&v, &cfg, 0.4).unwrap();
        assert!(null.norm() < 1e-14);
    }

    #[test]
    fn af_matches_steering_inner_product() {
        let cfg = ArrayConfig::new(7, 0.37).unwrap();
        let v = WeightVector::new(
            (0..7)
                .map(|k| Complex64::new((k as f64 * 0.7).sin(), (k as f64 * 1.3).cos()))
                .collect(),
        );
        for &s in &[-1.0, -0.3, 0.0, 0.55, 1.0, 1.7] {
            let a = steering_vector(&cfg, s);
            let direct: Complex64 = v.as_slice().iter().zip(&a).map(|(w, x)| w * x).sum();
            let af = array_factor(&v, &cfg, s).unwrap();
            assert!((af - direct).norm() < 1e-13);
            assert!((directivity_gain(&v, &cfg, s).unwrap() - af.norm_sqr()).abs() < 1e-13);
        }
    }

    #[test]
    fn binomial_double_null_at_endfire() {
        let cfg = ArrayConfig::half_wavelength(5).unwrap();
        let v = WeightVector::from_real(&[1.0, 4.0, 6.0, 4.0, 1.0]).normalized();
        let g = directivity_gain(&v, &cfg, 1.0).unwrap();
        assert!(g < 1e-28);
        // derivative vanishes too: gain grows quadratically or faster
        let h = 1e-4;
        let gh = directivity_gain(&v, &cfg, 1.0 - h).unwrap();
        assert!(gh < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let cfg = ArrayConfig::half_wavelength(4).unwrap();
        assert!(matches!(
            array_factor(&dft(3), &cfg, 0.0),
            Err(Error::DimensionMismatch { expected: 4, actual: 3 })
        ));
    }

    #[test]
    fn sampling_edge_cases() {
        let cfg = ArrayConfig::half_wavelength(5).unwrap();
        assert!(sample_pattern(&dft(5), &cfg, &[]).unwrap().is_empty());
        let one = sample_pattern(&dft(5), &cfg, &[0.0]).unwrap();
        assert_eq!(one.len(), 1);
        assert!((one[0].gain - 5.0).abs() < 1e-13);
        assert!((one[0].theta - PI / 2.0).abs() < 1e-15);
        assert!(sample_pattern(&dft(5), &cfg, &[f64::NAN]).is_err());
    }

    #[test]
    fn trapezoid_total_power() {
        let cfg = ArrayConfig::half_wavelength(6).unwrap();
        let v = WeightVector::new(
            (0..6)
                .map(|k| Complex64::new(1.0 + k as f64, 0.5 - k as f64 * 0.3))
                .collect(),
        )
        .normalized();
        let grid = uniform_grid(4001, -1.0, 1.0);
        let p = sample_pattern(&v, &cfg, &grid).unwrap();
        let h = 2.0 / 4000.0;
        let trap: f64 = p.windows(2).map(|w| 0.5 * h * (w[0].gain + w[1].gain)).sum();
        assert!((trap - 2.0).abs() < 1e-6, "{trap}");
    }

    #[test]
    fn grid_endpoints_exact() {
        let g = uniform_grid(2001, -1.0, 1.0);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[2000], 1.0);
        assert_eq!(g[1000], 0.0);
        assert_eq!(default_grid().len(), 2001);
    }

    #[test]
    fn full_space_power_is_two() {
        let cfg = ArrayConfig::half_wavelength(5).unwrap();
        let v = WeightVector::from_real(&[0.3, -0.1, 0.8, 0.2, 0.4]).normalized();
        let p = band_power(&v, &cfg, -1.0, 1.0).unwrap();
        assert!((p - 2.0).abs() < 1e-9);
    }

    #[test]
    fn period_power() {
        let cfg = ArrayConfig::new(4, 0.35).unwrap();
        let v = WeightVector::new(vec![
            Complex64::new(0.1, 0.2),
            Complex64::new(-0.4, 0.3),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.2, -0.6),
        ])
        .normalized();
        let half = cfg.period() / 2.0;
        let p = band_power(&v, &cfg, -half, half).unwrap();
        assert!((p - cfg.period()).abs() < 1e-8);
    }

    #[test]
    fn band_power_rejects_empty_interval() {
        let cfg = ArrayConfig::half_wavelength(3).unwrap();
        assert!(band_power(&dft(3), &cfg, 0.5, 0.5).is_err());
    }

    #[test]
    fn angle_phase_conversions() {
        assert!((angle_to_phase(PI / 2.0).unwrap()).abs() < 1e-16);
        assert!(angle_to_phase(-0.1).is_err());
        assert!(phase_to_angle(1.5).is_err());
        let alpha = 0.3;
        assert!((sector_half_width(alpha).unwrap() - alpha.sin()).abs() < 1e-15);
        for i in 0..100 {
            let theta = PI * (i as f64 + 0.5) / 100.0;
            let back = phase_to_angle(angle_to_phase(theta).unwrap()).unwrap();
            assert!((back - theta).abs() < 1e-12);
        }
    }

    #[test]
    fn real_weights_conjugate_symmetric_af() {
        let cfg = ArrayConfig::half_wavelength(6).unwrap();
        let v = WeightVector::from_real(&[0.2, 0.5, -0.1, 0.7, 0.3, 0.1]).normalized();
        for i in 0..50 {
            let s = i as f64 / 49.0;
            let a = array_factor(&v, &cfg, s).unwrap();
            let b = array_factor(&v, &cfg, -s).unwrap();
            assert!((a - b.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn csv_header_and_rows() {
        let cfg = ArrayConfig::half_wavelength(2).unwrap();
        let p = sample_pattern(&dft(2), &cfg, &[0.0, 1.0]).unwrap();
        let mut buf = Vec::new();
        write_pattern_csv(&mut buf, &p, 17).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "s,theta_rad,af_re,af_im,gain");
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].split(',').count(), 5);
    }
}
