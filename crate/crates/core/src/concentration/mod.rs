//! Band-concentration matrices.
//!
//! For a phase interval `[a, b]` the matrix `A` with
//! `A[m][n] = integral_a^b exp(j (n - m) kd s) ds` turns in-band radiated
//! energy into a quadratic form: `integral_a^b G(s) ds = v A v^H`. For the
//! broadside band `[-W, W]` this is the real symmetric Toeplitz matrix
//! `A(W)[m][n] = 2W sinc((m - n) kd W)`; shifted bands are `A(W)` times the
//! outer product of the steering vector at the band center (elementwise).

mod precise;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::array_model::ArrayConfig;
use crate::error::{Error, Result};
use crate::linalg::{eigh_hermitian, eigh_symmetric, HermitianMatrix, SymmetricMatrix};
use crate::quadrature;
use crate::trig::{cos_pi, sin_pi, sinc_pi};

pub use precise::count_eigenvalues_below;

/// Absolute tolerance for the angular-domain integrals.
pub const ANGULAR_TOLERANCE: f64 = 1e-10;

/// Below this fraction of `|A|_F` the double-precision smallest eigenvalue
/// is dominated by rounding and is recomputed in extended precision.
const REFINE_BELOW: f64 = 1e-6;

/// Target band `[center - W, center + W]` in the phase domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseRegion {
    center: f64,
    half_width: f64,
    lower: f64,
    upper: f64,
}

impl PhaseRegion {
    pub fn new(center: f64, half_width: f64) -> Result<Self> {
        Self::check_half_width(half_width)?;
        if !center.is_finite() {
            return Err(Error::invalid("center", format!("non-finite center {center}")));
        }
        Ok(Self {
            center,
            half_width,
            lower: center - half_width,
            upper: center + half_width,
        })
    }

    /// `[-W, W]`.
    pub fn broadside(half_width: f64) -> Result<Self> {
        Self::new(0.0, half_width)
    }

    /// Region with the given bounds; the bounds are stored verbatim so that
    /// neighbouring regions built from shared edges tile exactly.
    pub fn from_bounds(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower <= upper) {
            return Err(Error::invalid("bounds", format!("invalid interval [{lower}, {upper}]")));
        }
        let half_width = 0.5 * (upper - lower);
        Self::check_half_width(half_width)?;
        Ok(Self {
            center: 0.5 * (lower + upper),
            half_width,
            lower,
            upper,
        })
    }

    /// Region with a stored center and half-width whose bounds have been
    /// snapped to shared tiling edges.
    pub(crate) fn with_snapped_bounds(center: f64, half_width: f64, lower: f64, upper: f64) -> Result<Self> {
        Self::check_half_width(half_width)?;
        Ok(Self {
            center,
            half_width,
            lower,
            upper,
        })
    }

    fn check_half_width(w: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::invalid("half_width", format!("W must lie in [0, 1], got {w}")));
        }
        Ok(())
    }

    #[inline]
    pub fn center(&self) -> f64 {
        self.center
    }

    #[inline]
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    #[inline]
    pub fn lower(&self) -> f64 {
        self.lower
    }

    #[inline]
    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, s: f64) -> bool {
        (self.lower..=self.upper).contains(&s)
    }

    /// True if the region lies inside the visible space `[-1, 1]`.
    pub fn is_visible(&self) -> bool {
        self.lower >= -1.0 && self.upper <= 1.0
    }
}

/// Which integral produced a concentration matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    /// Closed-form phase-domain integral over `[lower, upper]`.
    Phase {
        config: ArrayConfig,
        lower: f64,
        upper: f64,
    },
    /// Numerical angular-domain integral over `[theta1, theta2]`.
    Angular {
        config: ArrayConfig,
        theta1: f64,
        theta2: f64,
    },
    /// Anything else (hand-built or perturbed).
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationMatrix {
    matrix: HermitianMatrix,
    provenance: Provenance,
}

impl ConcentrationMatrix {
    pub fn from_hermitian(matrix: HermitianMatrix) -> Self {
        Self {
            matrix,
            provenance: Provenance::Custom,
        }
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn order(&self) -> usize {
        self.matrix.order()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix.get(i, j)
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn is_real(&self) -> bool {
        self.matrix.is_real()
    }

    /// The real symmetric form, if every entry is real.
    pub fn to_symmetric(&self) -> Option<SymmetricMatrix> {
        self.is_real().then(|| self.matrix.real_part())
    }

    /// In-band energy `v A v^H`.
    pub fn quadratic_form(&self, v: &[Complex64]) -> f64 {
        self.matrix.quadratic_form(v)
    }

    /// Copy with entry `(i, j)` (and its mirror) shifted by `delta`. Used by
    /// the verification harness to check that the checks can fail.
    pub fn perturbed(&self, i: usize, j: usize, delta: f64) -> Self {
        let mut m = self.matrix.clone();
        m.set(i, j, m.get(i, j) + delta);
        Self::from_hermitian(m)
    }

    /// Largest deviation from Toeplitz structure (`0` for exact Toeplitz).
    pub fn toeplitz_deviation(&self) -> f64 {
        let n = self.order();
        let mut worst: f64 = 0.0;
        for i in 1..n {
            for j in 1..n {
                worst = worst.max((self.get(i, j) - self.get(i - 1, j - 1)).norm());
            }
        }
        worst
    }

    /// Largest deviation from `A[i][j] = A[n-1-i][n-1-j]`.
    pub fn centrosymmetry_deviation(&self) -> f64 {
        let n = self.order();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.get(i, j) - self.get(n - 1 - i, n - 1 - j)).norm());
            }
        }
        worst
    }
}

/// Broadside matrix `A(W)`, real symmetric Toeplitz with diagonal `2W`.
///
/// `W = 0` gives the zero matrix and, at half-wavelength spacing, `W = 1`
/// gives `2 I` exactly.
pub fn concentration_matrix(cfg: &ArrayConfig, half_width: f64) -> Result<ConcentrationMatrix> {
    if !(0.0..=1.0).contains(&half_width) {
        return Err(Error::invalid(
            "half_width",
            format!("W must lie in [0, 1], got {half_width}"),
        ));
    }
    Ok(interval_matrix_raw(cfg, -half_width, half_width))
}

/// Matrix for an arbitrary band `[a, b]`:
/// `A[m][n] = (b - a) sinc(i kd (b - a) / 2) exp(j i kd (a + b) / 2)`, `i = n - m`.
pub fn interval_concentration_matrix(cfg: &ArrayConfig, a: f64, b: f64) -> Result<ConcentrationMatrix> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid("bounds", format!("need finite a < b, got [{a}, {b}]")));
    }
    Ok(interval_matrix_raw(cfg, a, b))
}

/// Same as [`interval_concentration_matrix`] but also accepts `a == b`.
pub(crate) fn interval_matrix_raw(cfg: &ArrayConfig, a: f64, b: f64) -> ConcentrationMatrix {
    let width = b - a;
    let ratio = cfg.spacing_ratio();
    let mid = a + b;
    let matrix = HermitianMatrix::from_fn(cfg.elements(), |m, n| {
        let i = n as f64 - m as f64;
        let magnitude = width * sinc_pi(i.abs() * ratio * width);
        if mid == 0.0 {
            Complex64::new(magnitude, 0.0)
        } else {
            // kd * i * (a + b) / 2 = pi * (i * ratio * (a + b))
            let t = i * ratio * mid;
            Complex64::new(magnitude * cos_pi(t), magnitude * sin_pi(t))
        }
    });
    ConcentrationMatrix {
        matrix,
        provenance: Provenance::Phase {
            config: *cfg,
            lower: a,
            upper: b,
        },
    }
}

/// Angular-domain matrix `A[m][n] = integral_{theta1}^{theta2} exp(j (n - m) kd cos(theta)) dtheta`,
/// by adaptive quadrature. Computed on demand; there is no lookup table.
pub fn angular_concentration_matrix(cfg: &ArrayConfig, theta1: f64, theta2: f64) -> Result<ConcentrationMatrix> {
    if !(0.0 <= theta1 && theta1 < theta2 && theta2 <= PI) {
        return Err(Error::invalid(
            "theta",
            format!("need 0 <= theta1 < theta2 <= pi, got [{theta1}, {theta2}]"),
        ));
    }
    let m = cfg.elements();
    let ratio = cfg.spacing_ratio();
    let mut diagonals = Vec::with_capacity(m);
    for i in 0..m {
        if i == 0 {
            diagonals.push(Complex64::new(theta2 - theta1, 0.0));
            continue;
        }
        let k = i as f64 * 2.0 * ratio;
        let re = quadrature::integrate(|t| cos_pi(k * t.cos()), theta1, theta2, ANGULAR_TOLERANCE)?;
        let im = quadrature::integrate(|t| sin_pi(k * t.cos()), theta1, theta2, ANGULAR_TOLERANCE)?;
        diagonals.push(Complex64::new(re, im));
    }
    let matrix = HermitianMatrix::from_fn(m, |r, c| diagonals[c - r]);
    Ok(ConcentrationMatrix {
        matrix,
        provenance: Provenance::Angular {
            config: *cfg,
            theta1,
            theta2,
        },
    })
}

/// Smallest eigenvalue.
///
/// Concentration matrices of narrow bands are extremely ill-conditioned
/// (the smallest eigenvalue of `A(0.05)` with 12 elements is about `1e-31`),
/// far below double-precision rounding of the largest one. When the
/// double-precision result is within the noise band and the matrix comes
/// from a closed-form phase interval, it is recomputed by inertia bisection
/// in extended precision.
pub fn min_eigenvalue(a: &ConcentrationMatrix) -> Result<f64> {
    let scale = a.matrix.frobenius_norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    let approx = match a.to_symmetric() {
        Some(s) => eigh_symmetric(&s)?.min_eigenvalue(),
        None => eigh_hermitian(&a.matrix)?.min_eigenvalue(),
    };
    if approx.abs() > REFINE_BELOW * scale {
        return Ok(approx);
    }
    match a.provenance {
        Provenance::Phase { config, lower, upper } => Ok(precise::min_eigenvalue(
            config.elements(),
            config.spacing_ratio(),
            upper - lower,
            approx,
            scale,
        )),
        _ => Ok(approx),
    }
}

/// Top eigenpair of `A(W)` in extended precision, for designs whose top
/// two eigenvalues are too close for double precision.
pub(crate) fn precise_top_eigenpair(cfg: &ArrayConfig, half_width: f64) -> precise::PreciseTop {
    precise::top_eigenpair(cfg.elements(), cfg.spacing_ratio(), 2.0 * half_width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigh_symmetric;

    fn half(m: usize) -> ArrayConfig {
        ArrayConfig::half_wavelength(m).unwrap()
    }

    #[test]
    fn zero_width_is_zero_matrix() {
        let a = concentration_matrix(&half(4), 0.0).unwrap();
        assert!(a.matrix().entries().iter().all(|x| x.re == 0.0 && x.im == 0.0));
        assert_eq!(min_eigenvalue(&a).unwrap(), 0.0);
    }

    #[test]
    fn full_width_half_wavelength_is_two_identity() {
        let a = concentration_matrix(&half(6), 1.0).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let expect = if i == j { 2.0 } else { 0.0 };
                assert_eq!(a.get(i, j), Complex64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn three_elements_half_width() {
        // quadrature oracle: integral_{-1/2}^{1/2} cos(k pi s) ds
        let a = concentration_matrix(&half(3), 0.5).unwrap();
        for k in 0..3usize {
            let oracle = quadrature::integrate(|s| (k as f64 * PI * s).cos(), -0.5, 0.5, 1e-13).unwrap();
            assert!((a.get(0, k).re - oracle).abs() < 1e-12);
        }
        assert_eq!(a.get(0, 0).re, 1.0);
        assert!((a.get(0, 1).re - 0.636_619_772_367_581_3).abs() < 1e-15);
        assert_eq!(a.get(0, 2).re, 0.0);
    }

    #[test]
    fn rejects_out_of_range_width() {
        assert!(concentration_matrix(&half(3), 1.5).is_err());
        assert!(concentration_matrix(&half(3), -0.1).is_err());
    }

    #[test]
    fn symmetric_interval_is_bitwise_broadside() {
        for &(m, ratio, w) in &[(5, 0.5, 0.3), (8, 0.37, 0.71), (3, 0.9, 0.05)] {
            let cfg = ArrayConfig::new(m, ratio).unwrap();
            let a = concentration_matrix(&cfg, w).unwrap();
            let b = interval_concentration_matrix(&cfg, -w, w).unwrap();
            assert_eq!(a.matrix(), b.matrix());
        }
    }

    #[test]
    fn interval_trace_and_quadrature() {
        let cfg = half(4);
        let (a, b) = (0.1, 0.7);
        let m = interval_concentration_matrix(&cfg, a, b).unwrap();
        assert!((m.trace() - 4.0 * (b - a)).abs() < 1e-15);
        for r in 0..4 {
            for c in 0..4 {
                let i = c as f64 - r as f64;
                let re = quadrature::integrate(|s| (i * PI * s).cos(), a, b, 1e-13).unwrap();
                let im = quadrature::integrate(|s| (i * PI * s).sin(), a, b, 1e-13).unwrap();
                assert!((m.get(r, c) - Complex64::new(re, im)).norm() < 1e-10);
            }
        }
        assert!(interval_concentration_matrix(&cfg, 0.5, 0.5).is_err());
    }

    #[test]
    fn steered_matrix_is_hadamard_with_outer_product() {
        let cfg = half(5);
        let (c, w) = (0.4, 0.3);
        let steered = interval_concentration_matrix(&cfg, c - w, c + w).unwrap();
        let broad = concentration_matrix(&cfg, w).unwrap();
        let a = crate::array_model::steering_vector(&cfg, c);
        let outer = HermitianMatrix::outer(&a);
        // outer[m][n] = a_m conj(a_n) = exp(j (n - m) kd s)
        let h = HermitianMatrix::from_fn(5, |i, j| broad.get(i, j) * outer.get(i, j));
        for i in 0..5 {
            for j in 0..5 {
                assert!((h.get(i, j) - steered.get(i, j)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn structure_checks() {
        let a = concentration_matrix(&half(7), 0.35).unwrap();
        assert_eq!(a.toeplitz_deviation(), 0.0);
        assert_eq!(a.centrosymmetry_deviation(), 0.0);
        let s = interval_concentration_matrix(&half(7), 0.1, 0.5).unwrap();
        assert!(s.toeplitz_deviation() < 1e-15);
    }

    #[test]
    fn angular_matrix_basics() {
        let cfg = half(3);
        let full = angular_concentration_matrix(&cfg, 0.0, PI).unwrap();
        for i in 0..3 {
            assert!((full.get(i, i).re - PI).abs() < 1e-15);
        }
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(full.get(i, j), full.get(j, i).conj());
            }
        }
        assert!(angular_concentration_matrix(&cfg, 1.0, 0.5).is_err());
    }

    #[test]
    fn angular_matrix_against_trapezoid_oracle() {
        let cfg = half(3);
        let (t1, t2) = (PI / 2.0 - 0.2, PI / 2.0 + 0.2);
        let a = angular_concentration_matrix(&cfg, t1, t2).unwrap();
        let n = 1_000_000;
        let h = (t2 - t1) / n as f64;
        let f = |t: f64| (PI * t.cos()).cos();
        let mut trap = 0.5 * (f(t1) + f(t2));
        for k in 1..n {
            trap += f(t1 + h * k as f64);
        }
        trap *= h;
        assert!((a.get(0, 1).re - trap).abs() < 1e-10);
        // symmetric about pi/2: odd part vanishes
        assert!(a.get(0, 1).im.abs() < 1e-10);
    }

    #[test]
    fn angular_approaches_phase_for_narrow_sectors() {
        let cfg = half(6);
        let delta = 0.01;
        let ang = angular_concentration_matrix(&cfg, PI / 2.0 - delta, PI / 2.0 + delta).unwrap();
        let w = delta.sin();
        let phase = concentration_matrix(&cfg, w).unwrap();
        let la = eigh_hermitian(ang.matrix()).unwrap().max_eigenvalue();
        let lp = eigh_symmetric(&phase.to_symmetric().unwrap()).unwrap().max_eigenvalue();
        assert!(((la - lp) / lp).abs() < 0.01);
    }

    #[test]
    fn min_eigenvalue_refined_for_narrow_band() {
        let a = concentration_matrix(&half(12), 0.05).unwrap();
        let lam = min_eigenvalue(&a).unwrap();
        // 80-digit reference value
        assert!(lam > 0.0);
        assert!((lam / 1.0847e-31 - 1.0).abs() < 1e-3, "{lam:e}");
    }

    #[test]
    fn perturbation_breaks_definiteness() {
        let a = concentration_matrix(&half(5), 0.2).unwrap();
        let p = a.perturbed(0, 1, 0.5);
        assert!(min_eigenvalue(&p).unwrap() < 0.0);
    }

    #[test]
    fn region_bounds() {
        let r = PhaseRegion::new(0.4, 0.3).unwrap();
        assert!((r.lower() - 0.1).abs() < 1e-15 && (r.upper() - 0.7).abs() < 1e-15);
        assert!(r.is_visible());
        let e = PhaseRegion::from_bounds(-0.6, -0.2).unwrap();
        assert_eq!(e.lower(), -0.6);
        assert_eq!(e.upper(), -0.2);
        assert!(PhaseRegion::broadside(1.2).is_err());
        assert!(PhaseRegion::from_bounds(0.3, 0.1).is_err());
    }
}
