//! Weight synthesis: Slepian (broadside, steered, arbitrary spacing) and the
//! DFT, binomial and Dolph-Chebyshev baselines.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::array_model::{af_unchecked, uniform_grid, ArrayConfig, WeightVector};
use crate::concentration::{concentration_matrix, interval_matrix_raw, precise_top_eigenpair, PhaseRegion};
use crate::error::{Error, Result};
use crate::format::fmt_float;
use crate::linalg::{eigh_symmetric, generalized_max_eigvec, HermitianMatrix};
use crate::trig::{cos_pi, sin_pi, sinc_pi};

/// Eigengap below which the top eigenvector is reported as possibly non-unique.
pub const EIGENGAP_WARNING: f64 = 1e-12;

/// Relative eigengap below which the top eigenvector of `A(W)` is
/// recomputed in extended precision.
const PRECISE_GAP: f64 = 1e-6;

/// Tolerance of the symmetry classifier.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

/// Slack on the steering limits so that regions whose edges sit exactly on
/// a limit (up to rounding of the center) are accepted.
const LIMIT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisResult {
    /// Unit-norm weights.
    pub weights: WeightVector,
    /// In-band energy `v A v^H` over the target region. For a broadside
    /// design this is the top eigenvalue of `A(W)`.
    pub lambda_max: f64,
    /// Gap between the two largest eigenvalues of the problem that was solved
    /// (generalized eigenvalues for [`slepian_weights_general`]).
    pub eigengap: f64,
    /// In-band over out-of-band visible energy.
    pub quotient: f64,
    pub region: PhaseRegion,
    pub config: ArrayConfig,
    pub warnings: Vec<String>,
}

fn check_open_width(w: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::invalid("half_width", format!("W must lie in (0, 1), got {w}")));
    }
    if w == 0.0 || w == 1.0 {
        return Err(Error::DegenerateWidth { half_width: w });
    }
    Ok(())
}

/// Visible-region energy matrix `integral_{-1}^{1} a(s)^* a(s)^T ds`.
fn visible_matrix(cfg: &ArrayConfig) -> HermitianMatrix {
    interval_matrix_raw(cfg, -1.0, 1.0).matrix().clone()
}

/// `v A_in v^H / v (A_vis - A_in) v^H` for the band `region`.
pub fn concentration_quotient(cfg: &ArrayConfig, region: &PhaseRegion, v: &WeightVector) -> Result<f64> {
    v.check_len(cfg)?;
    let inside = interval_matrix_raw(cfg, region.lower(), region.upper()).quadratic_form(v.as_slice());
    let visible = visible_matrix(cfg).quadratic_form(v.as_slice());
    Ok(inside / (visible - inside))
}

/// Top eigenvector of `A(W)` (broadside band `[-W, W]`).
///
/// Real, unit norm, with its largest-magnitude entry positive. `W = 0` and
/// `W = 1` are rejected because `A(0) = 0` and (at half-wavelength spacing)
/// `A(1) = 2 I` leave the eigenvector undetermined. Any spacing is accepted;
/// only at half-wavelength spacing does `quotient` reduce to `lambda / (2 - lambda)`.
pub fn slepian_weights(cfg: &ArrayConfig, half_width: f64) -> Result<SynthesisResult> {
    check_open_width(half_width)?;
    let a = concentration_matrix(cfg, half_width)?;
    let eig = eigh_symmetric(&a.to_symmetric().expect("broadside matrix is real"))?;
    let mut lambda = eig.max_eigenvalue();
    let mut eigengap = eig.eigengap();
    let weights = if eigengap < PRECISE_GAP * lambda {
        // Bands close to the whole visible region: the top two eigenvalues
        // agree to more digits than double precision carries.
        let top = precise_top_eigenpair(cfg, half_width);
        lambda = top.lambda;
        eigengap = top.eigengap;
        WeightVector::from_real(&top.vector)
    } else {
        WeightVector::from_real(eig.top_eigenvector())
    };
    let region = PhaseRegion::broadside(half_width)?;
    let quotient = if cfg.is_half_wavelength() {
        lambda / (2.0 - lambda)
    } else {
        concentration_quotient(cfg, &region, &weights)?
    };
    let mut warnings = Vec::new();
    if eigengap < EIGENGAP_WARNING {
        warnings.push(format!(
            "eigengap {eigengap:e} below {EIGENGAP_WARNING:e}: top eigenvalue is nearly degenerate"
        ));
    }
    Ok(SynthesisResult {
        weights,
        lambda_max: lambda,
        eigengap,
        quotient,
        region,
        config: *cfg,
        warnings,
    })
}

/// Check that the band `[center - W, center + W]` is admissible for the
/// array spacing.
///
/// * `kd <= pi`: `|center| <= 1 - W`.
/// * `pi < kd <= 2 pi (1 - W)`: `W <= lambda / 2d` and `|center| <= lambda/d - 1 - W`.
pub fn check_steering(cfg: &ArrayConfig, half_width: f64, center: f64) -> Result<()> {
    let ratio = cfg.spacing_ratio();
    let w = half_width;
    if ratio <= 0.5 {
        if center.abs() > 1.0 - w + LIMIT_SLACK {
            return Err(Error::SteeringLimit(format!(
                "center {center} with W = {w} leaves the visible region (|center| must be <= {})",
                1.0 - w
            )));
        }
        return Ok(());
    }
    if ratio > 1.0 - w + LIMIT_SLACK {
        return Err(Error::SteeringLimit(format!(
            "d/lambda = {ratio} exceeds 1 - W = {}: a grating lobe enters the visible region",
            1.0 - w
        )));
    }
    let period = cfg.period();
    if w > 0.5 * period + LIMIT_SLACK {
        return Err(Error::SteeringLimit(format!(
            "W = {w} exceeds half the pattern period lambda/2d = {}",
            0.5 * period
        )));
    }
    let limit = period - 1.0 - w;
    if center.abs() > limit + LIMIT_SLACK {
        return Err(Error::SteeringLimit(format!(
            "center {center} with W = {w} exceeds the grating-lobe limit |center| <= {limit}"
        )));
    }
    Ok(())
}

fn phase_ramp(x: &[Complex64], cfg: &ArrayConfig, shift: f64) -> Vec<Complex64> {
    // exp(j m kd shift) = exp(j pi m * phase_step(shift))
    let step = cfg.phase_step(shift);
    x.iter()
        .enumerate()
        .map(|(m, &w)| {
            if shift == 0.0 {
                return w;
            }
            let t = m as f64 * step;
            w * Complex64::new(cos_pi(t), sin_pi(t))
        })
        .collect()
}

/// Apply `v_m = x_m exp(j m kd shift)` without any steering-limit check.
pub fn apply_phase_ramp(v: &WeightVector, cfg: &ArrayConfig, shift: f64) -> WeightVector {
    WeightVector::new(phase_ramp(v.as_slice(), cfg, shift))
}

/// Steer a design by `s_c`: `v_m = x_m exp(j m kd s_c)`.
///
/// The shift is relative to the current region center; the resulting
/// region is checked against [`check_steering`].
pub fn steer(result: &SynthesisResult, s_c: f64) -> Result<WeightVector> {
    Ok(steer_result(result, s_c)?.weights)
}

/// Like [`steer`] but also returns the shifted region and bookkeeping.
pub fn steer_result(result: &SynthesisResult, s_c: f64) -> Result<SynthesisResult> {
    if !s_c.is_finite() {
        return Err(Error::invalid("s_c", format!("non-finite steering {s_c}")));
    }
    let cfg = &result.config;
    let w = result.region.half_width();
    let center = result.region.center() + s_c;
    check_steering(cfg, w, center)?;
    let weights = WeightVector::new(phase_ramp(result.weights.as_slice(), cfg, s_c));
    let region = PhaseRegion::new(center, w)?;
    Ok(SynthesisResult {
        weights,
        region,
        ..result.clone()
    })
}

/// Slepian design for any spacing and region, as a generalized Rayleigh
/// quotient.
///
/// Working relative to the band center (`z = s - s_c`), the in-band matrix
/// is `A(W)` and the out-of-band visible energy matrix is
/// `(lambda/d) I - A_I - A_II - A(W)` for `kd < pi` (one pattern period minus
/// the two stripes of it that fall outside the visible region) or
/// `(lambda/d) I + A_I + A_II - A(W)` for `kd > pi` (the visible region spans
/// more than one period). The maximizer is then steered to `s_c`.
pub fn slepian_weights_general(cfg: &ArrayConfig, region: &PhaseRegion) -> Result<SynthesisResult> {
    let w = region.half_width();
    let c = region.center();
    check_open_width(w)?;
    check_steering(cfg, w, c)?;

    let numerator = interval_matrix_raw(cfg, -w, w).matrix().clone();
    let period = cfg.period();
    let ratio = cfg.spacing_ratio();
    let base = HermitianMatrix::identity(cfg.elements()).scale(period);
    let visible = if ratio < 0.5 {
        let s1 = interval_matrix_raw(cfg, -0.5 * period - c, -1.0 - c);
        let s2 = interval_matrix_raw(cfg, 1.0 - c, 0.5 * period - c);
        base.sub(s1.matrix()).sub(s2.matrix())
    } else if ratio > 0.5 {
        let s1 = interval_matrix_raw(cfg, -1.0 - c, -0.5 * period - c);
        let s2 = interval_matrix_raw(cfg, 0.5 * period - c, 1.0 - c);
        base.add(s1.matrix()).add(s2.matrix())
    } else {
        base
    };
    let denominator = visible.sub(&numerator);
    let gen = generalized_max_eigvec(&numerator, &denominator)?;

    let lambda = numerator.quadratic_form(&gen.vector);
    let weights = WeightVector::new(phase_ramp(&gen.vector, cfg, c));
    let eigengap = gen.value - gen.next_value;
    let mut warnings = Vec::new();
    if eigengap < EIGENGAP_WARNING {
        warnings.push(format!(
            "generalized eigengap {eigengap:e} below {EIGENGAP_WARNING:e}: maximizer may not be unique"
        ));
    }
    Ok(SynthesisResult {
        weights,
        lambda_max: lambda,
        eigengap,
        quotient: gen.value,
        region: *region,
        config: *cfg,
        warnings,
    })
}

/// Uniform weights `1/sqrt(M)`.
pub fn dft_weights(elements: usize) -> Result<WeightVector> {
    if elements == 0 {
        return Err(Error::invalid("elements", "need at least one element"));
    }
    let w = 1.0 / (elements as f64).sqrt();
    Ok(WeightVector::from_real(&vec![w; elements]))
}

/// Pascal row `C(M-1, m)`, normalized.
pub fn binomial_weights(elements: usize) -> Result<WeightVector> {
    if elements == 0 {
        return Err(Error::invalid("elements", "need at least one element"));
    }
    let n = elements - 1;
    let mut row = Vec::with_capacity(elements);
    let mut c = 1.0_f64;
    for k in 0..elements {
        row.push(c);
        c = c * (n - k) as f64 / (k + 1) as f64;
    }
    if row.iter().all(|x| x.is_finite()) {
        return Ok(WeightVector::from_real(&row).normalized());
    }
    // Too large for direct evaluation: work with logarithms relative to the peak.
    let mut logs = Vec::with_capacity(elements);
    let mut l = 0.0_f64;
    for k in 0..elements {
        logs.push(l);
        if k < n {
            l += ((n - k) as f64).ln() - ((k + 1) as f64).ln();
        }
    }
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let row: Vec<f64> = logs.iter().map(|x| (x - peak).exp()).collect();
    Ok(WeightVector::from_real(&row).normalized())
}

/// Power-basis coefficients of the Chebyshev polynomial `T_n`.
fn chebyshev_coefficients(n: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if n == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for _ in 1..n {
        let mut next = vec![0.0; cur.len() + 1];
        for (k, &c) in cur.iter().enumerate() {
            next[k + 1] += 2.0 * c;
        }
        for (k, &c) in prev.iter().enumerate() {
            next[k] -= c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Dolph-Chebyshev taper for a broadside array with sidelobes `sidelobe_db`
/// below the main lobe.
///
/// The pattern is `T_{M-1}(x0 cos(psi / 2))` with `x0 = cosh(acosh(R) / (M-1))`
/// and `R = 10^(sidelobe_db / 20)`. Expanding `cos^k(psi/2)` binomially gives
/// the element weights directly. Accurate for the moderate sizes used here
/// (up to a few dozen elements).
pub fn chebyshev_weights(elements: usize, sidelobe_db: f64) -> Result<WeightVector> {
    if elements < 2 {
        return Err(Error::invalid("elements", "Dolph-Chebyshev needs at least two elements"));
    }
    if !(sidelobe_db > 0.0) || !sidelobe_db.is_finite() {
        return Err(Error::invalid(
            "sidelobe_db",
            format!("attenuation must be positive, got {sidelobe_db}"),
        ));
    }
    let n = elements - 1;
    let r = 10f64.powf(sidelobe_db / 20.0);
    let x0 = (r.acosh() / n as f64).cosh();
    let coeffs = chebyshev_coefficients(n);
    let mut w = vec![0.0; elements];
    for (k, &ck) in coeffs.iter().enumerate() {
        if ck == 0.0 {
            continue;
        }
        // cos^k(psi/2) = 2^-k sum_r C(k, r) exp(j psi (r - k/2)); element index r + (n - k)/2
        let scale = ck * (x0 / 2.0).powi(k as i32);
        let offset = (n - k) / 2;
        let mut binom = 1.0;
        for rr in 0..=k {
            w[rr + offset] += scale * binom;
            binom = binom * (k - rr) as f64 / (rr + 1) as f64;
        }
    }
    Ok(WeightVector::from_real(&w).normalized())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryClass {
    Symmetric,
    SkewSymmetric,
}

impl std::fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SymmetryClass::Symmetric => "symmetric",
            SymmetryClass::SkewSymmetric => "skew_symmetric",
        })
    }
}

/// Classify weights by comparison with their reversal.
pub fn weight_symmetry_class(result: &SynthesisResult) -> Result<SymmetryClass> {
    classify_symmetry(&result.weights)
}

pub fn classify_symmetry(v: &WeightVector) -> Result<SymmetryClass> {
    let x = v.as_slice();
    let n = x.len();
    let mut sym: f64 = 0.0;
    let mut skew: f64 = 0.0;
    for m in 0..n {
        sym = sym.max((x[m] - x[n - 1 - m]).norm());
        skew = skew.max((x[m] + x[n - 1 - m]).norm());
    }
    if sym <= SYMMETRY_TOLERANCE {
        Ok(SymmetryClass::Symmetric)
    } else if skew <= SYMMETRY_TOLERANCE {
        Ok(SymmetryClass::SkewSymmetric)
    } else {
        Err(Error::SymmetryViolation { symmetric: sym, skew })
    }
}

/// Class predicted by the alternating-symmetry rule: symmetric for odd `M`,
/// and for even `M` symmetric iff `sinc(kd W) >= 0`.
pub fn predicted_symmetry_class(cfg: &ArrayConfig, half_width: f64) -> SymmetryClass {
    if cfg.elements() % 2 == 1 || sinc_pi(2.0 * cfg.spacing_ratio() * half_width) >= 0.0 {
        SymmetryClass::Symmetric
    } else {
        SymmetryClass::SkewSymmetric
    }
}

/// Zero structure of a broadside pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroPlacement {
    /// Smallest `|AF|` on the in-band grid.
    pub min_in_band_magnitude: f64,
    /// Zeros of `AF` in one pattern period, counted as sign changes of the
    /// phase-aligned (real) array factor.
    pub zeros_per_period: usize,
}

/// Inspect the zeros of a real symmetric or skew-symmetric weight vector.
///
/// `exp(j (M-1) kd s / 2) AF(s)` is real (symmetric weights) or imaginary
/// (skew), so its zeros are sign changes. They are counted over `[0, s_T]`,
/// which starts at the main lobe, and by periodicity equal the count over
/// any half-open period such as `[-1, 1)` at half-wavelength spacing.
pub fn zero_placement(
    v: &WeightVector,
    cfg: &ArrayConfig,
    half_width: f64,
    grid_points: usize,
) -> Result<ZeroPlacement> {
    v.check_len(cfg)?;
    let class = classify_symmetry(v)?;
    let w = v.as_slice();
    let m1 = (cfg.elements() - 1) as f64;
    let aligned = |s: f64| {
        let t = 0.5 * m1 * cfg.phase_step(s);
        let r = af_unchecked(w, cfg, s) * Complex64::new(cos_pi(t), sin_pi(t));
        match class {
            SymmetryClass::Symmetric => r.re,
            SymmetryClass::SkewSymmetric => r.im,
        }
    };
    let min_in_band_magnitude = uniform_grid(grid_points, -half_width, half_width)
        .into_iter()
        .map(|s| af_unchecked(w, cfg, s).norm())
        .fold(f64::INFINITY, f64::min);
    let period = cfg.period();
    let samples = (grid_points * 5).max(2001);
    let mut zeros = 0;
    let mut prev = aligned(0.0);
    for s in uniform_grid(samples, 0.0, period).into_iter().skip(1) {
        let cur = aligned(s);
        if cur == 0.0 {
            continue;
        }
        if prev != 0.0 && (cur > 0.0) != (prev > 0.0) {
            zeros += 1;
        }
        prev = cur;
    }
    Ok(ZeroPlacement {
        min_in_band_magnitude,
        zeros_per_period: zeros,
    })
}

/// Write weights as CSV with header `index,amplitude,phase_rad,re,im`.
pub fn write_weights_csv<W: Write>(out: &mut W, v: &WeightVector, digits: usize) -> Result<()> {
    writeln!(out, "index,amplitude,phase_rad,re,im")?;
    for (i, w) in v.as_slice().iter().enumerate() {
        writeln!(
            out,
            "{i},{},{},{},{}",
            fmt_float(w.norm(), digits),
            fmt_float(w.arg(), digits),
            fmt_float(w.re, digits),
            fmt_float(w.im, digits)
        )?;
    }
    Ok(())
}

/// Read weights written by [`write_weights_csv`] (only `re` and `im` are used).
pub fn read_weights_csv(text: &str) -> Result<WeightVector> {
    let mut weights = Vec::new();
    let mut offset = 0;
    for (lineno, line) in text.split_inclusive('\n').enumerate() {
        let start = offset;
        offset += line.len();
        let line = line.trim();
        if lineno == 0 {
            if line != "index,amplitude,phase_rad,re,im" {
                return Err(Error::Parse {
                    offset: start,
                    message: format!("unexpected header `{line}`"),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                offset: start,
                message: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let index: usize = fields[0].parse().map_err(|_| Error::Parse {
            offset: start,
            message: format!("bad index `{}`", fields[0]),
        })?;
        if index != weights.len() {
            return Err(Error::Parse {
                offset: start,
                message: format!("index {index} out of sequence"),
            });
        }
        let num = |k: usize| -> Result<f64> {
            fields[k].parse::<f64>().map_err(|_| Error::Parse {
                offset: start,
                message: format!("bad number `{}`", fields[k]),
            })
        };
        weights.push(Complex64::new(num(3)?, num(4)?));
    }
    if text.is_empty() {
        return Err(Error::Parse {
            offset: 0,
            message: "empty weights file".into(),
        });
    }
    if weights.is_empty() {
        return Err(Error::Parse {
            offset,
            message: "no weight rows".into(),
        });
    }
    Ok(WeightVector::new(weights))
}
