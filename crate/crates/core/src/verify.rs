//! Invariant suites for the command-line `verify` run.
//!
//! Every check records the measured value next to what was expected, so a
//! report is useful whether it passes or not.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::array_model::{gain_unchecked, ArrayConfig, WeightVector};
use crate::capacity::{verify_ordering, CapacityScenario, DEFAULT_INTERFERERS};
use crate::concentration::{concentration_matrix, min_eigenvalue, PhaseRegion};
use crate::error::Result;
use crate::format::fmt_float;
use crate::linalg::{compensated_sum, eigh_symmetric};
use crate::quadrature;
use crate::rng::substream;
use crate::synthesizers::{binomial_weights, dft_weights, slepian_weights, zero_placement};

/// Half-widths of the definiteness and trace suites: `0.05 k` and `1`.
pub fn definiteness_grid() -> Vec<f64> {
    (1..=19).map(|k| 0.05 * k as f64).chain([1.0]).collect()
}

/// Off-diagonal change applied by the perturbation hook.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Perturbation {
    pub row: usize,
    pub col: usize,
    pub delta: f64,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self {
            row: 0,
            col: 1,
            delta: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyOptions {
    /// Largest array size in the matrix suites (from 2 up).
    pub max_elements: usize,
    /// Random weight vectors in the energy-integral suite.
    pub random_vectors: usize,
    /// Monte Carlo samples per ordering case.
    pub samples: usize,
    /// Random vectors added to the ordering suite.
    pub ordering_vectors: usize,
    pub seed: u64,
    /// Applied to every matrix of the definiteness suite.
    pub perturbation: Option<Perturbation>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            max_elements: 12,
            random_vectors: 200,
            samples: 20_000,
            ordering_vectors: 5,
            seed: 1,
            perturbation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyCheck {
    pub suite: &'static str,
    pub name: String,
    pub measured: f64,
    pub expected: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub checks: Vec<VerifyCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerifyCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn write_csv<W: Write>(&self, out: &mut W, digits: usize) -> Result<()> {
        writeln!(out, "suite,check,measured,expected,passed")?;
        for c in &self.checks {
            writeln!(
                out,
                "{},{},{},{},{}",
                c.suite,
                csv_field(&c.name),
                fmt_float(c.measured, digits),
                csv_field(&c.expected),
                c.passed
            )?;
        }
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn check(suite: &'static str, name: String, measured: f64, expected: String, passed: bool) -> VerifyCheck {
    VerifyCheck {
        suite,
        name,
        measured,
        expected,
        passed,
    }
}

/// Random unit-norm complex vector with i.i.d. Gaussian entries.
pub fn random_unit_vector<R: Rng>(rng: &mut R, m: usize) -> WeightVector {
    let w: Vec<Complex64> = (0..m)
        .map(|_| Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    WeightVector::new(w).normalized()
}

/// `A(W)` is positive definite on the grid, and `A(0)` is zero.
pub fn definiteness_suite(opts: &VerifyOptions) -> Result<Vec<VerifyCheck>> {
    let mut out = Vec::new();
    for m in 2..=opts.max_elements {
        let cfg = ArrayConfig::half_wavelength(m)?;
        let zero = concentration_matrix(&cfg, 0.0)?;
        let max_abs = zero.matrix().max_abs();
        out.push(check("definiteness", format!("A(0) zero M={m}"), max_abs, "0".into(), max_abs == 0.0));
        for w in definiteness_grid() {
            let mut a = concentration_matrix(&cfg, w)?;
            if let Some(p) = opts.perturbation {
                a = a.perturbed(p.row.min(m - 1), p.col.min(m - 1), p.delta);
            }
            let lam = min_eigenvalue(&a)?;
            out.push(check(
                "definiteness",
                format!("min eig M={m} W={w:.2}"),
                lam,
                "> 0".into(),
                lam > 0.0,
            ));
        }
    }
    Ok(out)
}

/// `trace A(W) = 2WM` exactly and the eigenvalues sum to the trace.
pub fn trace_suite(opts: &VerifyOptions) -> Result<Vec<VerifyCheck>> {
    let mut out = Vec::new();
    for m in 2..=opts.max_elements {
        let cfg = ArrayConfig::half_wavelength(m)?;
        for w in definiteness_grid() {
            let a = concentration_matrix(&cfg, w)?;
            let expected = 2.0 * w * m as f64;
            let tr = a.trace();
            out.push(check(
                "trace",
                format!("trace M={m} W={w:.2}"),
                tr,
                format!("2WM = {expected}"),
                tr == expected,
            ));
            let eig = eigh_symmetric(&a.to_symmetric().expect("broadside matrix is real"))?;
            let sum = compensated_sum(eig.eigenvalues.iter().copied());
            let rel = (sum - expected).abs() / expected;
            out.push(check(
                "trace",
                format!("eigenvalue sum M={m} W={w:.2}"),
                rel,
                "relative error <= 1e-9".into(),
                rel <= 1e-9,
            ));
        }
    }
    Ok(out)
}

/// Integral of the gain over the visible space (half wavelength) and over one
/// pattern period (`d = 0.35 lambda`) for random unit-norm weights.
pub fn energy_suite(opts: &VerifyOptions) -> Result<Vec<VerifyCheck>> {
    let m = opts.max_elements.max(2);
    let mut rng = substream(opts.seed, 2);
    let cases = [
        (ArrayConfig::half_wavelength(m)?, "visible space, d = lambda/2"),
        (ArrayConfig::new(m, 0.35)?, "one period, d = 0.35 lambda"),
    ];
    let vectors: Vec<WeightVector> = (0..opts.random_vectors).map(|_| random_unit_vector(&mut rng, m)).collect();
    let mut out = Vec::new();
    for (cfg, label) in cases {
        let period = cfg.period();
        let mut worst: f64 = 0.0;
        for v in &vectors {
            let w = v.as_slice();
            let energy = quadrature::integrate(|s| gain_unchecked(w, &cfg, s), -period / 2.0, period / 2.0, 1e-11)?;
            worst = worst.max((energy - period).abs());
        }
        out.push(check(
            "energy",
            format!("gain integral over {label} (M={m}, {} vectors)", vectors.len()),
            worst,
            format!("|integral - {period}| <= 1e-8"),
            worst <= 1e-8,
        ));
    }
    Ok(out)
}

/// Distance to the DFT and binomial limits shrinks along the `W` grids;
/// `lambda_max ~ 2WM` for narrow bands.
pub fn limits_suite(opts: &VerifyOptions) -> Result<Vec<VerifyCheck>> {
    let mut out = Vec::new();
    let cfg = ArrayConfig::half_wavelength(5)?;
    let dft = dft_weights(5)?;
    let binomial = binomial_weights(5)?;
    for (name, grid, target) in [
        ("DFT", [0.2, 0.1, 0.05, 0.01, 0.001], &dft),
        ("binomial", [0.8, 0.9, 0.95, 0.99, 0.999], &binomial),
    ] {
        let d: Vec<f64> = grid
            .iter()
            .map(|&w| Ok(slepian_weights(&cfg, w)?.weights.max_distance(target)))
            .collect::<Result<_>>()?;
        let decreasing = d.windows(2).all(|p| p[1] < p[0]);
        let last = *d.last().expect("non-empty grid");
        out.push(check(
            "limits",
            format!("distance to {name} decreasing over {grid:?}"),
            last,
            "strictly decreasing, final < 1e-2".into(),
            decreasing && last < 1e-2,
        ));
    }
    for m in 2..=opts.max_elements.min(10) {
        let cfg = ArrayConfig::half_wavelength(m)?;
        let w = 1e-3;
        let r = slepian_weights(&cfg, w)?;
        let ratio = r.lambda_max / (2.0 * w * m as f64);
        out.push(check(
            "limits",
            format!("lambda_max/(2WM) M={m} W=1e-3"),
            ratio,
            "in [0.99, 1]".into(),
            (0.99..=1.0).contains(&ratio),
        ));
    }
    Ok(out)
}

/// No zeros inside the band and `M - 1` zeros per period.
pub fn zeros_suite(opts: &VerifyOptions) -> Result<Vec<VerifyCheck>> {
    let mut out = Vec::new();
    for m in 3..=opts.max_elements.clamp(3, 8) {
        let cfg = ArrayConfig::half_wavelength(m)?;
        for w in [0.1, 0.2, 0.3, 0.4, 0.5] {
            let r = slepian_weights(&cfg, w)?;
            let z = zero_placement(&r.weights, &cfg, w, 4001)?;
            let floor = 1e-6 * (m as f64).sqrt();
            out.push(check(
                "zeros",
                format!("min in-band |AF| M={m} W={w}"),
                z.min_in_band_magnitude,
                format!("> {floor:e}"),
                z.min_in_band_magnitude > floor,
            ));
            out.push(check(
                "zeros",
                format!("zero count M={m} W={w}"),
                z.zeros_per_period as f64,
                format!("{}", m - 1),
                z.zeros_per_period == m - 1,
            ));
        }
    }
    Ok(out)
}

/// Bound ordering in the reference scenario (`P_s = 1`, total interference
/// 0.6, `N0 = 0.1`, `M = 5`) for Slepian weights and random vectors.
pub fn ordering_suite(opts: &VerifyOptions) -> Result<Vec<VerifyCheck>> {
    let cfg = ArrayConfig::half_wavelength(5)?;
    let mut rng = substream(opts.seed, 3);
    let mut out = Vec::new();
    for w in [0.1, 0.2, 0.3, 0.5] {
        let scenario =
            CapacityScenario::equal_interferers(1.0, 0.6, DEFAULT_INTERFERERS, 0.1, PhaseRegion::broadside(w)?)?;
        let mut cases = vec![("slepian".to_string(), slepian_weights(&cfg, w)?.weights)];
        for k in 0..opts.ordering_vectors {
            cases.push((format!("random{k}"), random_unit_vector(&mut rng, 5)));
        }
        for (label, v) in cases {
            let report = verify_ordering(&scenario, &v, &cfg, opts.samples, opts.seed)?;
            for c in report.checks {
                out.push(check(
                    "ordering",
                    format!("{} W={w} {label}: {}", c.name, c.detail),
                    if c.passed { 1.0 } else { 0.0 },
                    "1".into(),
                    c.passed,
                ));
            }
        }
    }
    Ok(out)
}

/// Every suite in order.
pub fn run_all(opts: &VerifyOptions) -> Result<VerifyReport> {
    let mut checks = definiteness_suite(opts)?;
    checks.extend(trace_suite(opts)?);
    checks.extend(energy_suite(opts)?);
    checks.extend(limits_suite(opts)?);
    checks.extend(zeros_suite(opts)?);
    checks.extend(ordering_suite(opts)?);
    Ok(VerifyReport {
        options: opts.clone(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyOptions {
        VerifyOptions {
            max_elements: 6,
            random_vectors: 10,
            samples: 2000,
            ordering_vectors: 1,
            ..VerifyOptions::default()
        }
    }

    #[test]
    fn small_run_passes() {
        let report = run_all(&small()).unwrap();
        let failed: Vec<_> = report.failures().collect();
        assert!(failed.is_empty(), "{failed:?}");
    }

    #[test]
    fn perturbation_hook_fails_definiteness() {
        let opts = VerifyOptions {
            perturbation: Some(Perturbation::default()),
            ..small()
        };
        let checks = definiteness_suite(&opts).unwrap();
        assert!(checks.iter().any(|c| !c.passed));
        assert!(trace_suite(&opts).unwrap().iter().all(|c| c.passed));
    }

    #[test]
    fn trace_check_reports_measured_value() {
        let checks = trace_suite(&small()).unwrap();
        let c = checks.iter().find(|c| c.name == "trace M=5 W=0.20").unwrap();
        assert_eq!(c.measured, 2.0);
        assert!(c.expected.starts_with("2WM = "));
    }

    #[test]
    fn csv_report() {
        let report = VerifyReport {
            options: small(),
            checks: limits_suite(&small()).unwrap(),
        };
        let mut buf = Vec::new();
        report.write_csv(&mut buf, 6).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("suite,check,measured,expected,passed\nlimits,"));
    }
}
