//! Shannon capacity under random angles of arrival.
//!
//! The desired user sits uniformly in the signal region and each interferer
//! uniformly in the rest of the visible space, either uniform in the phase
//! variable `s` or uniform in angle `theta` (then mapped through `s = cos theta`).
//! Monte Carlo estimates are compared against the Jensen bounds and the
//! closed-form approximation that sits between them.

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::array_model::{gain_unchecked, uniform_grid, ArrayConfig, WeightVector};
use crate::concentration::{angular_concentration_matrix, interval_matrix_raw, PhaseRegion};
use crate::error::{Error, Result};
use crate::format::fmt_float;
use crate::quadrature;
use crate::rng::{chunks, substream};
use crate::synthesizers::{apply_phase_ramp, binomial_weights, chebyshev_weights, dft_weights, slepian_weights};

/// Smallest accepted Monte Carlo sample count.
pub const MIN_SAMPLES: usize = 1000;
/// Interferer count used when only the total interference power is given.
pub const DEFAULT_INTERFERERS: usize = 6;
/// Bootstrap resamples for quantile standard errors.
pub const BOOTSTRAP_RESAMPLES: usize = 200;
/// In-band gain below this fraction of the in-band peak counts as a null.
const NULL_THRESHOLD: f64 = 1e-16;
/// Grid used to look for in-band nulls before integrating `1 / G`.
const NULL_SCAN_POINTS: usize = 4001;
/// Relative slack on the deterministic ordering checks.
const ORDER_SLACK: f64 = 1e-12;
const BOOTSTRAP_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// Which variable is uniformly distributed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingDomain {
    /// Uniform in `s = cos(theta)`.
    Phase,
    /// Uniform in `theta`.
    Angular,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityScenario {
    signal_power: f64,
    interferer_powers: Vec<f64>,
    noise: f64,
    signal_region: PhaseRegion,
    domain: SamplingDomain,
}

impl CapacityScenario {
    pub fn new(
        signal_power: f64,
        interferer_powers: Vec<f64>,
        noise: f64,
        signal_region: PhaseRegion,
        domain: SamplingDomain,
    ) -> Result<Self> {
        if !(signal_power > 0.0 && signal_power.is_finite()) {
            return Err(Error::invalid("signal_power", format!("must be positive, got {signal_power}")));
        }
        if !(noise > 0.0 && noise.is_finite()) {
            return Err(Error::invalid("noise", format!("must be positive, got {noise}")));
        }
        if let Some(p) = interferer_powers.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
            return Err(Error::invalid("interferer_powers", format!("must be non-negative, got {p}")));
        }
        if !(signal_region.half_width() > 0.0) {
            return Err(Error::DegenerateWidth {
                half_width: signal_region.half_width(),
            });
        }
        if !signal_region.is_visible() {
            return Err(Error::invalid(
                "signal_region",
                format!(
                    "[{}, {}] is not inside the visible region [-1, 1]",
                    signal_region.lower(),
                    signal_region.upper()
                ),
            ));
        }
        let scenario = Self {
            signal_power,
            interferer_powers,
            noise,
            signal_region,
            domain,
        };
        if !scenario.interferer_powers.is_empty() && scenario.interference_length() <= 0.0 {
            return Err(Error::EmptyInterferenceRegion {
                interferers: scenario.interferer_powers.len(),
            });
        }
        Ok(scenario)
    }

    /// `count` interferers sharing `total_power` equally, phase-uniform sampling.
    pub fn equal_interferers(
        signal_power: f64,
        total_power: f64,
        count: usize,
        noise: f64,
        signal_region: PhaseRegion,
    ) -> Result<Self> {
        let powers = vec![total_power / count.max(1) as f64; count];
        Self::new(signal_power, powers, noise, signal_region, SamplingDomain::Phase)
    }

    pub fn with_domain(&self, domain: SamplingDomain) -> Self {
        Self {
            domain,
            ..self.clone()
        }
    }

    pub fn with_region(&self, region: PhaseRegion) -> Result<Self> {
        Self::new(
            self.signal_power,
            self.interferer_powers.clone(),
            self.noise,
            region,
            self.domain,
        )
    }

    pub fn signal_power(&self) -> f64 {
        self.signal_power
    }

    pub fn interferer_powers(&self) -> &[f64] {
        &self.interferer_powers
    }

    pub fn total_interference(&self) -> f64 {
        self.interferer_powers.iter().sum()
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn signal_region(&self) -> &PhaseRegion {
        &self.signal_region
    }

    pub fn domain(&self) -> SamplingDomain {
        self.domain
    }

    /// Same scenario with every power (signal, interference, noise) scaled.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            self.signal_power * factor,
            self.interferer_powers.iter().map(|p| p * factor).collect(),
            self.noise * factor,
            self.signal_region,
            self.domain,
        )
    }

    /// Map the sampling variable to `s`.
    #[inline]
    fn to_phase(&self, x: f64) -> f64 {
        match self.domain {
            SamplingDomain::Phase => x,
            SamplingDomain::Angular => x.cos(),
        }
    }

    /// Signal interval in the sampling variable.
    fn signal_segment(&self) -> (f64, f64) {
        let r = &self.signal_region;
        match self.domain {
            SamplingDomain::Phase => (r.lower(), r.upper()),
            SamplingDomain::Angular => (r.upper().acos(), r.lower().acos()),
        }
    }

    /// Interference intervals in the sampling variable (non-empty ones only).
    fn interference_segments(&self) -> Vec<(f64, f64)> {
        let (a, b) = self.signal_segment();
        let (lo, hi) = match self.domain {
            SamplingDomain::Phase => (-1.0, 1.0),
            SamplingDomain::Angular => (0.0, PI),
        };
        [(lo, a), (b, hi)].into_iter().filter(|(x, y)| y > x).collect()
    }

    fn interference_length(&self) -> f64 {
        self.interference_segments().iter().map(|(a, b)| b - a).sum()
    }
}

/// Uniform draw from the union of `segments` with total length `total`.
#[inline]
fn draw_from(segments: &[(f64, f64)], total: f64, u: f64) -> f64 {
    let mut t = u * total;
    for &(a, b) in segments {
        let len = b - a;
        if t < len {
            return a + t;
        }
        t -= len;
    }
    segments.last().map_or(0.0, |s| s.1)
}

/// `log2(1 + P_s G(s0) / (N0 + sum_n P_n G(s_n)))`.
///
/// `s0` is expected in the signal region and each `s_n` in the interference
/// region; neither is enforced so that diagnostic evaluations are possible.
pub fn capacity_sample(
    scenario: &CapacityScenario,
    v: &WeightVector,
    cfg: &ArrayConfig,
    s0: f64,
    s_interferers: &[f64],
) -> Result<f64> {
    v.check_len(cfg)?;
    if s_interferers.len() != scenario.interferer_powers.len() {
        return Err(Error::DimensionMismatch {
            expected: scenario.interferer_powers.len(),
            actual: s_interferers.len(),
        });
    }
    let w = v.as_slice();
    let interference: f64 = scenario
        .interferer_powers
        .iter()
        .zip(s_interferers)
        .map(|(p, &s)| p * gain_unchecked(w, cfg, s))
        .sum();
    let signal = scenario.signal_power * gain_unchecked(w, cfg, s0);
    Ok((1.0 + signal / (scenario.noise + interference)).log2())
}

/// Per-draw Monte Carlo results, in draw order.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityDraws {
    /// Capacity of each draw.
    pub capacity: Vec<f64>,
    /// Interference power `sum_n P_n G(s_n)` of each draw.
    pub interference: Vec<f64>,
    seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n)`.
    pub stderr: f64,
}

impl CapacityDraws {
    pub fn len(&self) -> usize {
        self.capacity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.capacity.is_empty()
    }

    pub fn mean(&self) -> McEstimate {
        let n = self.capacity.len() as f64;
        let mean = self.capacity.iter().sum::<f64>() / n;
        let var = self.capacity.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1.0).max(1.0);
        McEstimate {
            mean,
            stderr: (var / n).sqrt(),
        }
    }

    /// Empirical `q`-percent quantile.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        check_percent(q)?;
        Ok(quantile_of(&mut self.capacity.clone(), q))
    }

    /// Bootstrap standard error of the `q`-percent quantile.
    pub fn quantile_stderr(&self, q: f64, resamples: usize) -> Result<f64> {
        check_percent(q)?;
        let n = self.capacity.len();
        let key = self.seed ^ BOOTSTRAP_SALT;
        let values: Vec<f64> = (0..resamples)
            .into_par_iter()
            .map(|b| {
                let mut rng = substream(key, b as u64);
                let mut sample: Vec<f64> = (0..n).map(|_| self.capacity[rng.random_range(0..n)]).collect();
                quantile_of(&mut sample, q)
            })
            .collect();
        let m = values.iter().sum::<f64>() / resamples as f64;
        let var = values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (resamples as f64 - 1.0).max(1.0);
        Ok(var.sqrt())
    }
}

fn check_percent(q: f64) -> Result<()> {
    if !(q > 0.0 && q < 100.0) {
        return Err(Error::invalid("q", format!("quantile must lie in (0, 100), got {q}")));
    }
    Ok(())
}

/// Smallest sample `x` with at least `q` percent of the samples `<= x`.
fn quantile_of(samples: &mut [f64], q: f64) -> f64 {
    let n = samples.len();
    let rank = ((q / 100.0) * n as f64).ceil() as usize;
    let idx = rank.clamp(1, n) - 1;
    let (_, x, _) = samples.select_nth_unstable_by(idx, f64::total_cmp);
    *x
}

fn check_samples(n: usize) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::invalid(
            "n_samples",
            format!("need at least {MIN_SAMPLES} samples, got {n}"),
        ));
    }
    Ok(())
}

/// Draw `n` i.i.d. realizations. Chunk `c` uses substream `c` of `seed`, and
/// results are concatenated in chunk order, so the output does not depend
/// on the number of worker threads.
pub fn capacity_draws(
    scenario: &CapacityScenario,
    v: &WeightVector,
    cfg: &ArrayConfig,
    n_samples: usize,
    seed: u64,
) -> Result<CapacityDraws> {
    v.check_len(cfg)?;
    check_samples(n_samples)?;
    let w = v.as_slice();
    let (a, b) = scenario.signal_segment();
    let segments = scenario.interference_segments();
    let out_len: f64 = segments.iter().map(|(x, y)| y - x).sum();
    let powers = &scenario.interferer_powers;

    let parts: Vec<Vec<(f64, f64)>> = chunks(n_samples)
        .into_par_iter()
        .enumerate()
        .map(|(c, (_, len))| {
            let mut rng = substream(seed, c as u64);
            (0..len)
                .map(|_| {
                    let x0 = a + (b - a) * rng.random::<f64>();
                    let signal = scenario.signal_power * gain_unchecked(w, cfg, scenario.to_phase(x0));
                    let mut interference = 0.0;
                    for p in powers {
                        let x = draw_from(&segments, out_len, rng.random::<f64>());
                        interference += p * gain_unchecked(w, cfg, scenario.to_phase(x));
                    }
                    ((1.0 + signal / (scenario.noise + interference)).log2(), interference)
                })
                .collect()
        })
        .collect();

    let mut capacity = Vec::with_capacity(n_samples);
    let mut interference = Vec::with_capacity(n_samples);
    for (c, i) in parts.into_iter().flatten() {
        capacity.push(c);
        interference.push(i);
    }
    Ok(CapacityDraws {
        capacity,
        interference,
        seed,
    })
}

/// Monte Carlo mean capacity with its standard error.
pub fn mean_capacity_mc(
    scenario: &CapacityScenario,
    v: &WeightVector,
    cfg: &ArrayConfig,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    Ok(capacity_draws(scenario, v, cfg, n_samples, seed)?.mean())
}

/// Mean gain over the signal region (`e_in`) and over the interference
/// region (`e_out`), in the scenario's sampling variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionEnergies {
    pub e_in: f64,
    /// NaN when the interference region is empty.
    pub e_out: f64,
}

/// Closed-form region averages of the gain from concentration matrices:
/// `e_in = v A_sig v^H / |signal region|` and
/// `e_out = v (A_visible - A_sig) v^H / |interference region|`.
pub fn region_energies(scenario: &CapacityScenario, v: &WeightVector, cfg: &ArrayConfig) -> Result<RegionEnergies> {
    v.check_len(cfg)?;
    let w = v.as_slice();
    let (a, b) = scenario.signal_segment();
    let (inside, total, full_len) = match scenario.domain {
        SamplingDomain::Phase => {
            let r = &scenario.signal_region;
            (
                interval_matrix_raw(cfg, r.lower(), r.upper()).quadratic_form(w),
                interval_matrix_raw(cfg, -1.0, 1.0).quadratic_form(w),
                2.0,
            )
        }
        SamplingDomain::Angular => (
            angular_concentration_matrix(cfg, a, b)?.quadratic_form(w),
            angular_concentration_matrix(cfg, 0.0, PI)?.quadratic_form(w),
            PI,
        ),
    };
    let in_len = b - a;
    let out_len = full_len - in_len;
    Ok(RegionEnergies {
        e_in: inside / in_len,
        e_out: if out_len > 0.0 { (total - inside) / out_len } else { f64::NAN },
    })
}

fn interference_mean(scenario: &CapacityScenario, energies: &RegionEnergies) -> f64 {
    let total = scenario.total_interference();
    if total == 0.0 {
        0.0
    } else {
        total * energies.e_out
    }
}

/// `log2(1 + P_s e_in / (N0 + sum_n P_n e_out))`.
pub fn capacity_approximation(scenario: &CapacityScenario, v: &WeightVector, cfg: &ArrayConfig) -> Result<f64> {
    let e = region_energies(scenario, v, cfg)?;
    Ok(approximation_from(scenario, &e))
}

fn approximation_from(scenario: &CapacityScenario, e: &RegionEnergies) -> f64 {
    (1.0 + scenario.signal_power * e.e_in / (scenario.noise + interference_mean(scenario, e))).log2()
}

/// The approximation for broadside Slepian weights at half-wavelength
/// spacing, written through `lambda = lambda_max(A(W))`:
/// `e_in = lambda / 2W`, `e_out = (2 - lambda) / (2 (1 - W))`.
pub fn slepian_approximation_closed_form(scenario: &CapacityScenario, lambda: f64) -> f64 {
    let w = scenario.signal_region.half_width();
    let e_in = lambda / (2.0 * w);
    let e_out = (2.0 - lambda) / (2.0 * (1.0 - w));
    let total = scenario.total_interference();
    let i = if total == 0.0 { 0.0 } else { total * e_out };
    (1.0 + scenario.signal_power * e_in / (scenario.noise + i)).log2()
}

/// `E{1 / (N0 + I)}` by quadrature for a single interferer.
fn inverse_interference_quadrature(scenario: &CapacityScenario, w: &[num_complex::Complex64], cfg: &ArrayConfig) -> Result<f64> {
    let p = scenario.interferer_powers[0];
    let segments = scenario.interference_segments();
    let len: f64 = segments.iter().map(|(a, b)| b - a).sum();
    let mut acc = 0.0;
    for &(a, b) in &segments {
        acc += quadrature::integrate(
            |x| 1.0 / (scenario.noise + p * gain_unchecked(w, cfg, scenario.to_phase(x))),
            a,
            b,
            1e-12 * len / scenario.noise,
        )?;
    }
    Ok(acc / len)
}

/// Jensen upper bound `log2(1 + E{S} E{1/(N0 + I)})` with `E{S} = P_s e_in`.
///
/// `E{1/(N0 + I)}` is exact without interference, by quadrature with one
/// interferer, and otherwise estimated from the same draws as
/// [`mean_capacity_mc`] with the same seed. The estimate is
/// `1/(N0 + E{I}) + [mean(1/(N0 + I_k)) - 1/(N0 + mean(I_k))]`: the exact
/// Jensen point plus the sample Jensen gap, which is never negative, so the
/// bound never falls below the approximation.
pub fn capacity_upper_bound(
    scenario: &CapacityScenario,
    v: &WeightVector,
    cfg: &ArrayConfig,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    let e = region_energies(scenario, v, cfg)?;
    let draws = if scenario.interferer_powers.len() > 1 && scenario.total_interference() > 0.0 {
        Some(capacity_draws(scenario, v, cfg, n_samples, seed)?)
    } else {
        check_samples(n_samples)?;
        None
    };
    upper_bound_from(scenario, v, cfg, &e, draws.as_ref())
}

fn upper_bound_from(
    scenario: &CapacityScenario,
    v: &WeightVector,
    cfg: &ArrayConfig,
    e: &RegionEnergies,
    draws: Option<&CapacityDraws>,
) -> Result<f64> {
    let es = scenario.signal_power * e.e_in;
    let n0 = scenario.noise;
    let inverse = if scenario.total_interference() == 0.0 {
        1.0 / n0
    } else if scenario.interferer_powers.len() == 1 {
        inverse_interference_quadrature(scenario, v.as_slice(), cfg)?
    } else {
        let d = draws.expect("draws are required with several interferers");
        let n = d.interference.len() as f64;
        let mean_inv = d.interference.iter().map(|i| 1.0 / (n0 + i)).sum::<f64>() / n;
        let mean_i = d.interference.iter().sum::<f64>() / n;
        let gap = (mean_inv - 1.0 / (n0 + mean_i)).max(0.0);
        1.0 / (n0 + interference_mean(scenario, e)) + gap
    };
    Ok((1.0 + es * inverse).log2())
}

/// Lower bound with a flag for in-band nulls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBound {
    /// The bound, or `0` when `E{1/S}` diverges.
    pub value: f64,
    /// Set when the gain has a zero in the signal region.
    pub divergent: bool,
}

/// Jensen lower bound `log2(1 + (1 / E{1/S}) / (E{I} + N0))`.
///
/// `E{1/S}` is integrated numerically after scanning the signal region for
/// nulls of the gain; a null (or a failed integration) makes the integral
/// divergent and the trivial bound `0` is returned with the flag set.
pub fn capacity_lower_bound(scenario: &CapacityScenario, v: &WeightVector, cfg: &ArrayConfig) -> Result<LowerBound> {
    let e = region_energies(scenario, v, cfg)?;
    Ok(lower_bound_from(scenario, v, cfg, &e))
}

fn lower_bound_from(scenario: &CapacityScenario, v: &WeightVector, cfg: &ArrayConfig, e: &RegionEnergies) -> LowerBound {
    let divergent = LowerBound {
        value: 0.0,
        divergent: true,
    };
    let w = v.as_slice();
    let (a, b) = scenario.signal_segment();
    let g = |x: f64| gain_unchecked(w, cfg, scenario.to_phase(x));
    let (g_min, g_max) = in_band_gain_range(&g, a, b);
    if !(g_min > NULL_THRESHOLD * g_max) {
        return divergent;
    }
    let ps = scenario.signal_power;
    let len = b - a;
    let tol = 1e-10 * len / (ps * g_max);
    let Ok(integral) = quadrature::integrate(|x| 1.0 / (ps * g(x)), a, b, tol) else {
        return divergent;
    };
    let inverse_signal = integral / len;
    let value = (1.0 + (1.0 / inverse_signal) / (interference_mean(scenario, e) + scenario.noise)).log2();
    LowerBound {
        value,
        divergent: false,
    }
}

/// Minimum and maximum of `g` on `[a, b]`: a grid scan, with each grid
/// minimum refined by golden-section search.
fn in_band_gain_range(g: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let grid = uniform_grid(NULL_SCAN_POINTS, a, b);
    let vals: Vec<f64> = grid.iter().map(|&x| g(x)).collect();
    let g_max = vals.iter().copied().fold(0.0, f64::max);
    let mut g_min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let last = vals.len() - 1;
    for i in 0..=last {
        let left = if i == 0 { f64::INFINITY } else { vals[i - 1] };
        let right = if i == last { f64::INFINITY } else { vals[i + 1] };
        if vals[i] <= left && vals[i] <= right {
            let lo = grid[i.saturating_sub(1)];
            let hi = grid[(i + 1).min(last)];
            g_min = g_min.min(golden_min(g, lo, hi));
        }
    }
    (g_min, g_max)
}

fn golden_min(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..100 {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
        if b - a <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
    }
    gc.min(gd).min(g(a)).min(g(b))
}

/// Empirical `q`-percent outage capacity.
pub fn outage_capacity_mc(
    scenario: &CapacityScenario,
    v: &WeightVector,
    cfg: &ArrayConfig,
    q: f64,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    check_percent(q)?;
    capacity_draws(scenario, v, cfg, n_samples, seed)?.quantile(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutageEstimate {
    pub q: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityEstimates {
    pub mean_mc: McEstimate,
    pub upper_bound: f64,
    pub lower_bound: LowerBound,
    pub approximation: f64,
    pub outage: Vec<OutageEstimate>,
}

/// All estimates from one set of draws.
pub fn estimate_all(
    scenario: &CapacityScenario,
    v: &WeightVector,
    cfg: &ArrayConfig,
    n_samples: usize,
    seed: u64,
    quantiles: &[f64],
) -> Result<CapacityEstimates> {
    let draws = capacity_draws(scenario, v, cfg, n_samples, seed)?;
    let e = region_energies(scenario, v, cfg)?;
    let outage = quantiles
        .iter()
        .map(|&q| {
            Ok(OutageEstimate {
                q,
                value: draws.quantile(q)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CapacityEstimates {
        mean_mc: draws.mean(),
        upper_bound: upper_bound_from(scenario, v, cfg, &e, Some(&draws))?,
        lower_bound: lower_bound_from(scenario, v, cfg, &e),
        approximation: approximation_from(scenario, &e),
        outage,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderingReport {
    pub estimates: CapacityEstimates,
    pub checks: Vec<Check>,
}

impl OrderingReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

fn geq(a: f64, b: f64) -> bool {
    a >= b - ORDER_SLACK * (a.abs().max(b.abs()).max(1.0))
}

/// Compute all four quantities and check `UB >= approx >= LB`,
/// `LB - 3 sigma <= mean <= UB + 3 sigma`, and that the approximation is
/// at least as close to the mean as the farther bound (within `3 sigma`).
pub fn verify_ordering(
    scenario: &CapacityScenario,
    v: &WeightVector,
    cfg: &ArrayConfig,
    n_samples: usize,
    seed: u64,
) -> Result<OrderingReport> {
    let est = estimate_all(scenario, v, cfg, n_samples, seed, &[])?;
    let (ub, c, lb) = (est.upper_bound, est.approximation, est.lower_bound.value);
    let mean = est.mean_mc.mean;
    let s3 = 3.0 * est.mean_mc.stderr;
    let checks = vec![
        Check {
            name: "ub>=approx".into(),
            passed: geq(ub, c),
            detail: format!("ub={ub} approx={c}"),
        },
        Check {
            name: "approx>=lb".into(),
            passed: geq(c, lb),
            detail: format!("approx={c} lb={lb} divergent={}", est.lower_bound.divergent),
        },
        Check {
            name: "mean<=ub+3sigma".into(),
            passed: geq(ub + s3, mean),
            detail: format!("mean={mean} ub={ub} 3sigma={s3}"),
        },
        Check {
            name: "mean>=lb-3sigma".into(),
            passed: geq(mean, lb - s3),
            detail: format!("mean={mean} lb={lb} 3sigma={s3}"),
        },
        Check {
            name: "approx-closeness".into(),
            passed: geq((ub - mean).abs().max((mean - lb).abs()) + s3, (c - mean).abs()),
            detail: format!(
                "|approx-mean|={} |ub-mean|={} |mean-lb|={}",
                (c - mean).abs(),
                (ub - mean).abs(),
                (mean - lb).abs()
            ),
        },
    ];
    Ok(OrderingReport { estimates: est, checks })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub synthesizer: String,
    /// `W` for Slepian rows, attenuation in dB for Chebyshev rows.
    pub param: Option<f64>,
    pub mean: f64,
    pub stderr: f64,
    pub ub: f64,
    pub lb: f64,
    pub lb_divergent: bool,
    pub approx: f64,
    pub outage50: f64,
}

fn comparison_row(
    name: &str,
    param: Option<f64>,
    scenario: &CapacityScenario,
    v: &WeightVector,
    cfg: &ArrayConfig,
    n_samples: usize,
    seed: u64,
) -> Result<ComparisonRow> {
    let est = estimate_all(scenario, v, cfg, n_samples, seed, &[50.0])?;
    Ok(ComparisonRow {
        synthesizer: name.to_string(),
        param,
        mean: est.mean_mc.mean,
        stderr: est.mean_mc.stderr,
        ub: est.upper_bound,
        lb: est.lower_bound.value,
        lb_divergent: est.lower_bound.divergent,
        approx: est.approximation,
        outage50: est.outage[0].value,
    })
}

/// Capacity table across synthesizers.
///
/// Slepian rows use weights designed for each `W` in `w_grid` and a signal
/// region of that half-width (same center as `scenario`); DFT, binomial and
/// the Chebyshev sweep are evaluated in `scenario` as given. All rows share
/// the seed, so they see the same random draws. Baselines are steered to the
/// scenario's center.
pub fn compare_synthesizers(
    cfg: &ArrayConfig,
    scenario: &CapacityScenario,
    w_grid: &[f64],
    chebyshev_att_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<ComparisonRow>> {
    check_samples(n_samples)?;
    let center = scenario.signal_region.center();
    let m = cfg.elements();
    let mut rows = Vec::with_capacity(w_grid.len() + chebyshev_att_grid.len() + 2);
    for &w in w_grid {
        let design = slepian_weights(cfg, w)?;
        let v = apply_phase_ramp(&design.weights, cfg, center);
        let sc = scenario.with_region(PhaseRegion::new(center, w)?)?;
        rows.push(comparison_row("slepian", Some(w), &sc, &v, cfg, n_samples, seed)?);
    }
    let dft = apply_phase_ramp(&dft_weights(m)?, cfg, center);
    rows.push(comparison_row("dft", None, scenario, &dft, cfg, n_samples, seed)?);
    let binomial = apply_phase_ramp(&binomial_weights(m)?, cfg, center);
    rows.push(comparison_row("binomial", None, scenario, &binomial, cfg, n_samples, seed)?);
    for &att in chebyshev_att_grid {
        let v = apply_phase_ramp(&chebyshev_weights(m, att)?, cfg, center);
        rows.push(comparison_row("chebyshev", Some(att), scenario, &v, cfg, n_samples, seed)?);
    }
    Ok(rows)
}

/// CSV with header `synthesizer,param,mean,stderr,ub,lb,approx,outage50`.
/// `param` is empty for DFT and binomial rows; a divergent lower bound is
/// written as `0`.
pub fn write_comparison_csv<W: Write>(out: &mut W, rows: &[ComparisonRow], digits: usize) -> Result<()> {
    writeln!(out, "synthesizer,param,mean,stderr,ub,lb,approx,outage50")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.synthesizer,
            r.param.map(|p| fmt_float(p, digits)).unwrap_or_default(),
            fmt_float(r.mean, digits),
            fmt_float(r.stderr, digits),
            fmt_float(r.ub, digits),
            fmt_float(r.lb, digits),
            fmt_float(r.approx, digits),
            fmt_float(r.outage50, digits)
        )?;
    }
    Ok(())
}
