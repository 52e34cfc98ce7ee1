//! Codebooks: one steered Slepian codeword per phase region.
//!
//! The visible space `[-1, 1]` is tiled by equal-width regions. All codewords
//! come from one broadside design and differ only by a phase ramp.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array_model::{ArrayConfig, WeightVector};
use crate::concentration::PhaseRegion;
use crate::error::{Error, Result};
use crate::format::{fmt_float, DEFAULT_DIGITS};
use crate::synthesizers::{apply_phase_ramp, check_steering, slepian_weights};

/// Schema version written to and accepted from JSON.
pub const FORMAT_VERSION: u32 = 1;
/// Allowed deviation of a loaded codeword norm from one.
pub const NORM_TOLERANCE: f64 = 1e-12;
/// Allowed mismatch between neighbouring region edges in a loaded file.
pub const TILING_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodebookMetadata {
    pub synthesizer: String,
    pub tool_version: String,
}

impl Default for CodebookMetadata {
    fn default() -> Self {
        Self {
            synthesizer: "slepian".to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    config: ArrayConfig,
    regions: Vec<PhaseRegion>,
    codewords: Vec<WeightVector>,
    metadata: CodebookMetadata,
}

impl Codebook {
    pub fn config(&self) -> &ArrayConfig {
        &self.config
    }

    pub fn regions(&self) -> &[PhaseRegion] {
        &self.regions
    }

    pub fn codewords(&self) -> &[WeightVector] {
        &self.codewords
    }

    pub fn metadata(&self) -> &CodebookMetadata {
        &self.metadata
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// Re-check exact tiling and every codeword against its region.
    pub fn validate(&self) -> Result<()> {
        check_tiling(&self.regions)?;
        if self.codewords.len() != self.regions.len() {
            return Err(Error::InvalidCodebook(format!(
                "{} regions but {} codewords",
                self.regions.len(),
                self.codewords.len()
            )));
        }
        for (k, v) in self.codewords.iter().enumerate() {
            check_codeword(k, v, &self.config)?;
        }
        Ok(())
    }

    /// JSON text with fixed field order and 17 significant digits.
    pub fn to_json(&self) -> String {
        let f = |x: f64| fmt_float(x, DEFAULT_DIGITS);
        let mut out = String::new();
        let _ = write!(
            out,
            "{{\"version\":{FORMAT_VERSION},\"M\":{},\"d_over_lambda\":{},\n\"regions\":[",
            self.config.elements(),
            f(self.config.spacing_ratio())
        );
        for (k, r) in self.regions.iter().enumerate() {
            let sep = if k == 0 { "\n" } else { ",\n" };
            let _ = write!(out, "{sep}{{\"center\":{},\"half_width\":{}}}", f(r.center()), f(r.half_width()));
        }
        out.push_str("],\n\"codewords\":[");
        for (k, v) in self.codewords.iter().enumerate() {
            out.push_str(if k == 0 { "\n[" } else { ",\n[" });
            for (m, w) in v.as_slice().iter().enumerate() {
                if m > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{{\"re\":{},\"im\":{}}}", f(w.re), f(w.im));
            }
            out.push(']');
        }
        let meta = serde_json::to_string(&self.metadata).expect("metadata serializes");
        let _ = writeln!(out, "],\n\"metadata\":{meta}}}");
        out
    }

    /// Parse and validate a codebook. Region edges that agree within
    /// [`TILING_TOLERANCE`] are snapped to shared values.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawCodebook = serde_json::from_str(text).map_err(|e| Error::Parse {
            offset: if e.is_eof() {
                text.len()
            } else {
                byte_offset(text, e.line(), e.column())
            },
            message: e.to_string(),
        })?;
        if raw.version != FORMAT_VERSION {
            return Err(Error::InvalidCodebook(format!(
                "unsupported version {} (expected {FORMAT_VERSION})",
                raw.version
            )));
        }
        let config = ArrayConfig::new(raw.m, raw.d_over_lambda)?;
        if raw.regions.is_empty() {
            return Err(Error::InvalidCodebook("no regions".into()));
        }
        let regions = snap_regions(&raw.regions)?;
        let codewords: Vec<WeightVector> = raw
            .codewords
            .into_iter()
            .map(|cw| WeightVector::new(cw.into_iter().map(|c| Complex64::new(c.re, c.im)).collect()))
            .collect();
        let book = Self {
            config,
            regions,
            codewords,
            metadata: raw.metadata.unwrap_or_default(),
        };
        book.validate()?;
        Ok(book)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCodebook {
    version: u32,
    #[serde(rename = "M")]
    m: usize,
    d_over_lambda: f64,
    regions: Vec<RawRegion>,
    codewords: Vec<Vec<RawComplex>>,
    #[serde(default)]
    metadata: Option<CodebookMetadata>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegion {
    center: f64,
    half_width: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComplex {
    re: f64,
    im: f64,
}

/// Byte offset of a 1-based (line, column) position; line 0 means the end.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return text.len();
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

fn snap_regions(raw: &[RawRegion]) -> Result<Vec<PhaseRegion>> {
    let n = raw.len();
    let mut edges = Vec::with_capacity(n + 1);
    edges.push(raw[0].center - raw[0].half_width);
    for k in 0..n {
        let upper = raw[k].center + raw[k].half_width;
        if k + 1 < n {
            let next_lower = raw[k + 1].center - raw[k + 1].half_width;
            if (upper - next_lower).abs() > TILING_TOLERANCE {
                return Err(Error::InvalidCodebook(format!(
                    "regions {k} and {} do not meet: upper edge {upper} vs lower edge {next_lower}",
                    k + 1
                )));
            }
        }
        edges.push(upper);
    }
    for (k, want) in [(0, -1.0), (n, 1.0)] {
        if (edges[k] - want).abs() > TILING_TOLERANCE {
            return Err(Error::InvalidCodebook(format!(
                "tiling edge {k} is {} instead of {want}",
                edges[k]
            )));
        }
        edges[k] = want;
    }
    raw.iter()
        .enumerate()
        .map(|(k, r)| {
            PhaseRegion::with_snapped_bounds(r.center, r.half_width, edges[k], edges[k + 1])
                .map_err(|e| Error::InvalidCodebook(format!("region {k}: {e}")))
        })
        .collect()
}

fn check_tiling(regions: &[PhaseRegion]) -> Result<()> {
    let Some(first) = regions.first() else {
        return Err(Error::InvalidCodebook("no regions".into()));
    };
    if first.lower() != -1.0 || regions[regions.len() - 1].upper() != 1.0 {
        return Err(Error::InvalidCodebook(format!(
            "regions span [{}, {}] instead of [-1, 1]",
            first.lower(),
            regions[regions.len() - 1].upper()
        )));
    }
    for (k, pair) in regions.windows(2).enumerate() {
        if pair[0].upper() != pair[1].lower() {
            return Err(Error::InvalidCodebook(format!(
                "regions {k} and {} do not share an edge ({} vs {})",
                k + 1,
                pair[0].upper(),
                pair[1].lower()
            )));
        }
    }
    for (k, r) in regions.iter().enumerate() {
        if !(r.upper() > r.lower()) {
            return Err(Error::InvalidCodebook(format!("region {k} is empty")));
        }
    }
    Ok(())
}

fn check_codeword(k: usize, v: &WeightVector, cfg: &ArrayConfig) -> Result<()> {
    if v.len() != cfg.elements() {
        return Err(Error::InvalidCodebook(format!(
            "codeword {k} has {} weights, expected M = {}",
            v.len(),
            cfg.elements()
        )));
    }
    let norm = v.norm();
    if !((norm - 1.0).abs() <= NORM_TOLERANCE) {
        return Err(Error::InvalidCodebook(format!(
            "codeword {k} has norm {norm} (|norm - 1| = {:e} exceeds {NORM_TOLERANCE:e})",
            (norm - 1.0).abs()
        )));
    }
    Ok(())
}

/// Equal-width codebook with `n_regions` regions of half-width
/// `W = 1 / n_regions`. Region `k` spans `[(2k - n)/n, (2k + 2 - n)/n]`; the
/// codeword is the broadside design for `W` steered to the region center.
pub fn build_codebook(cfg: &ArrayConfig, n_regions: usize) -> Result<Codebook> {
    if n_regions == 0 {
        return Err(Error::invalid("n_regions", "need at least one region"));
    }
    let n = n_regions as f64;
    let edges: Vec<f64> = (0..=n_regions).map(|k| (2.0 * k as f64 - n) / n).collect();
    let regions = edges
        .windows(2)
        .map(|e| PhaseRegion::from_bounds(e[0], e[1]))
        .collect::<Result<Vec<_>>>()?;
    steered_codebook(cfg, regions, 1.0 / n)
}

/// Codebook for an explicit tiling of `[-1, 1]`; edges must match exactly.
/// Regions may differ in width, each gets its own design.
pub fn codebook_from_regions(cfg: &ArrayConfig, regions: Vec<PhaseRegion>) -> Result<Codebook> {
    check_tiling(&regions)?;
    let mut codewords = Vec::with_capacity(regions.len());
    for (k, r) in regions.iter().enumerate() {
        let w = r.half_width();
        check_steering(cfg, w, r.center()).map_err(|e| region_error(k, e))?;
        let design = slepian_weights(cfg, w).map_err(|e| region_error(k, e))?;
        codewords.push(apply_phase_ramp(&design.weights, cfg, r.center()));
    }
    Ok(Codebook {
        config: *cfg,
        regions,
        codewords,
        metadata: CodebookMetadata::default(),
    })
}

fn steered_codebook(cfg: &ArrayConfig, regions: Vec<PhaseRegion>, w: f64) -> Result<Codebook> {
    check_tiling(&regions)?;
    for (k, r) in regions.iter().enumerate() {
        check_steering(cfg, w, r.center()).map_err(|e| region_error(k, e))?;
    }
    let design = slepian_weights(cfg, w)?;
    let codewords = regions
        .iter()
        .map(|r| apply_phase_ramp(&design.weights, cfg, r.center()))
        .collect();
    Ok(Codebook {
        config: *cfg,
        regions,
        codewords,
        metadata: CodebookMetadata::default(),
    })
}

fn region_error(k: usize, e: Error) -> Error {
    match e {
        Error::SteeringLimit(msg) => Error::SteeringLimit(format!("region {k}: {msg}")),
        other => other,
    }
}

/// Index of the region containing `s`; a shared edge belongs to the lower
/// index.
pub fn best_codeword(book: &Codebook, s: f64) -> Result<usize> {
    if !(-1.0..=1.0).contains(&s) {
        return Err(Error::invalid("s", format!("must lie in [-1, 1], got {s}")));
    }
    book.regions
        .iter()
        .position(|r| r.contains(s))
        .ok_or_else(|| Error::InvalidCodebook(format!("no region contains s = {s}")))
}

pub fn save_codebook(book: &Codebook, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, book.to_json())?;
    Ok(())
}

pub fn load_codebook(path: impl AsRef<Path>) -> Result<Codebook> {
    Codebook::from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_model::{band_power, directivity_gain};
    use crate::concentration::concentration_matrix;
    use crate::linalg::eigh_symmetric;
    use rand::{Rng, SeedableRng};

    fn book5() -> Codebook {
        build_codebook(&ArrayConfig::half_wavelength(5).unwrap(), 5).unwrap()
    }

    #[test]
    fn five_regions() {
        let book = book5();
        assert_eq!(book.len(), 5);
        for (r, c) in book.regions().iter().zip([-0.8, -0.4, 0.0, 0.4, 0.8]) {
            assert!((r.center() - c).abs() < 1e-15);
            assert!((r.half_width() - 0.2).abs() < 1e-15);
        }
        assert!(book.codewords()[2].is_real());
        book.validate().unwrap();
    }

    #[test]
    fn tiling_is_exact() {
        for n in [2, 3, 5, 7, 10] {
            let book = build_codebook(&ArrayConfig::half_wavelength(8).unwrap(), n).unwrap();
            let r = book.regions();
            assert_eq!(r[0].lower(), -1.0);
            assert_eq!(r[n - 1].upper(), 1.0);
            for p in r.windows(2) {
                assert_eq!(p[0].upper().to_bits(), p[1].lower().to_bits());
            }
            let total: f64 = r.iter().map(|x| x.width()).sum();
            assert!((total - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn in_band_power_of_every_codeword() {
        let cfg = ArrayConfig::half_wavelength(5).unwrap();
        let a = concentration_matrix(&cfg, 0.2).unwrap().to_symmetric().unwrap();
        let lambda = eigh_symmetric(&a).unwrap().max_eigenvalue();
        let book = book5();
        for (r, v) in book.regions().iter().zip(book.codewords()) {
            let p = band_power(v, &cfg, r.lower(), r.upper()).unwrap();
            assert!((p - lambda).abs() < 1e-8, "{p} vs {lambda}");
        }
    }

    #[test]
    fn same_amplitude_profile_and_shifted_pattern() {
        let cfg = ArrayConfig::half_wavelength(5).unwrap();
        let book = book5();
        let center = &book.codewords()[2];
        for (r, v) in book.regions().iter().zip(book.codewords()) {
            for m in 0..5 {
                assert!((v[m].norm() - center[m].norm()).abs() < 1e-15);
            }
            for i in 0..=200 {
                let s = -1.0 + 0.01 * i as f64;
                let z = s - r.center();
                if z.abs() > 1.0 {
                    continue;
                }
                let a = directivity_gain(v, &cfg, s).unwrap().sqrt();
                let b = directivity_gain(center, &cfg, z).unwrap().sqrt();
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn selection() {
        let book = book5();
        assert_eq!(best_codeword(&book, -1.0).unwrap(), 0);
        assert_eq!(best_codeword(&book, 0.4).unwrap(), 3);
        assert_eq!(best_codeword(&book, 1.0).unwrap(), 4);
        let edge = book.regions()[1].upper();
        assert_eq!(best_codeword(&book, edge).unwrap(), 1);
        assert!(best_codeword(&book, 1.5).is_err());
    }

    #[test]
    fn containing_region_dominates_gain() {
        let cfg = ArrayConfig::half_wavelength(5).unwrap();
        let book = book5();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let n = 10_000;
        let mut hits = 0;
        for _ in 0..n {
            let s: f64 = rng.random_range(-1.0..=1.0);
            let k = best_codeword(&book, s).unwrap();
            let g: Vec<f64> = book.codewords().iter().map(|v| directivity_gain(v, &cfg, s).unwrap()).collect();
            if g.iter().all(|&x| g[k] >= x) {
                hits += 1;
            }
        }
        assert!(hits as f64 >= 0.95 * n as f64, "{hits}");
    }

    #[test]
    fn one_region_is_degenerate() {
        let r = build_codebook(&ArrayConfig::half_wavelength(5).unwrap(), 1);
        assert!(matches!(r, Err(Error::DegenerateWidth { .. })));
        assert!(build_codebook(&ArrayConfig::half_wavelength(5).unwrap(), 0).is_err());
    }

    #[test]
    fn edge_regions_beyond_grating_limit_are_named() {
        let cfg = ArrayConfig::new(5, 0.6).unwrap();
        match build_codebook(&cfg, 5) {
            Err(Error::SteeringLimit(msg)) => assert!(msg.starts_with("region 0:"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn json_round_trip() {
        let book = book5();
        let back = Codebook::from_json(&book.to_json()).unwrap();
        for (a, b) in book.codewords().iter().zip(back.codewords()) {
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
        for (a, b) in book.regions().iter().zip(back.regions()) {
            assert_eq!(a.center().to_bits(), b.center().to_bits());
            assert_eq!(a.half_width().to_bits(), b.half_width().to_bits());
        }
        assert_eq!(back.metadata(), book.metadata());
        assert!(book.to_json().starts_with("{\"version\":1,\"M\":5,\"d_over_lambda\":"));
    }

    #[test]
    fn truncated_json_reports_offset() {
        let text = book5().to_json();
        let cut = &text[..text.len() / 2];
        match Codebook::from_json(cut) {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, cut.len()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_norm_rejected() {
        let text = book5().to_json();
        let i = text.find("\"codewords\":[\n[{\"re\":").unwrap() + "\"codewords\":[\n[{\"re\":".len();
        let j = i + text[i..].find(',').unwrap();
        let edited = format!("{}5.0e-1{}", &text[..i], &text[j..]);
        match Codebook::from_json(&edited) {
            Err(Error::InvalidCodebook(msg)) => assert!(msg.contains("codeword 0 has norm"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gap_in_tiling_rejected() {
        let text = book5().to_json().replacen("\"half_width\":2.0000000000000001e-1", "\"half_width\":1.9e-1", 1);
        assert!(matches!(Codebook::from_json(&text), Err(Error::InvalidCodebook(_))));
    }

    #[test]
    fn explicit_regions() {
        let cfg = ArrayConfig::half_wavelength(6).unwrap();
        let regions = vec![
            PhaseRegion::from_bounds(-1.0, -0.5).unwrap(),
            PhaseRegion::from_bounds(-0.5, 0.5).unwrap(),
            PhaseRegion::from_bounds(0.5, 1.0).unwrap(),
        ];
        let book = codebook_from_regions(&cfg, regions).unwrap();
        book.validate().unwrap();
        let gap = vec![PhaseRegion::from_bounds(-1.0, 0.0).unwrap(), PhaseRegion::from_bounds(0.1, 1.0).unwrap()];
        assert!(codebook_from_regions(&cfg, gap).is_err());
    }
}
