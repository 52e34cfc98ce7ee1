//! `slepbeam` command-line front end.
//!
//! Exit codes: 0 success, 1 failed verification, 2 usage or validation error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use slepian_array::array_model::{band_power, sample_pattern, uniform_grid, write_pattern_csv, ArrayConfig, WeightVector};
use slepian_array::capacity::{
    compare_synthesizers, write_comparison_csv, CapacityScenario, SamplingDomain, DEFAULT_INTERFERERS,
};
use slepian_array::codebook::{build_codebook, load_codebook, save_codebook, Codebook};
use slepian_array::concentration::PhaseRegion;
use slepian_array::synthesizers::{
    apply_phase_ramp, binomial_weights, chebyshev_weights, dft_weights, read_weights_csv, slepian_weights,
    slepian_weights_general, steer_result, weight_symmetry_class, write_weights_csv, SynthesisResult,
};
use slepian_array::verify::{run_all, Perturbation, VerifyOptions};
use slepian_array::{Complex64, Error};

const OUT_DIR_VAR: &str = "SLEPBEAM_OUT_DIR";

#[derive(Parser)]
#[command(name = "slepbeam", version, about = "Slepian beam synthesis for uniform linear arrays")]
struct Cli {
    /// Output format (default: csv for tables, json for structured files).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Significant digits for floating-point output.
    #[arg(long, global = true, default_value_t = 17)]
    precision: usize,
    /// Directory for outputs without an explicit path.
    #[arg(long, global = true, env = OUT_DIR_VAR)]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Design a weight vector and write it with a JSON summary on stdout.
    Synthesize {
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sample the pattern of a weights file or a fresh design.
    Pattern {
        #[command(flatten)]
        design: DesignArgs,
        /// Weights file (CSV or JSON) instead of a design.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, default_value_t = 2001)]
        points: usize,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        to: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Capacity comparison table across synthesizers.
    Capacity(CapacityArgs),
    /// Build a codebook, or re-check a saved one.
    Codebook {
        #[arg(long)]
        elements: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        spacing: f64,
        #[arg(long)]
        regions: Option<usize>,
        /// Reload and re-check this codebook file instead of building one.
        #[arg(long)]
        validate: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the invariant suites; exits 1 if any check fails.
    Verify {
        #[arg(long, default_value_t = 12)]
        max_elements: usize,
        #[arg(long, default_value_t = 200)]
        vectors: usize,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, default_value_t = 5)]
        ordering_vectors: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Test hook: perturb one entry of every definiteness-suite matrix.
        #[arg(long)]
        perturb: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Synth {
    Slepian,
    Dft,
    Binomial,
    Chebyshev,
}

#[derive(Args)]
struct DesignArgs {
    #[arg(long)]
    elements: Option<usize>,
    /// Element spacing in wavelengths.
    #[arg(long, default_value_t = 0.5)]
    spacing: f64,
    #[arg(long = "type", value_enum, default_value_t = Synth::Slepian)]
    synth: Synth,
    /// Half-width W of the target band in `s = cos(theta)`.
    #[arg(long)]
    half_width: Option<f64>,
    /// Band center `s_c`.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    center: f64,
    /// Chebyshev sidelobe attenuation in dB.
    #[arg(long, default_value_t = 30.0)]
    sidelobe_db: f64,
    /// Use the generalized solver that accounts for the visible region.
    #[arg(long)]
    general: bool,
}

#[derive(Args)]
struct CapacityArgs {
    #[arg(long, default_value_t = 5)]
    elements: usize,
    #[arg(long, default_value_t = 0.5)]
    spacing: f64,
    #[arg(long, default_value_t = 1.0)]
    ps: f64,
    #[arg(long, default_value_t = 0.6)]
    pi_total: f64,
    #[arg(long, default_value_t = 0.1)]
    n0: f64,
    #[arg(long, default_value_t = DEFAULT_INTERFERERS)]
    interferers: usize,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Half-width of the signal region used for the baselines.
    #[arg(long, default_value_t = 0.2)]
    half_width: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    center: f64,
    #[arg(long, value_enum, default_value_t = Domain::Phase)]
    domain: Domain,
    /// Slepian half-widths (comma separated); default k/50 for k = 1..49 and 0.99.
    #[arg(long, value_delimiter = ',')]
    w_grid: Option<Vec<f64>>,
    /// Chebyshev attenuations in dB (comma separated); default 10, 12, ..., 48.
    #[arg(long, value_delimiter = ',')]
    att_grid: Option<Vec<f64>>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Domain {
    Phase,
    Angular,
}

/// Default Slepian grid for capacity tables.
fn default_w_grid() -> Vec<f64> {
    (1..50).map(|k| k as f64 / 50.0).chain([0.99]).collect()
}

/// Default Chebyshev sweep for capacity tables.
fn default_att_grid() -> Vec<f64> {
    (0..20).map(|k| 10.0 + 2.0 * k as f64).collect()
}

enum Failure {
    Usage(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

struct Output {
    format: Option<Format>,
    digits: usize,
    dir: Option<PathBuf>,
}

impl Output {
    fn path(&self, explicit: Option<PathBuf>, default_name: &str) -> CliResult<PathBuf> {
        if let Some(p) = explicit {
            return Ok(p);
        }
        let dir = self.dir.clone().unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
        Ok(dir.join(default_name))
    }

    fn json(&self) -> bool {
        self.format == Some(Format::Json)
    }

    /// Round every float in `v` to the requested significant digits.
    fn round(&self, v: Value) -> Value {
        match v {
            Value::Number(n) if n.is_f64() && self.digits < 17 => {
                let x = n.as_f64().unwrap_or_default();
                let r: f64 = format!("{:.*e}", self.digits.max(1) - 1, x).parse().unwrap_or(x);
                json!(r)
            }
            Value::Array(a) => Value::Array(a.into_iter().map(|x| self.round(x)).collect()),
            Value::Object(o) => Value::Object(o.into_iter().map(|(k, x)| (k, self.round(x))).collect()),
            other => other,
        }
    }

    fn print(&self, v: Value) {
        let text = serde_json::to_string_pretty(&self.round(v)).expect("json value serializes");
        let _ = writeln!(std::io::stdout().lock(), "{text}");
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn array_config(elements: Option<usize>, spacing: f64) -> CliResult<ArrayConfig> {
    match elements {
        Some(m) => Ok(ArrayConfig::new(m, spacing)?),
        None => usage("--elements is required"),
    }
}

struct Design {
    config: ArrayConfig,
    weights: WeightVector,
    summary: Value,
    region: Option<PhaseRegion>,
}

fn slepian_summary(r: &SynthesisResult, symmetry: Option<String>) -> Value {
    json!({
        "lambda_max": r.lambda_max,
        "eigengap": r.eigengap,
        "quotient": r.quotient,
        "symmetry_class": symmetry,
        "region": {"center": r.region.center(), "half_width": r.region.half_width()},
        "warnings": r.warnings,
    })
}

fn design(args: &DesignArgs) -> CliResult<Design> {
    let cfg = array_config(args.elements, args.spacing)?;
    let m = cfg.elements();
    let c = args.center;
    if !c.is_finite() {
        return usage(format!("--center must be finite, got {c}"));
    }
    let (weights, mut summary, region) = match args.synth {
        Synth::Slepian => {
            let Some(w) = args.half_width else {
                return usage("--half-width is required for --type slepian");
            };
            let result = if args.general {
                slepian_weights_general(&cfg, &PhaseRegion::new(c, w)?)?
            } else {
                let broadside = slepian_weights(&cfg, w)?;
                if c == 0.0 {
                    broadside
                } else {
                    steer_result(&broadside, c)?
                }
            };
            let symmetry = if c == 0.0 {
                Some(weight_symmetry_class(&result)?.to_string())
            } else {
                None
            };
            let summary = slepian_summary(&result, symmetry);
            (result.weights, summary, Some(result.region))
        }
        other => {
            let base = match other {
                Synth::Dft => dft_weights(m)?,
                Synth::Binomial => binomial_weights(m)?,
                _ => chebyshev_weights(m, args.sidelobe_db)?,
            };
            let region = match args.half_width {
                Some(w) => Some(PhaseRegion::new(c, w)?),
                None => None,
            };
            (apply_phase_ramp(&base, &cfg, c), json!({}), region)
        }
    };
    let name = match args.synth {
        Synth::Slepian => "slepian",
        Synth::Dft => "dft",
        Synth::Binomial => "binomial",
        Synth::Chebyshev => "chebyshev",
    };
    let obj = summary.as_object_mut().expect("summary is an object");
    obj.insert("type".into(), json!(name));
    obj.insert("elements".into(), json!(m));
    obj.insert("spacing".into(), json!(cfg.spacing_ratio()));
    obj.insert("center".into(), json!(c));
    if args.synth == Synth::Chebyshev {
        obj.insert("sidelobe_db".into(), json!(args.sidelobe_db));
    }
    Ok(Design {
        config: cfg,
        weights,
        summary,
        region,
    })
}

fn weights_json(v: &WeightVector) -> Value {
    Value::Array(v.as_slice().iter().map(|w| json!({"re": w.re, "im": w.im})).collect())
}

fn parse_weights(text: &str) -> CliResult<WeightVector> {
    if text.trim_start().starts_with('[') {
        let values: Vec<Value> = serde_json::from_str(text).map_err(|e| Failure::Usage(format!("bad weights JSON: {e}")))?;
        let mut w = Vec::with_capacity(values.len());
        for (k, v) in values.iter().enumerate() {
            match (v.get("re").and_then(Value::as_f64), v.get("im").and_then(Value::as_f64)) {
                (Some(re), Some(im)) => w.push(Complex64::new(re, im)),
                _ => return usage(format!("weight {k} needs numeric re and im")),
            }
        }
        Ok(WeightVector::new(w))
    } else {
        Ok(read_weights_csv(text)?)
    }
}

fn cmd_synthesize(out: &Output, args: DesignArgs, output: Option<PathBuf>) -> CliResult<()> {
    let d = design(&args)?;
    let json_out = out.json();
    let path = out.path(output, if json_out { "weights.json" } else { "weights.csv" })?;
    if json_out {
        let text = serde_json::to_string_pretty(&out.round(weights_json(&d.weights))).expect("weights serialize");
        write_file(&path, text.as_bytes())?;
    } else {
        let mut buf = Vec::new();
        write_weights_csv(&mut buf, &d.weights, out.digits)?;
        write_file(&path, &buf)?;
    }
    let mut summary = d.summary;
    summary["weights_file"] = json!(path.display().to_string());
    out.print(summary);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_pattern(
    out: &Output,
    args: DesignArgs,
    weights: Option<PathBuf>,
    points: usize,
    from: f64,
    to: f64,
    output: Option<PathBuf>,
) -> CliResult<()> {
    if points < 2 {
        return usage(format!("--points must be at least 2, got {points}"));
    }
    if !(from.is_finite() && to.is_finite() && from < to) {
        return usage(format!("need --from < --to, got [{from}, {to}]"));
    }
    let (cfg, v, region) = match weights {
        Some(path) => {
            let v = parse_weights(&read_file(&path)?)?;
            let cfg = ArrayConfig::new(args.elements.unwrap_or(v.len()), args.spacing)?;
            let region = match args.half_width {
                Some(w) => Some(PhaseRegion::new(args.center, w)?),
                None => None,
            };
            (cfg, v, region)
        }
        None => {
            let d = design(&args)?;
            (d.config, d.weights, d.region)
        }
    };
    let samples = sample_pattern(&v, &cfg, &uniform_grid(points, from, to))?;
    let json_out = out.json();
    let path = out.path(output, if json_out { "pattern.json" } else { "pattern.csv" })?;
    if json_out {
        let rows: Vec<Value> = samples
            .iter()
            .map(|p| json!({"s": p.s, "theta_rad": p.theta, "af_re": p.af.re, "af_im": p.af.im, "gain": p.gain}))
            .collect();
        let text = serde_json::to_string_pretty(&out.round(Value::Array(rows))).expect("pattern serializes");
        write_file(&path, text.as_bytes())?;
    } else {
        let mut buf = Vec::new();
        write_pattern_csv(&mut buf, &samples, out.digits)?;
        write_file(&path, &buf)?;
    }
    let total = band_power(&v, &cfg, -1.0, 1.0)?;
    let mut summary = json!({
        "points": points,
        "visible_power": total,
        "pattern_file": path.display().to_string(),
    });
    if let Some(r) = region {
        let (a, b) = (r.lower().max(-1.0), r.upper().min(1.0));
        let inside = if a < b { band_power(&v, &cfg, a, b)? } else { 0.0 };
        summary["in_band_power"] = json!(inside);
        summary["in_band_fraction"] = json!(inside / total);
    }
    out.print(summary);
    Ok(())
}

fn cmd_capacity(out: &Output, a: CapacityArgs) -> CliResult<()> {
    let cfg = ArrayConfig::new(a.elements, a.spacing)?;
    let region = PhaseRegion::new(a.center, a.half_width)?;
    let domain = match a.domain {
        Domain::Phase => SamplingDomain::Phase,
        Domain::Angular => SamplingDomain::Angular,
    };
    if a.interferers == 0 && a.pi_total != 0.0 {
        return usage("--interferers must be positive when --pi-total is nonzero");
    }
    let scenario =
        CapacityScenario::equal_interferers(a.ps, a.pi_total, a.interferers, a.n0, region)?.with_domain(domain);
    let w_grid = a.w_grid.unwrap_or_else(default_w_grid);
    let att_grid = a.att_grid.unwrap_or_else(default_att_grid);
    let rows = compare_synthesizers(&cfg, &scenario, &w_grid, &att_grid, a.samples, a.seed)?;
    let json_out = out.json();
    let path = out.path(a.output, if json_out { "capacity.json" } else { "capacity.csv" })?;
    if json_out {
        let v = serde_json::to_value(&rows).expect("rows serialize");
        let text = serde_json::to_string_pretty(&out.round(v)).expect("rows serialize");
        write_file(&path, text.as_bytes())?;
    } else {
        let mut buf = Vec::new();
        write_comparison_csv(&mut buf, &rows, out.digits)?;
        write_file(&path, &buf)?;
    }
    let best = |name: &str| {
        rows.iter()
            .filter(|r| r.synthesizer == name)
            .max_by(|x, y| x.mean.total_cmp(&y.mean))
            .map(|r| json!({"param": r.param, "mean": r.mean, "stderr": r.stderr}))
    };
    out.print(json!({
        "seed": a.seed,
        "samples": a.samples,
        "scenario": scenario,
        "rows": rows.len(),
        "best_slepian": best("slepian"),
        "best_chebyshev": best("chebyshev"),
        "table_file": path.display().to_string(),
    }));
    Ok(())
}

fn codebook_summary(book: &Codebook) -> Value {
    json!({
        "elements": book.config().elements(),
        "spacing": book.config().spacing_ratio(),
        "regions": book.regions().iter().map(|r| json!({"center": r.center(), "half_width": r.half_width()})).collect::<Vec<_>>(),
        "codewords": book.len(),
        "metadata": book.metadata(),
    })
}

fn cmd_codebook(
    out: &Output,
    elements: Option<usize>,
    spacing: f64,
    regions: Option<usize>,
    validate: Option<PathBuf>,
    output: Option<PathBuf>,
) -> CliResult<()> {
    if let Some(path) = validate {
        let book = load_codebook(&path)?;
        let mut summary = codebook_summary(&book);
        summary["valid"] = json!(true);
        out.print(summary);
        return Ok(());
    }
    if out.format == Some(Format::Csv) {
        return usage("codebooks are written as JSON only");
    }
    let cfg = array_config(elements, spacing)?;
    let Some(k) = regions else {
        return usage("--regions is required unless --validate is given");
    };
    let book = build_codebook(&cfg, k)?;
    let path = out.path(output, "codebook.json")?;
    save_codebook(&book, &path)?;
    let mut summary = codebook_summary(&book);
    summary["codebook_file"] = json!(path.display().to_string());
    out.print(summary);
    Ok(())
}

fn cmd_verify(out: &Output, opts: VerifyOptions, output: Option<PathBuf>) -> CliResult<()> {
    let report = run_all(&opts)?;
    let json_out = out.json();
    let body = if json_out {
        let v = serde_json::to_value(&report).expect("report serializes");
        serde_json::to_string_pretty(&out.round(v)).expect("report serializes").into_bytes()
    } else {
        let mut buf = Vec::new();
        report.write_csv(&mut buf, out.digits)?;
        buf
    };
    match output {
        Some(path) => write_file(&path, &body)?,
        None => {
            let _ = std::io::stdout().lock().write_all(&body);
        }
    }
    let failed = report.failures().count();
    eprintln!("{} checks, {failed} failed", report.checks.len());
    for c in report.failures() {
        eprintln!("FAIL [{}] {}: measured {:e}, expected {}", c.suite, c.name, c.measured, c.expected);
    }
    if failed > 0 {
        Err(Failure::Verification)
    } else {
        Ok(())
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let out = Output {
        format: cli.format,
        digits: cli.precision,
        dir: cli.out_dir,
    };
    if !(1..=17).contains(&out.digits) {
        return usage(format!("--precision must lie in 1..=17, got {}", out.digits));
    }
    match cli.command {
        Command::Synthesize { design, output } => cmd_synthesize(&out, design, output),
        Command::Pattern {
            design,
            weights,
            points,
            from,
            to,
            output,
        } => cmd_pattern(&out, design, weights, points, from, to, output),
        Command::Capacity(args) => cmd_capacity(&out, args),
        Command::Codebook {
            elements,
            spacing,
            regions,
            validate,
            output,
        } => cmd_codebook(&out, elements, spacing, regions, validate, output),
        Command::Verify {
            max_elements,
            vectors,
            samples,
            ordering_vectors,
            seed,
            perturb,
            output,
        } => {
            if max_elements < 2 {
                return usage(format!("--max-elements must be at least 2, got {max_elements}"));
            }
            let opts = VerifyOptions {
                max_elements,
                random_vectors: vectors,
                samples,
                ordering_vectors,
                seed,
                perturbation: perturb.then(Perturbation::default),
            };
            cmd_verify(&out, opts, output)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
