//! Text formatting shared by the CSV and JSON writers.

/// Significant digits needed for a lossless `f64` round trip.
pub const DEFAULT_DIGITS: usize = 17;

/// Scientific notation with `digits` significant digits, e.g.
/// `4.4721359549995793e-1`. The output is valid JSON and parses back to the
/// same `f64` when `digits >= 17`.
pub fn fmt_float(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{:.*e}", digits - 1, x)
}
