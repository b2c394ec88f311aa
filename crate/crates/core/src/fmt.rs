//! Number formatting shared by the CSV and report writers.

/// Formats `value` in plain decimal with `digits` significant digits.
/// Magnitudes below 1e-15 print as `0`.
pub fn sig(value: f64, digits: usize) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    if value.abs() < 1e-15 {
        return "0".to_string();
    }
    let magnitude = value.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}
