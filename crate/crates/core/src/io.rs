//! Plain-text number formatting shared by CSV writers.

/// Formats `x` with 17 significant digits in scientific notation.
///
/// Parsing the result with `str::parse::<f64>` gives back `x` bit for bit.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "NaN".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Joins values into one CSV row (no trailing newline).
pub fn csv_row(values: &[f64]) -> String {
    values.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(",")
}
