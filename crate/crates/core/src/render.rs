//! Text rendering of reals for reports: 17 significant digits, so every value
//! parses back to the same `f64`.

/// `v` in scientific notation with 17 significant digits.
pub fn real(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Inverse of [`real`].
pub fn parse_real(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}
