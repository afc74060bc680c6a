//! Fixed-precision number formatting shared by every text writer.

/// Significant digits for Pauli text coefficients.
pub const PAULI_DIGITS: usize = 15;
/// Significant digits for CSV and summary values.
pub const CSV_DIGITS: usize = 12;

/// Formats `x` like C's `%.{digits}g`: the shorter of fixed and scientific
/// notation for `digits` significant digits, trailing zeros removed.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let p = digits.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// [`fmt_sig`] at [`CSV_DIGITS`].
pub fn csv(x: f64) -> String {
    fmt_sig(x, CSV_DIGITS)
}
