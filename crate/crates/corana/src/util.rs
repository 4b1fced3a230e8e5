//! Small shared helpers.

/// Format `x` with `sig` significant digits, `%g`-style: decimal notation
/// for moderate exponents, scientific otherwise, trailing zeros trimmed.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    assert!(sig >= 1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (_, exp) = sci.split_once('e').expect("exponential form");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= sig as i32 {
        return trim_mantissa(&sci);
    }
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    let fixed = format!("{:.*}", decimals, x);
    trim_fraction(&fixed)
}

fn trim_fraction(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn trim_mantissa(sci: &str) -> String {
    let (mantissa, exp) = sci.split_once('e').expect("exponential form");
    format!("{}e{}", trim_fraction(mantissa), exp)
}
