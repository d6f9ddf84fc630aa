//! Printf-`%g`-style formatting with a fixed number of significant digits.
//!
//! All CSV emitters share this so that numeric output is deterministic and
//! re-parsing a written value yields exactly the double that was formatted
//! from a 6-significant-digit decimal.

/// Formats `value` with `sig` significant digits, trimming trailing zeros.
///
/// Decimal notation is used for exponents in `[-4, sig)`, scientific
/// notation otherwise, mirroring C's `%g`.
pub fn fmt_sig(value: f64, sig: usize) -> String {
    assert!(sig >= 1, "need at least one significant digit");
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return if value.is_nan() {
            "nan".to_string()
        } else if value > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }

    // Round to `sig` digits via exponential formatting, then choose notation.
    let exp_str = format!("{:.*e}", sig - 1, value);
    let (mantissa, exponent) = split_exp(&exp_str);
    if exponent >= -4 && exponent < sig as i32 {
        let fixed_decimals = (sig as i32 - 1 - exponent).max(0) as usize;
        let s = format!("{:.*}", fixed_decimals, value_from_parts(&mantissa, exponent));
        trim_zeros(&s)
    } else {
        let m = trim_zeros(&mantissa);
        format!("{}e{}", m, exponent)
    }
}

fn split_exp(s: &str) -> (String, i32) {
    let pos = s.find('e').expect("exponential format always contains 'e'");
    let mantissa = s[..pos].to_string();
    let exponent: i32 = s[pos + 1..].parse().expect("valid exponent");
    (mantissa, exponent)
}

fn value_from_parts(mantissa: &str, exponent: i32) -> f64 {
    format!("{}e{}", mantissa, exponent)
        .parse()
        .expect("rebuilt float parses")
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        let t = s.trim_end_matches('0');
        t.trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}
