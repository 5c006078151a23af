//! Fixed-precision CSV output.

use std::fmt::Write as _;

/// Significant digits in every CSV number.
pub const DIGITS: usize = 12;

/// `x` in the style of C's `%.12g`: shortest of fixed or scientific
/// notation at 12 significant digits, trailing zeros removed.
pub fn g12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // exponent after rounding to DIGITS significant digits
    let sci = format!("{:.*e}", DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if exp < -4 || exp >= DIGITS as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (DIGITS as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// One CSV field; absent values are empty.
pub fn field(x: Option<f64>) -> String {
    x.map(g12).unwrap_or_default()
}

/// Text field, quoted when it holds a comma, quote or line break.
pub fn text(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Header plus rows, `\n`-terminated.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.join(","));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        // reference strings from printf("%.12g")
        let cases = [
            (0.5, "0.5"),
            (1.0, "1"),
            (-2.0, "-2"),
            (std::f64::consts::LN_2, "0.69314718056"),
            (0.1 + 0.2, "0.3"),
            (1e-5, "1e-05"),
            (1.234e-4, "0.0001234"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (999999999999.9, "1e+12"),
            (-3.5e20, "-3.5e+20"),
            (0.462098120373, "0.462098120373"),
        ];
        for (x, want) in cases {
            assert_eq!(g12(x), want, "{x}");
        }
        assert_eq!(g12(f64::NAN), "nan");
        assert_eq!(field(None), "");
    }

    #[test]
    fn csv_layout() {
        let s = csv(&["a", "b"], &[vec!["1".into(), "".into()]]);
        assert_eq!(s, "a,b\n1,\n");
        assert_eq!(text("plain"), "plain");
        assert_eq!(text("a, \"b\""), "\"a, \"\"b\"\"\"");
    }
}
