//! Deterministic CSV output: a header row, values with 17 significant digits,
//! LF line endings.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

pub const COMPARISON_HEADER: [&str; 4] = ["x", "approx", "reference", "abs_error"];
pub const RESIDUAL_HEADER: [&str; 4] = ["x", "u", "du", "residual"];
pub const RADIUS_HEADER: [&str; 4] = ["t", "radius_approx", "radius_numeric", "abs_error"];

/// Positional notation with 17 significant digits; exponent notation when
/// the decimal exponent is beyond +-20.
pub fn format_value(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{:.16e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp.abs() > 20 {
        return sci;
    }
    let (sign, mantissa) = mantissa.strip_prefix('-').map_or(("", mantissa), |m| ("-", m));
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let point = exp + 1;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    };
    format!("{sign}{body}")
}

pub fn render<const N: usize>(header: [&str; N], rows: &[[f64; N]]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
        let _ = writeln!(out, "{}", line.join(","));
    }
    out
}

pub fn write<const N: usize>(path: &Path, header: [&str; N], rows: &[[f64; N]]) -> io::Result<()> {
    std::fs::write(path, render(header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_value(0.1), "0.10000000000000001");
        assert_eq!(format_value(-2.5), "-2.5000000000000000");
        assert_eq!(format_value(1234.5), "1234.5000000000000");
        assert_eq!(format_value(1e-5), "0.000010000000000000001");
        assert_eq!(format_value(1e300), "1.0000000000000001e300");
        assert_eq!(format_value(0.0), "0");
        assert_eq!(format_value(1e17), "100000000000000000");
    }

    #[test]
    fn values_round_trip() {
        for v in [std::f64::consts::PI, -1e-19, 7.38905609893065, 123456789.123] {
            assert_eq!(format_value(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn rendering() {
        let s = render(COMPARISON_HEADER, &[[0.0, 1.0, 1.0, 0.0]]);
        assert_eq!(s, "x,approx,reference,abs_error\n0,1.0000000000000000,1.0000000000000000,0\n");
    }
}
