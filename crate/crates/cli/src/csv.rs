//! CSV rendering: decimal notation, 9 significant digits, LF endings.

use crate::experiment::Table;

const SIG_DIGITS: i32 = 9;

/// `x` in plain decimal notation rounded to 9 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return String::new();
    }
    if x == 0.0 {
        return "0".into();
    }
    let mut decimals = (SIG_DIGITS - 1 - x.abs().log10().floor() as i32).max(0);
    let mut s = format!("{:.*}", decimals as usize, x);
    // rounding can carry into a new leading digit, e.g. 9.9999999996 → 10.00000000
    if digits(&s) > SIG_DIGITS as usize && decimals > 0 {
        decimals -= 1;
        s = format!("{:.*}", decimals as usize, x);
    }
    if s.starts_with("-") && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s.remove(0);
    }
    s
}

fn digits(s: &str) -> usize {
    s.trim_start_matches('-')
        .trim_start_matches(['0', '.'])
        .bytes()
        .filter(u8::is_ascii_digit)
        .count()
}

fn cell(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_default()
}

pub fn render(table: &Table) -> String {
    let has_quantity = table.rows.iter().any(|r| r.quantity.is_some());
    let mut header = vec!["k_db", "beta_delta", "theta_delta_deg"];
    if has_quantity {
        header.push("quantity");
    }
    header.extend_from_slice(table.value_columns);
    header.push("runtime_ms");
    let mut out = header.join(",");
    out.push('\n');
    for r in &table.rows {
        let mut fields = vec![
            fmt_sig(r.point.k_db),
            fmt_sig(r.point.beta_delta),
            fmt_sig(r.point.theta_delta_deg),
        ];
        if has_quantity {
            fields.push(r.quantity.unwrap_or("").to_string());
        }
        fields.extend(r.values.iter().map(|&v| cell(v)));
        fields.push(cell(r.runtime_ms));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1.00000000");
        assert_eq!(fmt_sig(0.123456789123), "0.123456789");
        assert_eq!(fmt_sig(123456.7891234), "123456.789");
        assert_eq!(fmt_sig(1234567890123.0), "1234567890123");
        assert_eq!(fmt_sig(-0.000012345678912), "-0.0000123456789");
        assert_eq!(fmt_sig(9.9999999996), "10.0000000");
        assert_eq!(fmt_sig(f64::NAN), "");
        for x in [3.7e-7, 0.5, 42.0, 1e5 / 3.0] {
            assert!(!fmt_sig(x).contains('e'));
            let back: f64 = fmt_sig(x).parse().unwrap();
            assert!((back - x).abs() <= 5e-9 * x.abs());
        }
    }
}
