//! SI-suffixed number parsing and formatting (`60n`, `1.2u`, `989K`).
//!
//! Accepted suffixes are exactly `f p n u m K M G`. Parsing goes through the
//! decimal string so `"60n"` yields the same bits as the literal `60e-9`.

use crate::error::{Error, Result};

const SUFFIXES: [(char, i32); 8] = [
    ('f', -15),
    ('p', -12),
    ('n', -9),
    ('u', -6),
    ('m', -3),
    ('K', 3),
    ('M', 6),
    ('G', 9),
];

/// Parses a number with an optional trailing SI suffix.
pub fn parse_si(text: &str) -> std::result::Result<f64, String> {
    let s = text.trim();
    if s.is_empty() {
        return Err("empty number".into());
    }
    let last = s.chars().last().unwrap();
    let (mantissa, exp) = match SUFFIXES.iter().find(|(c, _)| *c == last) {
        Some((_, e)) => (&s[..s.len() - 1], *e),
        None => (s, 0),
    };
    if mantissa.is_empty() {
        return Err(format!("`{s}` has a suffix but no digits"));
    }
    if exp != 0 && mantissa.contains(['e', 'E']) {
        return Err(format!("`{s}` mixes exponent and SI suffix"));
    }
    // Reject things like "1x" or "inf" masquerading as numbers with suffixes.
    if !mantissa
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
    {
        if exp == 0 && matches!(mantissa, "inf" | "-inf" | "+inf" | "NaN") {
            return mantissa.parse::<f64>().map_err(|e| e.to_string());
        }
        return Err(format!("`{s}` is not a number"));
    }
    let full = if exp == 0 {
        mantissa.to_string()
    } else {
        format!("{mantissa}e{exp}")
    };
    full.parse::<f64>().map_err(|e| format!("`{s}`: {e}"))
}

/// Parses with line context for file readers.
pub(crate) fn parse_si_at(text: &str, line: usize) -> Result<f64> {
    parse_si(text).map_err(|m| Error::parse(line, m))
}

/// Formats `x` with an SI suffix when that form round-trips exactly,
/// otherwise falls back to the shortest exponent form.
pub fn format_si(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs();
    let mut candidates: Vec<(char, i32)> = SUFFIXES.to_vec();
    candidates.push((' ', 0));
    for (c, e) in candidates {
        let scale = 10f64.powi(e);
        let m = mag / scale;
        if !(1.0..1000.0).contains(&m) {
            continue;
        }
        // Try a few precisions, shortest first.
        for digits in 0..=17 {
            let ms = format!("{:.*}", digits, x / scale);
            let ms = trim_zeros(&ms);
            let cand = if c == ' ' { ms } else { format!("{ms}{c}") };
            if parse_si(&cand).ok() == Some(x) {
                return cand;
            }
        }
    }
    let plain = format!("{x}");
    if (1e-3..1e6).contains(&mag) && parse_si(&plain).ok() == Some(x) {
        return plain;
    }
    format!("{x:e}")
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffixes_scale() {
        assert_eq!(parse_si("60n").unwrap(), 60e-9);
        assert_eq!(parse_si("1.2u").unwrap(), 1.2e-6);
        assert_eq!(parse_si("989K").unwrap(), 989e3);
        assert_eq!(parse_si("1M").unwrap(), 1e6);
        assert_eq!(parse_si("7m").unwrap(), 7e-3);
        assert_eq!(parse_si("200p").unwrap(), 200e-12);
        assert_eq!(parse_si("120f").unwrap(), 120e-15);
        assert_eq!(parse_si("5G").unwrap(), 5e9);
        assert_eq!(parse_si("-94").unwrap(), -94.0);
        assert_eq!(parse_si("1e-3").unwrap(), 1e-3);
    }

    #[test]
    fn rejects_unknown_suffixes() {
        assert!(parse_si("1k").is_err());
        assert!(parse_si("3T").is_err());
        assert!(parse_si("u").is_err());
        assert!(parse_si("1e3K").is_err());
        assert!(parse_si("").is_err());
    }

    #[test]
    fn format_prefers_suffix() {
        assert_eq!(format_si(60e-9), "60n");
        assert_eq!(format_si(1.2e-6), "1.2u");
        assert_eq!(format_si(1e6), "1M");
        assert_eq!(format_si(300.0), "300");
        assert_eq!(format_si(-94.0), "-94");
    }

    proptest::proptest! {
        #[test]
        fn format_round_trips(x in -1e12f64..1e12f64, e in -15i32..0) {
            let v = x * 10f64.powi(e);
            proptest::prop_assert_eq!(parse_si(&format_si(v)).unwrap(), v);
        }
    }
}
