//! SPICE numeric literals with engineering suffixes.

use super::ParseError;

/// Engineering suffixes, longest first so `meg` wins over `m`.
const SUFFIXES: &[(&str, f64)] = &[
    ("meg", 1e6),
    ("f", 1e-15),
    ("p", 1e-12),
    ("n", 1e-9),
    ("u", 1e-6),
    ("m", 1e-3),
    ("k", 1e3),
    ("g", 1e9),
    ("t", 1e12),
];

/// Parse a numeric token such as `200n`, `0.8`, `1e-9` or `10MEG` into SI
/// base units. Errors carry column 1; callers holding a card position use
/// [`parse_value_at`].
pub fn parse_value(token: &str) -> Result<f64, ParseError> {
    parse_value_at(token, 0, 1)
}

pub(crate) fn parse_value_at(token: &str, line: usize, column: usize) -> Result<f64, ParseError> {
    let err = |msg: String| ParseError::new(line, column, msg);
    let lower = token.to_ascii_lowercase();
    let bytes = lower.as_bytes();
    let mut i = 0;
    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return Err(err(format!("malformed number `{token}`")));
    }
    // Exponent only if followed by digits; a bare `e` is not a suffix either.
    if i < bytes.len() && bytes[i] == b'e' {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        let exp_start = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j == exp_start {
            return Err(err(format!("malformed exponent in `{token}`")));
        }
        i = j;
    }
    let mantissa: f64 = lower[..i]
        .parse()
        .map_err(|_| err(format!("malformed number `{token}`")))?;
    let rest = &lower[i..];
    if rest.is_empty() {
        return Ok(mantissa);
    }
    match SUFFIXES.iter().find(|(s, _)| *s == rest) {
        Some((_, scale)) => Ok(mantissa * scale),
        None => Err(ParseError::new(
            line,
            column + i,
            format!("unknown unit suffix `{}` in `{token}`", &token[i..]),
        )),
    }
}

/// Shortest representation that parses back to the identical `f64`.
pub fn format_value(v: f64) -> String {
    format!("{v:e}")
}
