//! Number parsing and printing shared by the commands.

use crate::CliError;

/// Parses `3`, `3/2` or `1.5` into the doubled value.
pub fn parse_half_integer(text: &str) -> Result<u32, CliError> {
    let bad = || CliError::Parse(format!("'{text}' is not a non-negative integer or half-integer"));
    let t = text.trim();
    if let Some(num) = t.strip_suffix("/2") {
        let n: u32 = num.trim().parse().map_err(|_| bad())?;
        return if n % 2 == 1 { Ok(n) } else { Err(bad()) };
    }
    if let Ok(n) = t.parse::<u32>() {
        return n.checked_mul(2).ok_or_else(bad);
    }
    let x: f64 = t.parse().map_err(|_| bad())?;
    let doubled = 2.0 * x;
    if x < 0.0 || doubled.fract() != 0.0 || doubled > u32::MAX as f64 {
        return Err(bad());
    }
    Ok(doubled as u32)
}

/// `J` from its doubled value: `2`, `3/2`.
pub fn half_integer(two_j: u32) -> String {
    if two_j.is_multiple_of(2) {
        (two_j / 2).to_string()
    } else {
        format!("{two_j}/2")
    }
}

/// Twelve decimals with trailing zeros dropped.
pub fn number(v: f64) -> String {
    let s = format!("{v:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}
