//! Angle strings: decimal radians or multiples of pi.
//!
//! Accepted forms: `1.5`, `pi`, `2pi`, `3pi/4`, `pi/4`, `1.1197pi`, `3*pi/4`,
//! and the same with `π` in place of `pi`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

fn parse_err(input: &str, reason: impl Into<String>) -> Error {
    Error::AngleParse {
        input: input.to_string(),
        reason: reason.into(),
    }
}

fn parse_number(input: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| parse_err(input, format!("{s:?} is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(input, "not finite"));
    }
    Ok(v)
}

/// Parses an angle in radians.
pub fn parse_theta(input: &str) -> Result<f64> {
    let s: String = input
        .trim()
        .to_ascii_lowercase()
        .replace('π', "pi")
        .chars()
        .filter(|c| !c.is_whitespace())
        .collect();
    if s.is_empty() {
        return Err(parse_err(input, "empty"));
    }
    let value = match s.split_once("pi") {
        None => parse_number(input, &s)?,
        Some((coef, rest)) => {
            let coef = coef.strip_suffix('*').unwrap_or(coef);
            let c = if coef.is_empty() {
                1.0
            } else {
                parse_number(input, coef)?
            };
            let d = match rest {
                "" => 1.0,
                r => {
                    let den = r
                        .strip_prefix('/')
                        .ok_or_else(|| parse_err(input, format!("unexpected {r:?} after pi")))?;
                    let d = parse_number(input, den)?;
                    if d <= 0.0 {
                        return Err(parse_err(input, "denominator must be positive"));
                    }
                    d
                }
            };
            c * PI / d
        }
    };
    if value < 0.0 {
        return Err(parse_err(input, "angle must be non-negative"));
    }
    Ok(value)
}

/// Parses a comma-separated list of angles.
pub fn parse_theta_list(input: &str) -> Result<Vec<f64>> {
    input
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_theta)
        .collect()
}

/// Formats an angle as a small rational multiple of pi when it is one
/// (`pi`, `3pi/4`), otherwise as `1.1197pi`.
pub fn format_theta(theta: f64) -> String {
    if theta == 0.0 {
        return "0".into();
    }
    let r = theta / PI;
    for den in [1u32, 2, 4, 8, 16, 32, 64] {
        let num = (r * den as f64).round();
        if num >= 1.0 && (r * den as f64 - num).abs() < 1e-9 {
            let num = num as u64;
            let head = if num == 1 {
                "pi".to_string()
            } else {
                format!("{num}pi")
            };
            return if den == 1 {
                head
            } else {
                format!("{head}/{den}")
            };
        }
    }
    format!("{r:.4}pi")
}
