//! Phase parsing and pretty-printing.
//!
//! Phases are accepted either as plain radians (`"1.5708"`, `0.3`) or as
//! rational multiples of pi: `"pi/2"`, `"-pi/4"`, `"3pi/4"`, `"3*pi/4"`,
//! `"2pi"`, `"0"`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

/// Parses a phase in radians from a decimal or `p*pi/q` string.
pub fn parse_phase(text: &str) -> Result<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let err = || Error::Phase(text.to_string());
    if s.is_empty() {
        return Err(err());
    }
    let lower = s.to_ascii_lowercase();
    let Some(pos) = lower.find("pi") else {
        return lower.parse::<f64>().map_err(|_| err());
    };

    let (head, tail) = (&lower[..pos], &lower[pos + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let numerator = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| err())?,
    };
    let denominator = if tail.is_empty() {
        1.0
    } else {
        let d = tail.strip_prefix('/').ok_or_else(err)?;
        let d = d.parse::<f64>().map_err(|_| err())?;
        if d == 0.0 {
            return Err(err());
        }
        d
    };
    Ok(numerator * PI / denominator)
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_phase(phi: f64) -> f64 {
    let mut w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Returns `(p, q)` with `phi ~= p*pi/q`, `q <= max_den`, if one exists
/// within `tol`.
pub fn as_rational_pi(phi: f64, max_den: i64, tol: f64) -> Option<(i64, i64)> {
    let x = phi / PI;
    for q in 1..=max_den {
        let p = (x * q as f64).round();
        if (p * PI / q as f64 - phi).abs() <= tol {
            return Some((p as i64, q));
        }
    }
    None
}

/// Display adapter: rational multiples of pi (denominator up to 8) print as
/// `3pi/4`, everything else as a decimal.
pub struct PhaseDisplay(pub f64);

impl fmt::Display for PhaseDisplay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match as_rational_pi(self.0, 8, 1e-9) {
            Some((0, _)) => write!(f, "0"),
            Some((p, 1)) => match p {
                1 => write!(f, "pi"),
                -1 => write!(f, "-pi"),
                p => write!(f, "{p}pi"),
            },
            Some((p, q)) => match p {
                1 => write!(f, "pi/{q}"),
                -1 => write!(f, "-pi/{q}"),
                p => write!(f, "{p}pi/{q}"),
            },
            None => write!(f, "{:.12}", self.0),
        }
    }
}

pub(crate) fn deserialize_phase<'de, D>(de: D) -> std::result::Result<f64, D::Error>
where
    D: Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Int(i64),
        Text(String),
    }
    match Raw::deserialize(de)? {
        Raw::Num(x) => Ok(x),
        Raw::Int(i) => Ok(i as f64),
        Raw::Text(s) => parse_phase(&s).map_err(serde::de::Error::custom),
    }
}

pub(crate) fn serialize_phase<S: Serializer>(phi: &f64, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_f64(*phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parses_pi_forms() {
        let cases = [
            ("pi/2", PI / 2.0),
            ("-pi/4", -PI / 4.0),
            ("3pi/4", 3.0 * PI / 4.0),
            ("3*pi/4", 3.0 * PI / 4.0),
            ("pi", PI),
            ("2pi", 2.0 * PI),
            ("0", 0.0),
            ("0.25", 0.25),
            (" PI / 3 ", PI / 3.0),
        ];
        for (s, want) in cases {
            assert_abs_diff_eq!(parse_phase(s).unwrap(), want, epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_garbage() {
        for s in ["", "pie", "pi/0", "pi/x", "abc", "pi2"] {
            assert!(parse_phase(s).is_err(), "{s} should not parse");
        }
    }

    #[test]
    fn display_prefers_rational_pi() {
        assert_eq!(PhaseDisplay(PI / 2.0).to_string(), "pi/2");
        assert_eq!(PhaseDisplay(-PI / 4.0).to_string(), "-pi/4");
        assert_eq!(PhaseDisplay(PI).to_string(), "pi");
        assert_eq!(PhaseDisplay(0.0).to_string(), "0");
        assert_eq!(PhaseDisplay(3.0 * PI / 8.0).to_string(), "3pi/8");
        assert_eq!(PhaseDisplay(1.0).to_string(), "1.000000000000");
    }

    #[test]
    fn wrap_into_half_open_interval() {
        assert_abs_diff_eq!(wrap_phase(-PI), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_phase(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_phase(0.3), 0.3, epsilon = 1e-15);
    }
}
