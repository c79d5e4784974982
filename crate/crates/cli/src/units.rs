//! Unit-suffixed quantities at the config boundary.
//!
//! Every dimensional value is written as `"<number> <unit>"` and converted
//! once to SI, with frequencies turned into angular frequencies (rad/s).
//! Angles are the one exception to the suffix rule: a bare number is read as
//! degrees.

use std::f64::consts::{PI, TAU};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    Frequency,
    Length,
    Time,
    Angle,
    Field,
    Intensity,
}

impl Dimension {
    pub fn describe(self) -> &'static str {
        match self {
            Self::Frequency => "frequency with unit Hz, kHz, MHz, GHz or rad/s",
            Self::Length => "length with unit m, cm, mm, um or nm",
            Self::Time => "time with unit s, ms, us or ns",
            Self::Angle => "angle in deg or rad (bare numbers are degrees)",
            Self::Field => "electric field with unit V/m, V/cm or kV/cm",
            Self::Intensity => "intensity with unit W/m2 or W/cm2",
        }
    }

    /// SI factor for `unit`, or `None` when the unit does not belong here.
    fn factor(self, unit: &str) -> Option<f64> {
        let micro = |rest: &str| ["u", "μ", "µ"].iter().any(|m| rest.strip_prefix(m).is_some_and(|r| r.is_empty()));
        let f = match self {
            Self::Frequency => match unit {
                "Hz" => TAU,
                "kHz" => TAU * 1e3,
                "MHz" => TAU * 1e6,
                "GHz" => TAU * 1e9,
                "rad/s" => 1.0,
                _ => return None,
            },
            Self::Length => match unit {
                "m" => 1.0,
                "cm" => 1e-2,
                "mm" => 1e-3,
                "nm" => 1e-9,
                u if u.ends_with('m') && micro(&u[..u.len() - 1]) => 1e-6,
                _ => return None,
            },
            Self::Time => match unit {
                "s" => 1.0,
                "ms" => 1e-3,
                "ns" => 1e-9,
                u if u.ends_with('s') && micro(&u[..u.len() - 1]) => 1e-6,
                _ => return None,
            },
            Self::Angle => match unit {
                "deg" | "°" => PI / 180.0,
                "rad" => 1.0,
                _ => return None,
            },
            Self::Field => match unit {
                "V/m" => 1.0,
                "V/cm" => 1e2,
                "kV/cm" => 1e5,
                _ => return None,
            },
            Self::Intensity => match unit {
                "W/m2" | "W/m²" => 1.0,
                "W/cm2" | "W/cm²" => 1e4,
                _ => return None,
            },
        };
        Some(f)
    }
}

/// Parses `"<number> <unit>"` (the space is optional) into SI.
pub fn parse_str(text: &str, dim: Dimension) -> Result<f64, String> {
    let text = text.trim();
    let (number, unit) = split_number(text).ok_or_else(|| format!("`{text}` does not start with a number"))?;
    if unit.is_empty() {
        return if dim == Dimension::Angle {
            Ok(number.to_radians())
        } else {
            Err(format!("`{text}` has no unit; expected {}", dim.describe()))
        };
    }
    let f = dim
        .factor(unit)
        .ok_or_else(|| format!("unknown unit `{unit}`; expected {}", dim.describe()))?;
    Ok(number * f)
}

/// Parses a TOML value: strings carry units, bare numbers only for angles.
pub fn parse_value(value: &toml::Value, dim: Dimension) -> Result<f64, String> {
    match value {
        toml::Value::String(s) => parse_str(s, dim),
        toml::Value::Float(x) if dim == Dimension::Angle => Ok(x.to_radians()),
        toml::Value::Integer(x) if dim == Dimension::Angle => Ok((*x as f64).to_radians()),
        toml::Value::Float(_) | toml::Value::Integer(_) => {
            Err(format!("bare number needs a unit; expected {}", dim.describe()))
        }
        other => Err(format!("expected {}, got {}", dim.describe(), other.type_str())),
    }
}

/// Longest leading slice that parses as a float, and the trimmed rest.
fn split_number(text: &str) -> Option<(f64, &str)> {
    let ends: Vec<usize> = text
        .char_indices()
        .map(|(i, c)| i + c.len_utf8())
        .collect();
    ends.iter()
        .rev()
        .find_map(|&end| text[..end].parse::<f64>().ok().map(|x| (x, text[end..].trim())))
        .filter(|(x, _)| x.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * b.abs().max(1e-300)
    }

    #[test]
    fn frequencies_become_angular() {
        assert!(close(parse_str("22.83 kHz", Dimension::Frequency).unwrap(), TAU * 22.83e3));
        assert!(close(parse_str("12.14GHz", Dimension::Frequency).unwrap(), TAU * 12.14e9));
        assert!(close(parse_str("-3 rad/s", Dimension::Frequency).unwrap(), -3.0));
    }

    #[test]
    fn micro_prefix_spellings() {
        for s in ["5 um", "5 μm", "5 µm", "5e0um"] {
            assert!(close(parse_str(s, Dimension::Length).unwrap(), 5e-6), "{s}");
        }
        for s in ["3 us", "3 μs", "3 µs"] {
            assert!(close(parse_str(s, Dimension::Time).unwrap(), 3e-6), "{s}");
        }
        assert!(close(parse_str("400 nm", Dimension::Length).unwrap(), 4e-7));
    }

    #[test]
    fn fields_and_intensities() {
        assert!(close(parse_str("1 kV/cm", Dimension::Field).unwrap(), 1e5));
        assert!(close(parse_str("1e7 W/cm2", Dimension::Intensity).unwrap(), 1e11));
        assert!(close(parse_str("2 W/m²", Dimension::Intensity).unwrap(), 2.0));
    }

    #[test]
    fn angles_default_to_degrees() {
        let v = toml::Value::Float(90.0);
        assert!(close(parse_value(&v, Dimension::Angle).unwrap(), PI / 2.0));
        assert!(close(parse_str("1 rad", Dimension::Angle).unwrap(), 1.0));
        assert!(close(parse_str("45", Dimension::Angle).unwrap(), PI / 4.0));
    }

    #[test]
    fn rejects_missing_or_foreign_units() {
        assert!(parse_value(&toml::Value::Float(3.0), Dimension::Time).is_err());
        assert!(parse_str("3", Dimension::Length).is_err());
        assert!(parse_str("3 kHz", Dimension::Length).unwrap_err().contains("unknown unit"));
        assert!(parse_str("fast", Dimension::Time).is_err());
        assert!(parse_value(&toml::Value::Boolean(true), Dimension::Field).is_err());
    }
}
