//! Numbers with mandatory unit suffixes, converted to SI.

/// Physical dimension a value must carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Power,
    /// Nonlinear coefficient, m/V.
    Nonlinear,
    /// Attenuation, 1/m.
    InverseLength,
    /// Wavenumber or phase mismatch, rad/m.
    Wavenumber,
}

impl Dimension {
    fn scale(&self, unit: &str) -> Option<f64> {
        let s = match (self, unit) {
            (Dimension::Length, "nm") => 1e-9,
            (Dimension::Length, "um" | "µm") => 1e-6,
            (Dimension::Length, "mm") => 1e-3,
            (Dimension::Length, "cm") => 1e-2,
            (Dimension::Length, "m") => 1.0,
            (Dimension::Power, "nW") => 1e-9,
            (Dimension::Power, "uW" | "µW") => 1e-6,
            (Dimension::Power, "mW") => 1e-3,
            (Dimension::Power, "W") => 1.0,
            (Dimension::Nonlinear, "pm/V") => 1e-12,
            (Dimension::Nonlinear, "m/V") => 1.0,
            (Dimension::InverseLength, "/m") => 1.0,
            (Dimension::InverseLength, "/cm") => 1e2,
            (Dimension::InverseLength, "/mm") => 1e3,
            (Dimension::Wavenumber, "rad/m") => 1.0,
            (Dimension::Wavenumber, "rad/cm") => 1e2,
            (Dimension::Wavenumber, "rad/mm") => 1e3,
            _ => return None,
        };
        Some(s)
    }

    /// Unit the serializer writes.
    pub fn si_unit(&self) -> &'static str {
        match self {
            Dimension::Length => "m",
            Dimension::Power => "W",
            Dimension::Nonlinear => "m/V",
            Dimension::InverseLength => "/m",
            Dimension::Wavenumber => "rad/m",
        }
    }

    fn accepted(&self) -> &'static str {
        match self {
            Dimension::Length => "nm, um, mm, cm, m",
            Dimension::Power => "nW, uW, mW, W",
            Dimension::Nonlinear => "pm/V, m/V",
            Dimension::InverseLength => "/m, /cm, /mm",
            Dimension::Wavenumber => "rad/m, rad/cm, rad/mm",
        }
    }
}

/// A lexical token with its byte offset in the value string.
#[derive(Debug, Clone, PartialEq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub offset: usize,
}

/// Splits on whitespace, and also between a number and a unit written
/// without a space (`812nm`).
pub fn tokenize(value: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut iter = value.char_indices().peekable();
    while let Some(&(start, c)) = iter.peek() {
        if c.is_whitespace() {
            iter.next();
            continue;
        }
        let numeric = starts_number(c);
        let mut end = start;
        let mut prev = '\0';
        while let Some(&(i, ch)) = iter.peek() {
            if ch.is_whitespace() {
                break;
            }
            // a unit glued to a number: letters other than an exponent marker
            if numeric && i > start && is_unit_start(ch) && !is_exponent(ch, prev, &value[start..i]) {
                break;
            }
            end = i + ch.len_utf8();
            prev = ch;
            iter.next();
        }
        out.push(Token {
            text: &value[start..end],
            offset: start,
        });
    }
    out
}

fn starts_number(c: char) -> bool {
    c.is_ascii_digit() || c == '-' || c == '+' || c == '.'
}

fn is_unit_start(c: char) -> bool {
    c.is_alphabetic() || c == '/' || c == 'µ'
}

fn is_exponent(c: char, prev: char, so_far: &str) -> bool {
    (c == 'e' || c == 'E') && (prev.is_ascii_digit() || prev == '.') && !so_far.contains(['e', 'E'])
}

pub fn is_number(token: &str) -> bool {
    token.chars().next().is_some_and(starts_number) && token.parse::<f64>().is_ok()
}

/// Error from unit parsing: message plus the byte offset it refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitError {
    pub offset: usize,
    pub message: String,
}

/// Parses `number unit` from `tokens[*pos..]`, advancing `pos`.
pub fn take_quantity(tokens: &[Token<'_>], pos: &mut usize, dim: Dimension, end_offset: usize) -> Result<f64, UnitError> {
    let number = take_number(tokens, pos, end_offset)?;
    let Some(unit) = tokens.get(*pos) else {
        return Err(UnitError {
            offset: end_offset,
            message: format!("missing unit after {number} (expected one of {})", dim.accepted()),
        });
    };
    if is_number(unit.text) {
        return Err(UnitError {
            offset: unit.offset,
            message: format!("missing unit after {number} (expected one of {})", dim.accepted()),
        });
    }
    let scale = dim.scale(unit.text).ok_or_else(|| UnitError {
        offset: unit.offset,
        message: format!("unknown unit '{}' (expected one of {})", unit.text, dim.accepted()),
    })?;
    *pos += 1;
    Ok(number * scale)
}

/// Parses a bare finite number from `tokens[*pos..]`.
pub fn take_number(tokens: &[Token<'_>], pos: &mut usize, end_offset: usize) -> Result<f64, UnitError> {
    let Some(tok) = tokens.get(*pos) else {
        return Err(UnitError {
            offset: end_offset,
            message: "missing number".into(),
        });
    };
    let v: f64 = tok.text.parse().map_err(|_| UnitError {
        offset: tok.offset,
        message: format!("expected a number, found '{}'", tok.text),
    })?;
    if !v.is_finite() {
        return Err(UnitError {
            offset: tok.offset,
            message: format!("number must be finite, found '{}'", tok.text),
        });
    }
    *pos += 1;
    Ok(v)
}

/// Parses a whole string as one quantity.
pub fn parse_quantity(value: &str, dim: Dimension) -> Result<f64, UnitError> {
    let tokens = tokenize(value);
    let mut pos = 0;
    let v = take_quantity(&tokens, &mut pos, dim, value.len())?;
    match tokens.get(pos) {
        None => Ok(v),
        Some(t) => Err(UnitError {
            offset: t.offset,
            message: format!("unexpected '{}'", t.text),
        }),
    }
}

/// Formats an SI value so that parsing it back gives the same bits.
pub fn format_quantity(value: f64, dim: Dimension) -> String {
    format!("{value:e} {}", dim.si_unit())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quantity(s: &str, dim: Dimension) -> Result<f64, UnitError> {
        let t = tokenize(s);
        let mut pos = 0;
        take_quantity(&t, &mut pos, dim, s.len())
    }

    #[test]
    fn units_convert() {
        assert_eq!(quantity("812 nm", Dimension::Length).unwrap(), 812e-9);
        assert_eq!(quantity("812nm", Dimension::Length).unwrap(), 812e-9);
        assert_eq!(quantity("1.5e2 mm", Dimension::Length).unwrap(), 0.15);
        assert_eq!(quantity("1e-3m", Dimension::Length).unwrap(), 1e-3);
        assert_eq!(quantity("120 mW", Dimension::Power).unwrap(), 0.12);
        assert_eq!(quantity("27 pm/V", Dimension::Nonlinear).unwrap(), 27e-12);
        assert_eq!(quantity("0.1 /cm", Dimension::InverseLength).unwrap(), 10.0);
        assert_eq!(quantity("-3 rad/mm", Dimension::Wavenumber).unwrap(), -3000.0);
        assert_eq!(parse_quantity("812nm", Dimension::Length).unwrap(), 812e-9);
        assert!(parse_quantity("812 nm 3", Dimension::Length).is_err());
    }

    #[test]
    fn unit_errors_point_at_the_problem() {
        let e = quantity("812", Dimension::Length).unwrap_err();
        assert!(e.message.contains("missing unit"));
        assert_eq!(e.offset, 3);
        let e = quantity("812 furlongs", Dimension::Length).unwrap_err();
        assert_eq!(e.offset, 4);
        let e = quantity("12 mW", Dimension::Length).unwrap_err();
        assert!(e.message.contains("unknown unit"));
        assert!(quantity("abc nm", Dimension::Length).is_err());
        assert!(quantity("inf nm", Dimension::Length).is_err());
    }

    #[test]
    fn formatted_values_round_trip() {
        for v in [812e-9, 0.1 + 0.2, -1.0 / 3.0, 5e-324, 1.7976931348623157e308] {
            for dim in [Dimension::Length, Dimension::Power, Dimension::Wavenumber] {
                assert_eq!(quantity(&format_quantity(v, dim), dim).unwrap(), v);
            }
        }
    }
}
