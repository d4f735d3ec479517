//! Number-with-unit arguments such as `166kV/cm`, `10um` or `2e`.

use nvcoh::constants::ELEMENTARY_CHARGE;
use nvcoh::units::Unit;

use crate::error::CliError;

/// Splits `s` into its longest numeric prefix and the trailing unit text.
fn split(s: &str) -> Option<(f64, &str)> {
    let s = s.trim();
    let mut cuts: Vec<usize> = s.char_indices().map(|(i, _)| i).skip(1).collect();
    cuts.push(s.len());
    cuts.into_iter()
        .rev()
        .find_map(|i| s[..i].trim().parse::<f64>().ok().map(|v| (v, s[i..].trim())))
}

/// Parses a quantity and returns it in SI units. A bare number is read in
/// `default`; an explicit unit must have the same dimension.
pub fn parse_si(s: &str, default: Unit) -> Result<f64, CliError> {
    let bad = || CliError::Input(format!("cannot parse quantity '{s}' (expected a number with unit like {})", default.symbol()));
    let (value, unit) = split(s).ok_or_else(bad)?;
    let unit = if unit.is_empty() {
        default
    } else {
        unit.parse::<Unit>().map_err(|_| bad())?
    };
    if !unit.same_dimension(default) {
        return Err(CliError::Input(format!(
            "quantity '{s}' has unit {} but {} was expected",
            unit.symbol(),
            default.symbol()
        )));
    }
    Ok(unit.to_si(value))
}

/// Charge in coulombs; `e`, `-e` and `3e` count elementary charges.
pub fn parse_charge(s: &str) -> Result<f64, CliError> {
    let t = s.trim();
    let bad = || CliError::Input(format!("cannot parse charge '{s}'"));
    match t {
        "e" | "+e" => return Ok(ELEMENTARY_CHARGE),
        "-e" => return Ok(-ELEMENTARY_CHARGE),
        _ => {}
    }
    let (value, unit) = split(t).ok_or_else(bad)?;
    match unit {
        "" | "C" => Ok(value),
        "e" => Ok(value * ELEMENTARY_CHARGE),
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-15 * b.abs()
    }

    #[test]
    fn units_and_defaults() {
        assert!(close(parse_si("10um", Unit::Meter).unwrap(), 1e-5));
        assert!(close(parse_si("40 nm", Unit::Meter).unwrap(), 4e-8));
        assert!(close(parse_si("166kV/cm", Unit::VoltPerMeter).unwrap(), 1.66e7));
        assert_eq!(parse_si("120", Unit::VoltPerMeter).unwrap(), 120.0);
        assert_eq!(parse_si("1.5e-3", Unit::Second).unwrap(), 1.5e-3);
        assert!(parse_si("10uT", Unit::Meter).is_err());
        assert!(parse_si("abc", Unit::Meter).is_err());
    }

    #[test]
    fn charges() {
        assert_eq!(parse_charge("e").unwrap(), ELEMENTARY_CHARGE);
        assert_eq!(parse_charge("-e").unwrap(), -ELEMENTARY_CHARGE);
        assert_eq!(parse_charge("2e").unwrap(), 2.0 * ELEMENTARY_CHARGE);
        assert_eq!(parse_charge("1.6e-19").unwrap(), 1.6e-19);
        assert_eq!(parse_charge("1.6e-19C").unwrap(), 1.6e-19);
        assert!(parse_charge("2x").is_err());
    }
}
