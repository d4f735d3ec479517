//! Unit conversions between the lab units used for NV quantities and SI.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Dimension {
    ElectricField,
    MagneticField,
    Frequency,
    StarkCoefficient,
    Time,
    Length,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    VoltPerMeter,
    KiloVoltPerCm,
    Tesla,
    MicroTesla,
    Hertz,
    KiloHertz,
    MegaHertz,
    /// Hz per (V/m)
    HertzPerVoltPerMeter,
    /// kHz·cm/kV, the customary unit of Stark coefficients
    KiloHertzCmPerKiloVolt,
    Second,
    Millisecond,
    Microsecond,
    Meter,
    Micrometer,
    Nanometer,
}

impl Unit {
    fn dimension(self) -> Dimension {
        use Unit::*;
        match self {
            VoltPerMeter | KiloVoltPerCm => Dimension::ElectricField,
            Tesla | MicroTesla => Dimension::MagneticField,
            Hertz | KiloHertz | MegaHertz => Dimension::Frequency,
            HertzPerVoltPerMeter | KiloHertzCmPerKiloVolt => Dimension::StarkCoefficient,
            Second | Millisecond | Microsecond => Dimension::Time,
            Meter | Micrometer | Nanometer => Dimension::Length,
        }
    }

    /// SI scale as `mul / div`; both are exact in binary floating point so a
    /// conversion rounds once per step.
    fn scale(self) -> (f64, f64) {
        use Unit::*;
        match self {
            VoltPerMeter | Tesla | Hertz | HertzPerVoltPerMeter | Second | Meter => (1.0, 1.0),
            KiloVoltPerCm => (1e5, 1.0),
            MicroTesla | Microsecond | Micrometer => (1.0, 1e6),
            KiloHertz => (1e3, 1.0),
            MegaHertz => (1e6, 1.0),
            // 1 kHz per (1 kV/cm) = 1e3 Hz / 1e5 (V/m)
            KiloHertzCmPerKiloVolt => (1.0, 1e2),
            Millisecond => (1.0, 1e3),
            Nanometer => (1.0, 1e9),
        }
    }

    /// Value in the SI unit of the same dimension.
    pub fn to_si(self, value: f64) -> f64 {
        let (m, d) = self.scale();
        value * m / d
    }

    pub fn same_dimension(self, other: Unit) -> bool {
        self.dimension() == other.dimension()
    }

    pub fn symbol(self) -> &'static str {
        use Unit::*;
        match self {
            VoltPerMeter => "V/m",
            KiloVoltPerCm => "kV/cm",
            Tesla => "T",
            MicroTesla => "uT",
            Hertz => "Hz",
            KiloHertz => "kHz",
            MegaHertz => "MHz",
            HertzPerVoltPerMeter => "Hz/(V/m)",
            KiloHertzCmPerKiloVolt => "kHz*cm/kV",
            Second => "s",
            Millisecond => "ms",
            Microsecond => "us",
            Meter => "m",
            Micrometer => "um",
            Nanometer => "nm",
        }
    }

    pub const ALL: [Unit; 15] = [
        Unit::VoltPerMeter,
        Unit::KiloVoltPerCm,
        Unit::Tesla,
        Unit::MicroTesla,
        Unit::Hertz,
        Unit::KiloHertz,
        Unit::MegaHertz,
        Unit::HertzPerVoltPerMeter,
        Unit::KiloHertzCmPerKiloVolt,
        Unit::Second,
        Unit::Millisecond,
        Unit::Microsecond,
        Unit::Meter,
        Unit::Micrometer,
        Unit::Nanometer,
    ];
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().replace(['μ', 'µ'], "u").replace('·', "*");
        Unit::ALL
            .into_iter()
            .find(|u| u.symbol() == norm)
            .ok_or_else(|| Error::invalid(format!("unknown unit '{s}'")))
    }
}

/// Converts `value` from one unit to another of the same dimension.
pub fn convert_unit(value: f64, from: Unit, to: Unit) -> Result<f64> {
    if from.dimension() != to.dimension() {
        return Err(Error::UnsupportedUnit {
            from: from.to_string(),
            to: to.to_string(),
        });
    }
    if from == to {
        return Ok(value);
    }
    let (fm, fd) = from.scale();
    let (tm, td) = to.scale();
    let si = value * fm / fd;
    Ok(si * td / tm)
}

/// Shorthand for lab-unit constants: `kv_per_cm(100.0)` is 1e7 V/m.
pub fn kv_per_cm(v: f64) -> f64 {
    v * 1e5
}

pub fn micro_tesla(v: f64) -> f64 {
    v / 1e6
}

pub fn khz_cm_per_kv(v: f64) -> f64 {
    v / 1e2
}
