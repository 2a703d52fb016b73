//! Conversion between natural units (`ħ = c = m_e = 1`) and laboratory units.

use std::fmt;
use std::str::FromStr;

use chr_core::ELECTRON_MASS_EV;
use thiserror::Error;

/// `ħ` in eV·s.
const HBAR_EV_S: f64 = 6.582_119_569e-16;
/// `ħc` in eV·m.
const HBAR_C_EV_M: f64 = 1.973_269_804e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Energy,
    Time,
    Length,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Energy => "energy",
            Dimension::Time => "time",
            Dimension::Length => "length",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    ElectronMass,
    ElectronVolt,
    MegaElectronVolt,
    ComptonTime,
    Attosecond,
    Femtosecond,
    Picosecond,
    Second,
    ComptonWavelength,
    Nanometre,
    Micrometre,
    Centimetre,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UnitError {
    #[error("cannot convert {from} ({from_dim}) to {to} ({to_dim})")]
    IncompatibleDimensions {
        from: Unit,
        to: Unit,
        from_dim: Dimension,
        to_dim: Dimension,
    },
    #[error("unknown unit '{0}'")]
    Unknown(String),
}

impl Unit {
    pub const ALL: [Unit; 12] = [
        Unit::ElectronMass,
        Unit::ElectronVolt,
        Unit::MegaElectronVolt,
        Unit::ComptonTime,
        Unit::Attosecond,
        Unit::Femtosecond,
        Unit::Picosecond,
        Unit::Second,
        Unit::ComptonWavelength,
        Unit::Nanometre,
        Unit::Micrometre,
        Unit::Centimetre,
    ];

    pub fn dimension(self) -> Dimension {
        use Unit::*;
        match self {
            ElectronMass | ElectronVolt | MegaElectronVolt => Dimension::Energy,
            ComptonTime | Attosecond | Femtosecond | Picosecond | Second => Dimension::Time,
            ComptonWavelength | Nanometre | Micrometre | Centimetre => Dimension::Length,
        }
    }

    /// Size of one unit expressed in the natural unit of its dimension.
    pub fn in_natural(self) -> f64 {
        let t_c = UnitContext::STANDARD.compton_time_s;
        let l_c = UnitContext::STANDARD.compton_wavelength_m;
        use Unit::*;
        match self {
            ElectronMass | ComptonTime | ComptonWavelength => 1.0,
            ElectronVolt => 1.0 / ELECTRON_MASS_EV,
            MegaElectronVolt => 1e6 / ELECTRON_MASS_EV,
            Attosecond => 1e-18 / t_c,
            Femtosecond => 1e-15 / t_c,
            Picosecond => 1e-12 / t_c,
            Second => 1.0 / t_c,
            Nanometre => 1e-9 / l_c,
            Micrometre => 1e-6 / l_c,
            Centimetre => 1e-2 / l_c,
        }
    }

    pub fn symbol(self) -> &'static str {
        use Unit::*;
        match self {
            ElectronMass => "m_e",
            ElectronVolt => "eV",
            MegaElectronVolt => "MeV",
            ComptonTime => "t_c",
            Attosecond => "as",
            Femtosecond => "fs",
            Picosecond => "ps",
            Second => "s",
            ComptonWavelength => "lambda_c",
            Nanometre => "nm",
            Micrometre => "um",
            Centimetre => "cm",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Unit {
    type Err = UnitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unit = match s {
            "m_e" | "me" => Unit::ElectronMass,
            "eV" | "ev" => Unit::ElectronVolt,
            "MeV" => Unit::MegaElectronVolt,
            "t_c" | "tc" => Unit::ComptonTime,
            "as" => Unit::Attosecond,
            "fs" => Unit::Femtosecond,
            "ps" => Unit::Picosecond,
            "s" => Unit::Second,
            "lambda_c" | "λ_c" => Unit::ComptonWavelength,
            "nm" => Unit::Nanometre,
            "um" | "µm" | "μm" => Unit::Micrometre,
            "cm" => Unit::Centimetre,
            other => return Err(UnitError::Unknown(other.to_owned())),
        };
        Ok(unit)
    }
}

/// Physical constants behind the natural-unit conversions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitContext {
    pub electron_mass_ev: f64,
    /// `t_c = ħ/(m_e c²)` in seconds.
    pub compton_time_s: f64,
    /// `λ_c = ħ/(m_e c)` in metres.
    pub compton_wavelength_m: f64,
}

impl UnitContext {
    pub const STANDARD: UnitContext = UnitContext {
        electron_mass_ev: ELECTRON_MASS_EV,
        compton_time_s: HBAR_EV_S / ELECTRON_MASS_EV,
        compton_wavelength_m: HBAR_C_EV_M / ELECTRON_MASS_EV,
    };
}

impl Default for UnitContext {
    fn default() -> Self {
        Self::STANDARD
    }
}

pub fn convert_units(value: f64, from: Unit, to: Unit) -> Result<f64, UnitError> {
    if from.dimension() != to.dimension() {
        return Err(UnitError::IncompatibleDimensions {
            from,
            to,
            from_dim: from.dimension(),
            to_dim: to.dimension(),
        });
    }
    if from == to {
        return Ok(value);
    }
    Ok(value * from.in_natural() / to.in_natural())
}

/// Converts a natural-unit value into `to`.
pub fn from_natural(value: f64, to: Unit) -> f64 {
    value / to.in_natural()
}
