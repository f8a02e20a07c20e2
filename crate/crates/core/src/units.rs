//! Conversions between Hartree atomic units and the reporting units
//! (cm⁻¹ for energies and frequencies, fs/ps for times).

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// 1 Hartree in cm⁻¹.
pub const HARTREE_TO_CM1: f64 = 219_474.63;
/// 1 atomic unit of time in fs.
pub const AU_TIME_TO_FS: f64 = 0.024_188_84;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Energy,
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    /// Hartree (energy or angular frequency).
    HartreeEnergy,
    Wavenumber,
    AtomicTime,
    Femtosecond,
    Picosecond,
}

impl Unit {
    pub fn dimension(self) -> Dimension {
        match self {
            Unit::HartreeEnergy | Unit::Wavenumber => Dimension::Energy,
            Unit::AtomicTime | Unit::Femtosecond | Unit::Picosecond => Dimension::Time,
        }
    }

    /// Size of one of this unit expressed in the atomic unit of its dimension.
    fn in_atomic(self) -> f64 {
        match self {
            Unit::HartreeEnergy | Unit::AtomicTime => 1.0,
            Unit::Wavenumber => 1.0 / HARTREE_TO_CM1,
            Unit::Femtosecond => 1.0 / AU_TIME_TO_FS,
            Unit::Picosecond => 1.0e3 / AU_TIME_TO_FS,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::HartreeEnergy => "au-energy",
            Unit::Wavenumber => "cm-1",
            Unit::AtomicTime => "au-time",
            Unit::Femtosecond => "fs",
            Unit::Picosecond => "ps",
        })
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "au-energy" | "hartree" | "Eh" => Unit::HartreeEnergy,
            "cm-1" | "cm^-1" | "wavenumber" => Unit::Wavenumber,
            "au-time" => Unit::AtomicTime,
            "fs" => Unit::Femtosecond,
            "ps" => Unit::Picosecond,
            _ => {
                return Err(Error::Unknown {
                    kind: "unit",
                    name: s.to_owned(),
                })
            }
        })
    }
}

/// Linear conversion of `value` between two units of the same dimension.
pub fn convert_units(value: f64, from: Unit, to: Unit) -> Result<f64> {
    if from.dimension() != to.dimension() {
        return Err(Error::UnsupportedUnits { from, to });
    }
    if from == to {
        return Ok(value);
    }
    Ok(value * from.in_atomic() / to.in_atomic())
}

pub fn au_to_cm1(energy: f64) -> f64 {
    energy * HARTREE_TO_CM1
}

pub fn cm1_to_au(wavenumber: f64) -> f64 {
    wavenumber / HARTREE_TO_CM1
}

pub fn au_to_fs(t: f64) -> f64 {
    t * AU_TIME_TO_FS
}

pub fn fs_to_au(t: f64) -> f64 {
    t / AU_TIME_TO_FS
}

pub fn ps_to_au(t: f64) -> f64 {
    t * 1.0e3 / AU_TIME_TO_FS
}

pub fn au_to_ps(t: f64) -> f64 {
    t * AU_TIME_TO_FS * 1.0e-3
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cavity_frequency_in_wavenumbers() {
        let v = convert_units(0.01, Unit::HartreeEnergy, Unit::Wavenumber).unwrap();
        assert_relative_eq!(v, 2194.7463, max_relative = 1e-9);
        assert_eq!(v.round(), 2195.0);
    }

    #[test]
    fn pulse_center_in_fs() {
        let v = convert_units(500.0, Unit::AtomicTime, Unit::Femtosecond).unwrap();
        assert_relative_eq!(v, 12.09442, max_relative = 1e-6);
        assert!((v - 12.1).abs() < 0.01);
    }

    #[test]
    fn electronic_lifetime_in_ps() {
        let v = convert_units(1.0e5, Unit::AtomicTime, Unit::Picosecond).unwrap();
        assert_relative_eq!(v, 2.418884, max_relative = 1e-9);
        assert_relative_eq!(ps_to_au(v), 1.0e5, max_relative = 1e-12);
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let err = convert_units(1.0, Unit::Wavenumber, Unit::Femtosecond).unwrap_err();
        assert!(matches!(err, Error::UnsupportedUnits { .. }));
    }

    #[test]
    fn round_trips() {
        for &(a, b) in &[
            (Unit::Femtosecond, Unit::Picosecond),
            (Unit::AtomicTime, Unit::Picosecond),
            (Unit::Wavenumber, Unit::HartreeEnergy),
        ] {
            let there = convert_units(3.25, a, b).unwrap();
            let back = convert_units(there, b, a).unwrap();
            assert_relative_eq!(back, 3.25, max_relative = 1e-14);
        }
    }
}
