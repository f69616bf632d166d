//! Physical constants and the handful of unit conversions the simulation
//! needs.
//!
//! Spectroscopic quantities enter in wavenumbers (cm⁻¹) and are carried as
//! [`Wavenumber`]; everything dynamical is SI. Conversions between the two
//! happen only through the methods here.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 values, SI units.
pub mod constants {
    /// Speed of light in vacuum, m/s.
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    /// Planck constant, J s.
    pub const PLANCK: f64 = 6.626_070_15e-34;
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Boltzmann constant, J/K.
    pub const BOLTZMANN: f64 = 1.380_649e-23;
    /// Vacuum permittivity, F/m.
    pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
    /// Unified atomic mass unit, kg.
    pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
    /// Atomic unit of electric dipole moment (e a₀), C m.
    pub const ATOMIC_UNIT_DIPOLE: f64 = 8.478_353_625_5e-30;
    /// One ångström in meters.
    pub const ANGSTROM: f64 = 1e-10;
}

use constants::*;

/// The constant set as a value, for callers that want to pass it around.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    pub speed_of_light: f64,
    pub hbar: f64,
    pub boltzmann: f64,
    pub vacuum_permittivity: f64,
    pub atomic_mass_unit: f64,
    pub atomic_unit_dipole: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        speed_of_light: SPEED_OF_LIGHT,
        hbar: HBAR,
        boltzmann: BOLTZMANN,
        vacuum_permittivity: VACUUM_PERMITTIVITY,
        atomic_mass_unit: ATOMIC_MASS_UNIT,
        atomic_unit_dipole: ATOMIC_UNIT_DIPOLE,
    };
}

/// 2πc expressed per cm⁻¹: multiplies a wavenumber to give rad/s.
const RAD_PER_S_PER_CM1: f64 = 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT * 100.0;

/// A spectroscopic quantity in cm⁻¹.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Wavenumber(f64);

impl Wavenumber {
    pub const ZERO: Wavenumber = Wavenumber(0.0);

    pub const fn new(cm1: f64) -> Self {
        Wavenumber(cm1)
    }

    /// Value in cm⁻¹.
    pub const fn cm1(self) -> f64 {
        self.0
    }

    /// Value in m⁻¹.
    pub fn per_meter(self) -> f64 {
        self.0 * 100.0
    }

    /// ω = 2πc·ν̃.
    pub fn to_angular_frequency(self) -> f64 {
        self.0 * RAD_PER_S_PER_CM1
    }

    pub fn from_angular_frequency(omega: f64) -> Self {
        Wavenumber(omega / RAD_PER_S_PER_CM1)
    }

    /// Photon energy hcν̃ in joules.
    pub fn to_joules(self) -> f64 {
        PLANCK * SPEED_OF_LIGHT * self.per_meter()
    }

    pub fn from_joules(energy: f64) -> Self {
        Wavenumber(energy / (PLANCK * SPEED_OF_LIGHT * 100.0))
    }

    /// Vacuum wavelength in meters.
    pub fn wavelength(self) -> f64 {
        1.0 / self.per_meter()
    }

    pub fn abs(self) -> Self {
        Wavenumber(self.0.abs())
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl fmt::Display for Wavenumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} cm^-1", self.0)
    }
}

impl Add for Wavenumber {
    type Output = Wavenumber;
    fn add(self, rhs: Wavenumber) -> Wavenumber {
        Wavenumber(self.0 + rhs.0)
    }
}

impl Sub for Wavenumber {
    type Output = Wavenumber;
    fn sub(self, rhs: Wavenumber) -> Wavenumber {
        Wavenumber(self.0 - rhs.0)
    }
}

impl Neg for Wavenumber {
    type Output = Wavenumber;
    fn neg(self) -> Wavenumber {
        Wavenumber(-self.0)
    }
}

impl Mul<f64> for Wavenumber {
    type Output = Wavenumber;
    fn mul(self, rhs: f64) -> Wavenumber {
        Wavenumber(self.0 * rhs)
    }
}

impl Div<f64> for Wavenumber {
    type Output = Wavenumber;
    fn div(self, rhs: f64) -> Wavenumber {
        Wavenumber(self.0 / rhs)
    }
}

impl Div for Wavenumber {
    type Output = f64;
    fn div(self, rhs: Wavenumber) -> f64 {
        self.0 / rhs.0
    }
}

pub fn wavenumber_to_angular_frequency(w: Wavenumber) -> f64 {
    w.to_angular_frequency()
}

/// k_B T expressed as a wavenumber.
pub fn thermal_wavenumber(temperature: f64) -> Wavenumber {
    Wavenumber::from_joules(BOLTZMANN * temperature)
}

/// Photon recoil velocity ħk/M for a photon of the given wavelength.
pub fn photon_recoil_velocity(wavelength: f64, mass: f64) -> Result<f64> {
    if !(wavelength > 0.0) {
        return Err(Error::invalid(
            "wavelength",
            format!("must be positive, got {wavelength}"),
        ));
    }
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::invalid(
            "mass",
            format!("must be positive, got {mass}"),
        ));
    }
    let k = 2.0 * std::f64::consts::PI / wavelength;
    Ok(HBAR * k / mass)
}
