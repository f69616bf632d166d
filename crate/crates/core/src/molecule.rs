//! Electronic-state constants, rovibronic level energies and thermal
//! populations.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::units::constants::{ANGSTROM, ATOMIC_MASS_UNIT};
use crate::units::{thermal_wavenumber, Wavenumber};

/// Which of the two coupled electronic states a level belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElectronicState {
    /// The fundamental state `f` the molecules start in.
    Lower,
    /// The excited state `e` reached by the laser.
    Upper,
}

impl ElectronicState {
    pub fn symbol(self) -> char {
        match self {
            ElectronicState::Lower => 'f',
            ElectronicState::Upper => 'e',
        }
    }
}

/// Spectroscopic constants of one electronic state.
///
/// Energies follow the usual term-value expansion
/// `E_el + ω_e(ν+½) − ω_e x_e(ν+½)² + B_ν[J(J+1)−Ω²] − D[J(J+1)−Ω²]²`
/// with `B_ν = B_e − α_e(ν+½)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MolecularConstants {
    pub label: String,
    pub e_el: Wavenumber,
    pub omega_e: Wavenumber,
    pub omega_e_x_e: Wavenumber,
    pub b_e: Wavenumber,
    pub alpha_e: Wavenumber,
    pub d: Wavenumber,
    pub omega: i32,
    /// Equilibrium internuclear separation, m.
    pub r_e: f64,
    /// Reduced mass of the nuclei, kg.
    pub reduced_mass: f64,
    /// Total molecular mass, kg.
    pub mass: f64,
    /// Electronic transition dipole |d_f^e| in atomic units, if given.
    pub dipole_au: Option<f64>,
}

impl MolecularConstants {
    /// Checks the invariants a bound, rotating state has to satisfy.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.e_el.cm1(),
            self.omega_e.cm1(),
            self.omega_e_x_e.cm1(),
            self.b_e.cm1(),
            self.alpha_e.cm1(),
            self.d.cm1(),
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "constants",
                format!("{}: non-finite value", self.label),
            ));
        }
        if !(self.omega_e.cm1() > 0.0) {
            return Err(Error::invalid("omega_e", "must be positive"));
        }
        if self.omega_e_x_e.cm1() < 0.0 {
            return Err(Error::invalid("omega_e_x_e", "must be non-negative"));
        }
        if 2.0 * self.omega_e_x_e.cm1() >= self.omega_e.cm1() {
            return Err(Error::invalid(
                "omega_e_x_e",
                "2 omega_e x_e must stay below omega_e for a bound well",
            ));
        }
        if !(self.b_e.cm1() > 0.0) {
            return Err(Error::invalid("B_e", "must be positive"));
        }
        if self.d.cm1() < 0.0 {
            return Err(Error::invalid("D", "must be non-negative"));
        }
        if !(self.r_e > 0.0) {
            return Err(Error::invalid("r_e", "must be positive"));
        }
        if !(self.reduced_mass > 0.0) || !(self.mass > 0.0) {
            return Err(Error::invalid("mass", "masses must be positive"));
        }
        if let Some(d) = self.dipole_au {
            if !(d >= 0.0) {
                return Err(Error::invalid("dipole_au", "must be non-negative"));
            }
        }
        Ok(())
    }

    /// Highest bound vibrational level of the Morse well these constants
    /// describe; `None` for a harmonic state (`ω_e x_e = 0`).
    pub fn nu_max(&self) -> Option<u32> {
        if self.omega_e_x_e.cm1() <= 0.0 {
            return None;
        }
        let lambda = self.omega_e.cm1() / (2.0 * self.omega_e_x_e.cm1());
        Some((lambda - 0.5).floor().max(0.0) as u32)
    }

    pub fn b_nu(&self, nu: u32) -> Wavenumber {
        self.b_e - self.alpha_e * (nu as f64 + 0.5)
    }

    pub fn level_energy(&self, nu: u32, j: u32) -> Result<Wavenumber> {
        level_energy(self, nu, j, self.omega)
    }
}

/// Term value of the rovibronic level `(ν, J)` with projection `Ω`.
pub fn level_energy(c: &MolecularConstants, nu: u32, j: u32, omega: i32) -> Result<Wavenumber> {
    if let Some(nu_max) = c.nu_max() {
        if nu > nu_max {
            return Err(Error::UnboundLevel { nu, nu_max });
        }
    }
    if (j as i64) < (omega as i64).abs() {
        return Err(Error::InvalidQuantumNumbers(format!(
            "J={j} < |Omega|={}",
            omega.abs()
        )));
    }
    let v = nu as f64 + 0.5;
    let rot = j as f64 * (j as f64 + 1.0) - (omega as f64).powi(2);
    let e = c.e_el.cm1() + c.omega_e.cm1() * v - c.omega_e_x_e.cm1() * v * v
        + c.b_nu(nu).cm1() * rot
        - c.d.cm1() * rot * rot;
    Ok(Wavenumber::new(e))
}

/// Label of a rovibronic state `|n ν J M Ω⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RovibronicLevel {
    pub state: ElectronicState,
    pub nu: u32,
    pub j: u32,
    pub m: i32,
    pub omega: i32,
}

impl RovibronicLevel {
    pub fn new(state: ElectronicState, nu: u32, j: u32, m: i32, omega: i32) -> Result<Self> {
        if m.unsigned_abs() > j {
            return Err(Error::InvalidQuantumNumbers(format!(
                "|M|={} > J={j}",
                m.abs()
            )));
        }
        if omega.unsigned_abs() > j {
            return Err(Error::InvalidQuantumNumbers(format!(
                "|Omega|={} > J={j}",
                omega.abs()
            )));
        }
        Ok(RovibronicLevel {
            state,
            nu,
            j,
            m,
            omega,
        })
    }

    pub fn lower(nu: u32, j: u32, m: i32) -> Result<Self> {
        Self::new(ElectronicState::Lower, nu, j, m, 0)
    }
}

impl fmt::Display for RovibronicLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}(nu={}, J={}, M={})",
            self.state.symbol(),
            self.nu,
            self.j,
            self.m
        )
    }
}

/// A level together with its term value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Level {
    pub level: RovibronicLevel,
    pub energy: Wavenumber,
}

/// All M-resolved levels with `ν < max_nu` and `|Ω| ≤ J < max_j`, sorted by
/// energy (ties by quantum numbers).
pub fn enumerate_levels(
    c: &MolecularConstants,
    state: ElectronicState,
    max_nu: u32,
    max_j: u32,
) -> Result<Vec<Level>> {
    let mut out = Vec::new();
    let j_min = c.omega.unsigned_abs();
    for nu in 0..max_nu {
        for j in j_min..max_j {
            let energy = level_energy(c, nu, j, c.omega)?;
            for m in -(j as i32)..=(j as i32) {
                out.push(Level {
                    level: RovibronicLevel {
                        state,
                        nu,
                        j,
                        m,
                        omega: c.omega,
                    },
                    energy,
                });
            }
        }
    }
    out.sort_by(|a, b| {
        a.energy
            .cm1()
            .total_cmp(&b.energy.cm1())
            .then(a.level.cmp(&b.level))
    });
    Ok(out)
}

/// Boltzmann-populated set of M-resolved levels.
#[derive(Clone, Debug)]
pub struct ThermalEnsemble {
    pub temperature: f64,
    /// Exclusive bounds, as in [`enumerate_levels`].
    pub max_nu: u32,
    pub max_j: u32,
    pub levels: Vec<Level>,
    /// Normalized probability of each entry of `levels`.
    pub weights: Vec<f64>,
}

impl ThermalEnsemble {
    pub fn weight_of(&self, level: &RovibronicLevel) -> Option<f64> {
        self.levels
            .iter()
            .position(|l| l.level == *level)
            .map(|i| self.weights[i])
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Keeps only the levels accepted by `keep` and renormalizes. Returns the
    /// retained ensemble and the population fraction it carried.
    pub fn restrict(&self, mut keep: impl FnMut(&RovibronicLevel) -> bool) -> Result<(Self, f64)> {
        let (levels, raw): (Vec<Level>, Vec<f64>) = self
            .levels
            .iter()
            .zip(&self.weights)
            .filter(|(l, _)| keep(&l.level))
            .map(|(l, w)| (*l, *w))
            .unzip();
        let fraction = compensated_sum(raw.iter().copied());
        if levels.is_empty() || !(fraction > 0.0) {
            return Err(Error::invalid(
                "ensemble",
                "restriction leaves no populated level",
            ));
        }
        let weights = normalize(&raw);
        Ok((
            ThermalEnsemble {
                temperature: self.temperature,
                max_nu: self.max_nu,
                max_j: self.max_j,
                levels,
                weights,
            },
            fraction,
        ))
    }
}

/// Populates `levels` with weights ∝ exp(−(E − E_min)/k_B T), one weight
/// per M-resolved level.
pub fn thermal_weights(levels: &[Level], temperature: f64) -> Result<ThermalEnsemble> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::invalid(
            "temperature",
            format!("must be positive, got {temperature}"),
        ));
    }
    if levels.is_empty() {
        return Err(Error::invalid("levels", "empty level list"));
    }
    let kt = thermal_wavenumber(temperature).cm1();
    let e_min = levels
        .iter()
        .map(|l| l.energy.cm1())
        .fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = levels
        .iter()
        .map(|l| (-(l.energy.cm1() - e_min) / kt).exp())
        .collect();
    let max_nu = levels.iter().map(|l| l.level.nu + 1).max().unwrap_or(0);
    let max_j = levels.iter().map(|l| l.level.j + 1).max().unwrap_or(0);
    Ok(ThermalEnsemble {
        temperature,
        max_nu,
        max_j,
        levels: levels.to_vec(),
        weights: normalize(&raw),
    })
}

fn normalize(raw: &[f64]) -> Vec<f64> {
    let total = compensated_sum(raw.iter().copied());
    raw.iter().map(|w| w / total).collect()
}

/// Neumaier summation; the level lists run to 10⁵ entries.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct StateDocument {
    label: String,
    E_el_cm1: f64,
    omega_e_cm1: f64,
    omega_e_x_e_cm1: f64,
    B_e_cm1: f64,
    alpha_e_cm1: f64,
    D_cm1: f64,
    Omega: i32,
    r_e_angstrom: f64,
    reduced_mass_amu: f64,
    #[serde(default)]
    dipole_au: Option<f64>,
    /// Total mass; homonuclear molecules may omit it (M = 4μ).
    #[serde(default)]
    mass_amu: Option<f64>,
}

impl From<StateDocument> for MolecularConstants {
    fn from(d: StateDocument) -> Self {
        let reduced_mass = d.reduced_mass_amu * ATOMIC_MASS_UNIT;
        MolecularConstants {
            label: d.label,
            e_el: Wavenumber::new(d.E_el_cm1),
            omega_e: Wavenumber::new(d.omega_e_cm1),
            omega_e_x_e: Wavenumber::new(d.omega_e_x_e_cm1),
            b_e: Wavenumber::new(d.B_e_cm1),
            alpha_e: Wavenumber::new(d.alpha_e_cm1),
            d: Wavenumber::new(d.D_cm1),
            omega: d.Omega,
            r_e: d.r_e_angstrom * ANGSTROM,
            reduced_mass,
            mass: d
                .mass_amu
                .map_or(4.0 * reduced_mass, |m| m * ATOMIC_MASS_UNIT),
            dipole_au: d.dipole_au,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantsFile {
    lower: StateDocument,
    upper: StateDocument,
}

/// The two electronic states coupled by the laser.
#[derive(Clone, Debug, PartialEq)]
pub struct MoleculePair {
    pub lower: MolecularConstants,
    pub upper: MolecularConstants,
}

impl MoleculePair {
    /// Transition dipole |d_f^e| in atomic units, carried by the lower state.
    pub fn dipole_au(&self) -> f64 {
        self.lower.dipole_au.unwrap_or(0.0)
    }

    pub fn mass(&self) -> f64 {
        self.lower.mass
    }

    /// Parses a constants document with `[lower]` and `[upper]` tables.
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let file: ConstantsFile = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        if file.lower.dipole_au.is_none() {
            return Err(Error::Parse {
                path: origin.to_path_buf(),
                message: "the [lower] document must carry dipole_au".into(),
            });
        }
        let pair = MoleculePair {
            lower: file.lower.into(),
            upper: file.upper.into(),
        };
        pair.lower.validate()?;
        pair.upper.validate()?;
        Ok(pair)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text, path)
    }
}
