//! Laser–molecule coupling: rovibronic line list, natural widths, coupling
//! constants, dominant-transition selection, dressed-state shifts and the
//! closed-form deflection angle.
//!
//! Each lower level is treated as a two-level system with its most strongly
//! coupled upper level (largest |g/δ|). The detuning convention is
//! `δ = E_upper − E_lower − ħω`, so δ > 0 means the laser sits below the line.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::molecule::{compensated_sum, ElectronicState, MoleculePair, RovibronicLevel};
use crate::rotation::{honl_london, l_factor};
use crate::units::constants::{ATOMIC_UNIT_DIPOLE, HBAR, SPEED_OF_LIGHT, VACUUM_PERMITTIVITY};
use crate::units::{photon_recoil_velocity, Wavenumber};
use crate::vibration::{MorseWell, OverlapMatrix};

/// Nonresonance threshold: lines with |δ| ≤ 10 g are considered resonant.
pub const DEFAULT_NONRESONANCE_THRESHOLD: f64 = 10.0;

/// Monochromatic standing-wave mode
/// `E₀ exp(−(x²+y²)/2w²) cos(kz) cos(ωt)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaserField {
    /// Laser frequency as a wavenumber.
    pub frequency: Wavenumber,
    /// Power, W.
    pub power: f64,
    /// Gaussian waist `w` of the field amplitude, m.
    pub waist: f64,
}

impl LaserField {
    pub fn new(frequency: Wavenumber, power: f64, waist: f64) -> Result<Self> {
        if !(frequency.cm1() > 0.0) || !frequency.is_finite() {
            return Err(Error::invalid("laser frequency", "must be positive"));
        }
        if !(power >= 0.0) || !power.is_finite() {
            return Err(Error::invalid("power", "must be non-negative"));
        }
        if !(waist > 0.0) || !waist.is_finite() {
            return Err(Error::invalid("waist", "must be positive"));
        }
        Ok(LaserField {
            frequency,
            power,
            waist,
        })
    }

    /// Builds the field from the effective interaction length `l = √A`.
    pub fn with_interaction_length(frequency: Wavenumber, power: f64, length: f64) -> Result<Self> {
        Self::new(frequency, power, length / PI.sqrt())
    }

    pub fn tuned_to(&self, frequency: Wavenumber) -> Self {
        LaserField { frequency, ..*self }
    }

    pub fn angular_frequency(&self) -> f64 {
        self.frequency.to_angular_frequency()
    }

    pub fn wavelength(&self) -> f64 {
        self.frequency.wavelength()
    }

    pub fn wavevector(&self) -> f64 {
        2.0 * PI / self.wavelength()
    }

    /// Area of the Gaussian intensity profile, `∫∫ e^{−(x²+y²)/w²} = π w²`.
    pub fn effective_area(&self) -> f64 {
        PI * self.waist * self.waist
    }

    /// `l = √A`.
    pub fn interaction_length(&self) -> f64 {
        self.effective_area().sqrt()
    }

    /// Power per effective area, W/m².
    pub fn intensity(&self) -> f64 {
        self.power / self.effective_area()
    }

    pub fn transit_time(&self, velocity: f64) -> f64 {
        self.interaction_length() / velocity
    }

    /// Raman–Nath bound on the deflection angle, λ/l.
    pub fn raman_nath_bound(&self) -> f64 {
        self.wavelength() / self.interaction_length()
    }
}

/// One M-resolved dipole-allowed line `|f ν J M⟩ ↔ |e ν' J' M⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionLine {
    pub lower: RovibronicLevel,
    pub upper: RovibronicLevel,
    pub frequency: Wavenumber,
    /// Partial natural width of this line.
    pub gamma: Wavenumber,
    /// Vibrational overlap R_ν^ν'.
    pub overlap: f64,
    pub l_factor: f64,
    pub honl_london: f64,
    /// Coupling at unit mode function.
    pub g: Wavenumber,
    /// Detuning from the laser the list was built for.
    pub detuning: Wavenumber,
}

impl TransitionLine {
    pub fn detuning_at(&self, laser: Wavenumber) -> Wavenumber {
        self.frequency - laser
    }

    /// |g/δ| at the given laser frequency (infinite on resonance).
    pub fn coupling_ratio_at(&self, laser: Wavenumber) -> f64 {
        let d = self.detuning_at(laser).cm1().abs();
        if d == 0.0 {
            f64::INFINITY
        } else {
            self.g.cm1() / d
        }
    }

    /// Same line seen from another laser tuning and power.
    pub fn retuned(&self, laser: &LaserField) -> Self {
        TransitionLine {
            g: coupling_g(self, laser),
            detuning: self.detuning_at(laser.frequency),
            ..*self
        }
    }
}

/// Partial natural width of a rovibronic line,
/// `Γ = ω³ d² |R|² S / ((2J'+1) 3π ε₀ ħ c³)`.
pub fn line_width(
    dipole_au: f64,
    overlap: f64,
    frequency: Wavenumber,
    j: u32,
    j_prime: u32,
) -> Result<Wavenumber> {
    if !(frequency.cm1() > 0.0) {
        return Err(Error::invalid(
            "frequency",
            "line frequency must be positive",
        ));
    }
    if !(dipole_au >= 0.0) {
        return Err(Error::invalid("dipole_au", "must be non-negative"));
    }
    let s = honl_london(j, j_prime)?;
    let d = dipole_au * ATOMIC_UNIT_DIPOLE;
    let omega = frequency.to_angular_frequency();
    let rate = omega.powi(3) * d * d * overlap * overlap * s
        / ((2 * j_prime + 1) as f64
            * 3.0
            * PI
            * VACUUM_PERMITTIVITY
            * HBAR
            * SPEED_OF_LIGHT.powi(3));
    Ok(Wavenumber::from_angular_frequency(rate))
}

/// Peak coupling from the line parameters:
/// `g² = 3λ³/(16π²ħc) · Γ · (2J'+1)|L|²/S · I/A`, with `I/A` the energy flux
/// power/area and all frequencies angular.
pub fn coupling_from_parts(
    frequency: Wavenumber,
    gamma: Wavenumber,
    l: f64,
    s: f64,
    j_prime: u32,
    laser: &LaserField,
) -> Wavenumber {
    if laser.power == 0.0 || gamma.cm1() == 0.0 || l == 0.0 {
        return Wavenumber::ZERO;
    }
    let lambda = frequency.wavelength();
    let g2 = 3.0 * lambda.powi(3) / (16.0 * PI * PI * HBAR * SPEED_OF_LIGHT)
        * gamma.to_angular_frequency()
        * ((2 * j_prime + 1) as f64 * l * l / s)
        * laser.intensity();
    Wavenumber::from_angular_frequency(g2.sqrt())
}

pub fn coupling_g(line: &TransitionLine, laser: &LaserField) -> Wavenumber {
    coupling_from_parts(
        line.frequency,
        line.gamma,
        line.l_factor,
        line.honl_london,
        line.upper.j,
        laser,
    )
}

/// Outcome of picking the strongest coupled line of a lower level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DominantTransition<'a> {
    Line(&'a TransitionLine),
    /// No line couples this level; it is not deflected.
    Unaffected,
}

impl<'a> DominantTransition<'a> {
    pub fn line(self) -> Option<&'a TransitionLine> {
        match self {
            DominantTransition::Line(l) => Some(l),
            DominantTransition::Unaffected => None,
        }
    }
}

fn dominance_order(
    a: &TransitionLine,
    b: &TransitionLine,
    laser: Wavenumber,
) -> std::cmp::Ordering {
    // larger |g/δ| first, then smaller |δ|, then lower ν', then lower J'
    b.coupling_ratio_at(laser)
        .total_cmp(&a.coupling_ratio_at(laser))
        .then_with(|| {
            a.detuning_at(laser)
                .cm1()
                .abs()
                .total_cmp(&b.detuning_at(laser).cm1().abs())
        })
        .then(a.upper.nu.cmp(&b.upper.nu))
        .then(a.upper.j.cmp(&b.upper.j))
}

/// Strongest line of `lower` at the laser frequency the lines were built for.
pub fn select_dominant_transition<'a>(
    lower: &RovibronicLevel,
    lines: &'a [TransitionLine],
) -> DominantTransition<'a> {
    lines
        .iter()
        .filter(|l| l.lower == *lower)
        .min_by(|a, b| {
            let laser_a = a.frequency - a.detuning;
            dominance_order(a, b, laser_a)
        })
        .map_or(DominantTransition::Unaffected, DominantTransition::Line)
}

/// Strongest of `candidates` at an arbitrary laser frequency.
pub fn select_dominant_at<'a, I>(candidates: I, laser: Wavenumber) -> Option<&'a TransitionLine>
where
    I: IntoIterator<Item = &'a TransitionLine>,
{
    candidates
        .into_iter()
        .min_by(|a, b| dominance_order(a, b, laser))
}

/// Light shift of the lower dressed state relative to the bare level,
/// `sign(δ)·[√(g²f² + δ²/4) − |δ|/2]`. Units follow the inputs.
pub fn dressed_shift_value(g: f64, delta: f64, f_mode: f64) -> f64 {
    let gf2 = (g * f_mode).powi(2);
    let half = delta.abs() / 2.0;
    let root = (gf2 + half * half).sqrt();
    // √(a+b²) − b = a/(√(a+b²) + b), free of cancellation
    let magnitude = if root + half > 0.0 {
        gf2 / (root + half)
    } else {
        0.0
    };
    delta.signum() * magnitude
}

pub fn dressed_shift(g: Wavenumber, delta: Wavenumber, f_mode: f64) -> Result<Wavenumber> {
    if !(f_mode.abs() <= 1.0) {
        return Err(Error::invalid(
            "f_mode",
            format!("must lie in [-1, 1], got {f_mode}"),
        ));
    }
    Ok(Wavenumber::new(dressed_shift_value(
        g.cm1(),
        delta.cm1(),
        f_mode,
    )))
}

/// Lower level dressed by its dominant line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedState {
    pub level: RovibronicLevel,
    pub line: TransitionLine,
}

impl DressedState {
    pub fn shift(&self, f_mode: f64) -> Result<Wavenumber> {
        dressed_shift(self.line.g, self.line.detuning, f_mode)
    }
}

/// `|δ| > threshold·g`.
pub fn is_nonresonant(g: Wavenumber, delta: Wavenumber, threshold: f64) -> bool {
    delta.cm1().abs() > threshold * g.cm1()
}

/// Closed-form deflection with its Raman–Nath check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeflectionEstimate {
    /// α in radians, signed by δ.
    pub angle: f64,
    pub raman_nath_bound: f64,
    pub raman_nath_ok: bool,
}

/// `α = v_rec g² l / (v_x² δ)` at the point of maximal gradient
/// (sin 2kz = 1).
pub fn deflection_angle(
    line: &TransitionLine,
    laser: &LaserField,
    v_x: f64,
    mass: f64,
    threshold: f64,
) -> Result<DeflectionEstimate> {
    if !(v_x > 0.0) {
        return Err(Error::invalid("v_x", "must be positive"));
    }
    let delta = line.detuning_at(laser.frequency);
    let g = coupling_g(line, laser);
    if !is_nonresonant(g, delta, threshold) {
        return Err(Error::Resonant {
            level: line.lower,
            delta_cm1: delta.cm1(),
            g_cm1: g.cm1(),
            threshold,
        });
    }
    let v_rec = photon_recoil_velocity(laser.wavelength(), mass)?;
    let g_rate = g.to_angular_frequency();
    let angle = v_rec * g_rate * g_rate * laser.interaction_length()
        / (v_x * v_x * delta.to_angular_frequency());
    let bound = laser.raman_nath_bound();
    Ok(DeflectionEstimate {
        angle,
        raman_nath_bound: bound,
        raman_nath_ok: angle.abs() < bound,
    })
}

/// Both electronic states with everything needed to build lines: Morse
/// wells, the Franck–Condon block for the populated lower levels and lazily
/// computed total decay widths of upper levels.
#[derive(Debug)]
pub struct Spectrum {
    pub molecule: MoleculePair,
    pub lower_well: MorseWell,
    pub upper_well: MorseWell,
    pub overlaps: OverlapMatrix,
    decay_overlaps: Mutex<Option<Arc<OverlapMatrix>>>,
}

impl Spectrum {
    /// Prepares overlaps for lower ν ≤ `max_lower_nu` against every bound
    /// upper level.
    pub fn new(molecule: MoleculePair, max_lower_nu: u32) -> Result<Self> {
        if molecule.lower.omega != 0 || molecule.upper.omega != 0 {
            return Err(Error::invalid(
                "Omega",
                "line lists are implemented for Sigma-Sigma transitions",
            ));
        }
        let lower_well = MorseWell::from_constants(&molecule.lower)?;
        let upper_well = MorseWell::from_constants(&molecule.upper)?;
        let overlaps = OverlapMatrix::compute(
            &lower_well,
            &upper_well,
            0..=max_lower_nu,
            0..=upper_well.nu_max,
        )?;
        Ok(Spectrum {
            molecule,
            lower_well,
            upper_well,
            overlaps,
            decay_overlaps: Mutex::new(None),
        })
    }

    pub fn max_lower_nu(&self) -> u32 {
        *self.overlaps.lower.end()
    }

    pub fn line_frequency(
        &self,
        nu: u32,
        j: u32,
        nu_prime: u32,
        j_prime: u32,
    ) -> Result<Wavenumber> {
        Ok(self.molecule.upper.level_energy(nu_prime, j_prime)?
            - self.molecule.lower.level_energy(nu, j)?)
    }

    /// Overlaps of every bound lower level with upper levels `0..=nu_prime`,
    /// computed once and extended when a higher ν' is requested.
    fn decay_overlaps(&self, nu_prime: u32) -> Result<Arc<OverlapMatrix>> {
        let mut cache = self.decay_overlaps.lock().expect("decay cache poisoned");
        if let Some(m) = cache.as_ref() {
            if m.upper.contains(&nu_prime) {
                return Ok(Arc::clone(m));
            }
        }
        let top = nu_prime.max(cache.as_ref().map_or(0, |m| *m.upper.end()));
        let m = Arc::new(OverlapMatrix::compute(
            &self.lower_well,
            &self.upper_well,
            0..=self.lower_well.nu_max,
            0..=top,
        )?);
        *cache = Some(Arc::clone(&m));
        Ok(m)
    }

    /// Makes later [`Spectrum::upper_decay_width`] calls up to `nu_prime`
    /// cheap.
    pub fn prepare_decay_widths(&self, nu_prime: u32) -> Result<()> {
        self.decay_overlaps(nu_prime).map(|_| ())
    }

    /// Total radiative width of upper level `(ν', J')`: the sum of partial
    /// widths into every bound lower level on both branches.
    pub fn upper_decay_width(&self, nu_prime: u32, j_prime: u32) -> Result<Wavenumber> {
        let overlaps = self.decay_overlaps(nu_prime)?;
        let d = self.molecule.dipole_au();
        let mut parts = Vec::new();
        for nu in 0..=self.lower_well.nu_max {
            let r = overlaps.get(nu, nu_prime).unwrap_or(0.0);
            for j in [j_prime.checked_sub(1), Some(j_prime + 1)]
                .into_iter()
                .flatten()
            {
                let freq = self.line_frequency(nu, j, nu_prime, j_prime)?;
                if freq.cm1() <= 0.0 {
                    continue;
                }
                parts.push(line_width(d, r, freq, j, j_prime)?.cm1());
            }
        }
        Ok(Wavenumber::new(compensated_sum(parts)))
    }

    /// Every dipole-allowed line (J' = J ± 1, M' = M) from `lower_levels`
    /// within ±`window` of the laser. Output order is by frequency and then
    /// quantum numbers, independent of the input order.
    pub fn build_line_list(
        &self,
        lower_levels: &[RovibronicLevel],
        laser: &LaserField,
        window: Wavenumber,
    ) -> Result<Vec<TransitionLine>> {
        let mut by_band: BTreeMap<(u32, u32), Vec<i32>> = BTreeMap::new();
        for level in lower_levels {
            if level.state != ElectronicState::Lower {
                return Err(Error::InvalidQuantumNumbers(format!(
                    "{level} is not a lower-state level"
                )));
            }
            if level.nu > self.max_lower_nu() {
                return Err(Error::invalid(
                    "lower levels",
                    format!(
                        "nu={} exceeds the prepared range 0..={}",
                        level.nu,
                        self.max_lower_nu()
                    ),
                ));
            }
            by_band
                .entry((level.nu, level.j))
                .or_default()
                .push(level.m);
        }
        let dipole = self.molecule.dipole_au();
        let mut lines = Vec::new();
        for (&(nu, j), ms) in &mut by_band {
            ms.sort_unstable();
            ms.dedup();
            let e_lower = self.molecule.lower.level_energy(nu, j)?;
            for nu_prime in 0..=self.upper_well.nu_max {
                for j_prime in [j.checked_sub(1), Some(j + 1)].into_iter().flatten() {
                    let freq = self.molecule.upper.level_energy(nu_prime, j_prime)? - e_lower;
                    if (freq - laser.frequency).cm1().abs() > window.cm1() || freq.cm1() <= 0.0 {
                        continue;
                    }
                    let overlap = self.overlaps.get(nu, nu_prime).unwrap_or(0.0);
                    let gamma = line_width(dipole, overlap, freq, j, j_prime)?;
                    let s = honl_london(j, j_prime)?;
                    for &m in ms.iter() {
                        if m.unsigned_abs() > j_prime {
                            continue;
                        }
                        let l = l_factor(j, m, 0, j_prime, m, 0)?;
                        if l == 0.0 {
                            continue;
                        }
                        let g = coupling_from_parts(freq, gamma, l, s, j_prime, laser);
                        lines.push(TransitionLine {
                            lower: RovibronicLevel {
                                state: ElectronicState::Lower,
                                nu,
                                j,
                                m,
                                omega: 0,
                            },
                            upper: RovibronicLevel {
                                state: ElectronicState::Upper,
                                nu: nu_prime,
                                j: j_prime,
                                m,
                                omega: 0,
                            },
                            frequency: freq,
                            gamma,
                            overlap,
                            l_factor: l,
                            honl_london: s,
                            g,
                            detuning: freq - laser.frequency,
                        });
                    }
                }
            }
        }
        lines.sort_by(|a, b| {
            a.frequency
                .cm1()
                .total_cmp(&b.frequency.cm1())
                .then(a.lower.cmp(&b.lower))
                .then(a.upper.cmp(&b.upper))
        });
        Ok(lines)
    }
}

/// Distinct line positions in ascending order (M components collapse).
pub fn distinct_frequencies(lines: &[TransitionLine]) -> Vec<Wavenumber> {
    let mut f: Vec<Wavenumber> = lines.iter().map(|l| l.frequency).collect();
    f.sort_by(|a, b| a.cm1().total_cmp(&b.cm1()));
    f.dedup_by(|a, b| (a.cm1() - b.cm1()).abs() < 1e-9);
    f
}

/// Smallest gap between distinct line positions.
pub fn min_adjacent_spacing(lines: &[TransitionLine]) -> Option<Wavenumber> {
    distinct_frequencies(lines)
        .windows(2)
        .map(|w| w[1] - w[0])
        .min_by(|a, b| a.cm1().total_cmp(&b.cm1()))
}

/// Distance from `frequency` to the closest other line position.
pub fn nearest_neighbor_spacing(
    lines: &[TransitionLine],
    frequency: Wavenumber,
) -> Option<Wavenumber> {
    distinct_frequencies(lines)
        .into_iter()
        .filter(|f| (f.cm1() - frequency.cm1()).abs() > 1e-9)
        .map(|f| (f - frequency).abs())
        .min_by(|a, b| a.cm1().total_cmp(&b.cm1()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanSettings {
    pub start: Wavenumber,
    pub stop: Wavenumber,
    pub points: usize,
    pub threshold: f64,
    /// Longitudinal velocity used for the deflection angles, m/s.
    pub v_x: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanPoint {
    pub frequency: Wavenumber,
    pub state: RovibronicLevel,
    /// Closed-form angle; NaN exactly on resonance.
    pub alpha: f64,
    pub masked: bool,
    pub g: Wavenumber,
    pub delta: Wavenumber,
    pub upper_nu: u32,
    pub upper_j: u32,
}

/// Deflection angle of every participating state versus laser frequency.
#[derive(Clone, Debug)]
pub struct FrequencyScan {
    pub frequencies: Vec<Wavenumber>,
    /// Lower levels with at least one line inside the scanned range.
    pub states: Vec<RovibronicLevel>,
    /// Row-major: all states for frequency 0, then frequency 1, ...
    pub points: Vec<ScanPoint>,
}

impl FrequencyScan {
    pub fn at(&self, frequency_index: usize) -> &[ScanPoint] {
        let n = self.states.len();
        &self.points[frequency_index * n..(frequency_index + 1) * n]
    }

    /// Curve of one state across the scan.
    pub fn curve(&self, state: &RovibronicLevel) -> Option<Vec<ScanPoint>> {
        let idx = self.states.iter().position(|s| s == state)?;
        let n = self.states.len();
        Some(
            (0..self.frequencies.len())
                .map(|i| self.points[i * n + idx])
                .collect(),
        )
    }
}

/// Lower levels with at least one line inside a scan range, each with the
/// lines that compete for dominance while the laser sweeps that range.
#[derive(Clone, Debug)]
pub struct ScanParticipants {
    pub states: Vec<RovibronicLevel>,
    candidates: Vec<Vec<TransitionLine>>,
}

impl ScanParticipants {
    pub fn new(
        spectrum: &Spectrum,
        lower_levels: &[RovibronicLevel],
        template: &LaserField,
        settings: &ScanSettings,
    ) -> Result<Self> {
        if !(settings.stop.cm1() > settings.start.cm1()) {
            return Err(Error::invalid("scan range", "stop must exceed start"));
        }
        let span = settings.stop - settings.start;
        let center = settings.start + span / 2.0;
        // Lines just outside the range still compete for dominance inside it.
        let window = span / 2.0 + span;
        let lines = spectrum.build_line_list(lower_levels, &template.tuned_to(center), window)?;
        let mut per_state: BTreeMap<RovibronicLevel, Vec<TransitionLine>> = BTreeMap::new();
        for line in lines {
            per_state.entry(line.lower).or_default().push(line);
        }
        per_state.retain(|_, ls| {
            ls.iter()
                .any(|l| l.frequency >= settings.start && l.frequency <= settings.stop)
        });
        Ok(ScanParticipants {
            states: per_state.keys().copied().collect(),
            candidates: per_state.into_values().collect(),
        })
    }

    /// Angle of every participating state at one laser frequency.
    pub fn evaluate(
        &self,
        template: &LaserField,
        frequency: Wavenumber,
        settings: &ScanSettings,
        mass: f64,
    ) -> Result<Vec<ScanPoint>> {
        let laser = template.tuned_to(frequency);
        let v_rec = photon_recoil_velocity(laser.wavelength(), mass)?;
        let length = laser.interaction_length();
        Ok(self
            .states
            .iter()
            .zip(&self.candidates)
            .map(|(state, cands)| {
                let line =
                    select_dominant_at(cands, frequency).expect("participating states have lines");
                let g = coupling_g(line, &laser);
                let delta = line.detuning_at(frequency);
                let alpha = if delta.cm1() == 0.0 {
                    f64::NAN
                } else {
                    let gr = g.to_angular_frequency();
                    v_rec * gr * gr * length
                        / (settings.v_x * settings.v_x * delta.to_angular_frequency())
                };
                ScanPoint {
                    frequency,
                    state: *state,
                    alpha,
                    masked: !is_nonresonant(g, delta, settings.threshold),
                    g,
                    delta,
                    upper_nu: line.upper.nu,
                    upper_j: line.upper.j,
                }
            })
            .collect())
    }
}

/// Sweeps the laser across `[start, stop]` and evaluates each participating
/// state's deflection through its dominant line at every frequency. Points
/// violating the nonresonance condition are kept and flagged.
pub fn scan_frequencies(
    spectrum: &Spectrum,
    lower_levels: &[RovibronicLevel],
    template: &LaserField,
    settings: &ScanSettings,
) -> Result<FrequencyScan> {
    if settings.points < 2 {
        return Err(Error::invalid("points", "a scan needs at least two points"));
    }
    let participants = ScanParticipants::new(spectrum, lower_levels, template, settings)?;
    let mass = spectrum.molecule.mass();
    let step = (settings.stop - settings.start) / (settings.points - 1) as f64;
    let frequencies: Vec<Wavenumber> = (0..settings.points)
        .map(|i| settings.start + step * i as f64)
        .collect();
    let rows: Vec<Result<Vec<ScanPoint>>> = frequencies
        .par_iter()
        .map(|&freq| participants.evaluate(template, freq, settings, mass))
        .collect();
    let mut points = Vec::with_capacity(frequencies.len() * participants.states.len());
    for row in rows {
        points.extend(row?);
    }
    Ok(FrequencyScan {
        frequencies,
        states: participants.states,
        points,
    })
}
