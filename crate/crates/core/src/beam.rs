//! Monte Carlo transit of a molecular beam through the standing wave.
//!
//! Each molecule is a two-level system (its lower level and the dominant
//! upper level). The transverse coordinate is frozen during the transit and
//! the dressed-state force is integrated along `x = v_x t`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interaction::{
    coupling_g, is_nonresonant, select_dominant_at, LaserField, Spectrum, TransitionLine,
};
use crate::molecule::{RovibronicLevel, ThermalEnsemble};
use crate::units::constants::HBAR;
use crate::units::{photon_recoil_velocity, Wavenumber};

/// Default number of velocity-Verlet steps across `[−4w/v_x, 4w/v_x]`.
pub const DEFAULT_TIME_STEPS: usize = 2000;
/// Largest relative impulse change tolerated when the step count is doubled.
pub const STABILITY_TOLERANCE: f64 = 0.01;
/// The Gaussian mode is integrated out to this many waists on each side.
pub const TRANSIT_HALF_WIDTH: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamParameters {
    /// Mean longitudinal velocity, m/s.
    pub v0: f64,
    /// Standard deviation of v_x relative to v0.
    pub sigma_v_rel: f64,
    /// Mean transverse position within the standing wave, m.
    pub z_center: f64,
    /// Standard deviation of z, m.
    pub delta_z: f64,
    pub n_molecules: usize,
    pub rng_seed: u64,
    pub spontaneous_emission: bool,
    /// Adds the transverse velocity spread ħ/(2MΔz) from the slit.
    pub diffraction: bool,
    pub time_steps: usize,
}

impl BeamParameters {
    /// 500 m/s, no spreads, 2kz = π/2.
    pub fn new(laser: &LaserField) -> Self {
        BeamParameters {
            v0: 500.0,
            sigma_v_rel: 0.0,
            z_center: z_for_phase(laser, PI / 2.0),
            delta_z: 0.0,
            n_molecules: 10_000,
            rng_seed: 0,
            spontaneous_emission: false,
            diffraction: false,
            time_steps: DEFAULT_TIME_STEPS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v0 > 0.0) || !self.v0.is_finite() {
            return Err(Error::invalid("v0", "must be positive"));
        }
        if !(self.sigma_v_rel >= 0.0) || !(self.delta_z >= 0.0) {
            return Err(Error::invalid("spread", "spreads must be non-negative"));
        }
        if !self.z_center.is_finite() {
            return Err(Error::invalid("z_center", "must be finite"));
        }
        if self.n_molecules == 0 {
            return Err(Error::invalid("n_molecules", "must be at least 1"));
        }
        if self.time_steps < 2 {
            return Err(Error::invalid("time_steps", "must be at least 2"));
        }
        Ok(())
    }
}

/// Transverse position at which the standing-wave phase `2kz` equals `phase`.
pub fn z_for_phase(laser: &LaserField, phase: f64) -> f64 {
    phase / (2.0 * laser.wavevector())
}

/// Transverse velocity spread from a slit of width Δz, `ħ/(2MΔz)`.
/// Zero for Δz = 0 (no diffraction kick).
pub fn diffraction_width(delta_z: f64, mass: f64) -> Result<f64> {
    if !(delta_z >= 0.0) {
        return Err(Error::invalid("delta_z", "must be non-negative"));
    }
    if !(mass > 0.0) {
        return Err(Error::invalid("mass", "must be positive"));
    }
    if delta_z == 0.0 || delta_z.is_infinite() {
        return Ok(0.0);
    }
    Ok(HBAR / (2.0 * mass * delta_z))
}

/// Which rate drives spontaneous emission out of the upper level.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EmissionWidth {
    /// Total radiative width of the upper level (all lower ν'', both branches).
    #[default]
    UpperLevelTotal,
    /// Partial width of the dominant line only.
    Line,
}

/// Two-level parameters of one lower level at the current laser setting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateCoupling {
    pub line: TransitionLine,
    pub g: Wavenumber,
    pub delta: Wavenumber,
    /// Decay width used for spontaneous emission.
    pub gamma: Wavenumber,
}

impl StateCoupling {
    pub fn new(line: &TransitionLine, laser: &LaserField, gamma: Wavenumber) -> Self {
        StateCoupling {
            line: *line,
            g: coupling_g(line, laser),
            delta: line.detuning_at(laser.frequency),
            gamma,
        }
    }

    pub fn check_nonresonant(&self, threshold: f64) -> Result<()> {
        if is_nonresonant(self.g, self.delta, threshold) {
            Ok(())
        } else {
            Err(Error::Resonant {
                level: self.line.lower,
                delta_cm1: self.delta.cm1(),
                g_cm1: self.g.cm1(),
                threshold,
            })
        }
    }
}

/// Sampled initial conditions of one molecule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoleculeSample {
    pub v_x: f64,
    pub z: f64,
    /// Initial transverse velocity (diffraction kick), m/s.
    pub v_z: f64,
}

/// Gaussian passage of a molecule through the beam waist at fixed z.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitProfile {
    pub waist: f64,
    pub v_x: f64,
    /// cos(kz) at the frozen transverse position.
    pub cos_kz: f64,
}

impl TransitProfile {
    pub fn new(laser: &LaserField, v_x: f64, z: f64) -> Self {
        TransitProfile {
            waist: laser.waist,
            v_x,
            cos_kz: (laser.wavevector() * z).cos(),
        }
    }

    pub fn half_duration(&self) -> f64 {
        TRANSIT_HALF_WIDTH * self.waist / self.v_x
    }

    /// Mode function f at time t.
    pub fn mode(&self, t: f64) -> f64 {
        let x = self.v_x * t;
        (-x * x / (2.0 * self.waist * self.waist)).exp() * self.cos_kz
    }
}

/// Steady-state excited fraction `g²f²/(δ² + 2g²f² + Γ²/4)`; any common unit.
pub fn excited_fraction(g: f64, delta: f64, gamma: f64, f_mode: f64) -> f64 {
    let gf2 = (g * f_mode).powi(2);
    if gf2 == 0.0 {
        return 0.0;
    }
    gf2 / (delta * delta + 2.0 * gf2 + gamma * gamma / 4.0)
}

/// Expected number of spontaneous emissions during the transit,
/// `∫ Γ ρ_ee dt`.
pub fn spontaneous_emission_probability(
    g: Wavenumber,
    delta: Wavenumber,
    gamma: Wavenumber,
    profile: &TransitProfile,
) -> Result<f64> {
    if !(profile.v_x > 0.0) || !(profile.waist > 0.0) {
        return Err(Error::invalid(
            "transit profile",
            "v_x and waist must be positive",
        ));
    }
    let (g, d, gam) = (g.cm1(), delta.cm1(), gamma.to_angular_frequency());
    let n = 4000;
    let t0 = -profile.half_duration();
    let h = 2.0 * profile.half_duration() / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * excited_fraction(g, d, gamma.cm1(), profile.mode(t0 + i as f64 * h));
    }
    Ok(gam * acc * h / 3.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryResult {
    pub level: RovibronicLevel,
    pub sample: MoleculeSample,
    /// Final transverse velocity, m/s.
    pub v_z: f64,
    /// v_z / v_x.
    pub angle: f64,
    pub n_emissions: u32,
    /// Coherent force switched off by an emission.
    pub interrupted: bool,
    pub recoil_kicks: Vec<f64>,
    /// Transverse displacement accumulated during the transit, m.
    pub displacement: f64,
    pub raman_nath_ok: bool,
}

fn dressed_force(
    hbar_k: f64,
    g: f64,
    delta: f64,
    profile: &TransitProfile,
    sin_2kz: f64,
    t: f64,
) -> f64 {
    let x = profile.v_x * t;
    let envelope2 = (-x * x / (profile.waist * profile.waist)).exp();
    let gf2 = g * g * envelope2 * profile.cos_kz * profile.cos_kz;
    let root = (gf2 + delta * delta / 4.0).sqrt();
    if root == 0.0 {
        return 0.0;
    }
    delta.signum() * hbar_k * g * g * envelope2 * sin_2kz / (2.0 * root)
}

struct Transit {
    v_z: f64,
    displacement: f64,
    emitted_at: Option<usize>,
}

#[allow(clippy::too_many_arguments)]
fn run_transit<R: Rng + ?Sized>(
    coupling: &StateCoupling,
    laser: &LaserField,
    sample: &MoleculeSample,
    mass: f64,
    steps: usize,
    mut rng: Option<&mut R>,
) -> Transit {
    let k = laser.wavevector();
    let profile = TransitProfile::new(laser, sample.v_x, sample.z);
    let sin_2kz = (2.0 * k * sample.z).sin();
    let g = coupling.g.to_angular_frequency();
    let delta = coupling.delta.to_angular_frequency();
    let gamma = coupling.gamma.to_angular_frequency();
    let hbar_k = HBAR * k;
    let t0 = -profile.half_duration();
    let dt = 2.0 * profile.half_duration() / steps as f64;

    let mut v = sample.v_z;
    let mut displacement = 0.0;
    let mut force = dressed_force(hbar_k, g, delta, &profile, sin_2kz, t0);
    let mut emitted_at = None;
    for n in 0..steps {
        let t_next = t0 + (n + 1) as f64 * dt;
        let half = v + 0.5 * dt * force / mass;
        displacement += half * dt;
        let next_force = dressed_force(hbar_k, g, delta, &profile, sin_2kz, t_next);
        v = half + 0.5 * dt * next_force / mass;
        force = next_force;
        if let Some(rng) = rng.as_deref_mut() {
            let f_mid = profile.mode(t_next - 0.5 * dt);
            let p = gamma * excited_fraction(g, delta, gamma, f_mid) * dt;
            let u: f64 = rng.random();
            if u < p {
                emitted_at = Some(n);
                // remaining time drifts at constant velocity
                displacement += v * dt * (steps - n - 1) as f64;
                break;
            }
        }
    }
    Transit {
        v_z: v,
        displacement,
        emitted_at,
    }
}

/// Integrates the transverse motion of one molecule.
///
/// Without `coupling` the molecule is unaffected and keeps its initial v_z.
/// When `rng` is given, each step draws a spontaneous emission with
/// probability `Γ ρ_ee dt`; after an emission the force is off and a recoil
/// of ±ħk/M is added.
pub fn integrate_trajectory<R: Rng + ?Sized>(
    level: RovibronicLevel,
    coupling: Option<&StateCoupling>,
    laser: &LaserField,
    sample: &MoleculeSample,
    mass: f64,
    time_steps: usize,
    rng: Option<&mut R>,
) -> Result<TrajectoryResult> {
    if !(sample.v_x > 0.0) {
        return Err(Error::invalid(
            "v_x",
            format!(
                "sampled longitudinal velocity {} is not positive",
                sample.v_x
            ),
        ));
    }
    let bound = laser.raman_nath_bound();
    let Some(coupling) = coupling else {
        let duration = 2.0 * TRANSIT_HALF_WIDTH * laser.waist / sample.v_x;
        let angle = sample.v_z / sample.v_x;
        return Ok(TrajectoryResult {
            level,
            sample: *sample,
            v_z: sample.v_z,
            angle,
            n_emissions: 0,
            interrupted: false,
            recoil_kicks: Vec::new(),
            displacement: sample.v_z * duration,
            raman_nath_ok: angle.abs() < bound,
        });
    };

    // Step-doubling check on the coherent part.
    let coarse = run_transit::<ChaCha8Rng>(coupling, laser, sample, mass, time_steps, None);
    let fine = run_transit::<ChaCha8Rng>(coupling, laser, sample, mass, 2 * time_steps, None);
    let impulse = (fine.v_z - sample.v_z).abs();
    if impulse > 0.0 {
        let change = (fine.v_z - coarse.v_z).abs() / impulse;
        if change > STABILITY_TOLERANCE {
            return Err(Error::IntegratorUnstable {
                relative_change: change,
            });
        }
    }

    let (mut transit, mut kicks) = match rng {
        None => (coarse, Vec::new()),
        Some(rng) => {
            let mut t = run_transit(coupling, laser, sample, mass, time_steps, Some(&mut *rng));
            let mut kicks = Vec::new();
            if let Some(n) = t.emitted_at {
                let v_rec = photon_recoil_velocity(laser.wavelength(), mass)?;
                let kick = if rng.random::<bool>() { v_rec } else { -v_rec };
                t.v_z += kick;
                let remaining = 2.0 * TRANSIT_HALF_WIDTH * laser.waist / sample.v_x
                    * (time_steps - n - 1) as f64
                    / time_steps as f64;
                t.displacement += kick * remaining;
                kicks.push(kick);
            }
            (t, kicks)
        }
    };
    kicks.shrink_to_fit();
    let interrupted = transit.emitted_at.is_some();
    transit.emitted_at = None;
    let angle = transit.v_z / sample.v_x;
    Ok(TrajectoryResult {
        level,
        sample: *sample,
        v_z: transit.v_z,
        angle,
        n_emissions: u32::from(interrupted),
        interrupted,
        recoil_kicks: kicks,
        displacement: transit.displacement,
        raman_nath_ok: angle.abs() < bound
            && transit.displacement.abs() < laser.wavelength() / 10.0,
    })
}

/// [`integrate_trajectory`] without spontaneous emission.
pub fn coherent_trajectory(
    level: RovibronicLevel,
    coupling: Option<&StateCoupling>,
    laser: &LaserField,
    sample: &MoleculeSample,
    mass: f64,
    time_steps: usize,
) -> Result<TrajectoryResult> {
    integrate_trajectory::<ChaCha8Rng>(level, coupling, laser, sample, mass, time_steps, None)
}

/// How initial states are drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StateSelection {
    /// Full thermal ensemble; levels without a line keep zero deflection.
    Thermal,
    /// Thermal weights restricted to levels with at least one line in the
    /// window (the deflected partial beams).
    Participating,
    /// Every molecule starts in this level.
    Single(RovibronicLevel),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamState {
    pub level: RovibronicLevel,
    pub weight: f64,
    pub coupling: Option<StateCoupling>,
}

/// Levels, weights and two-level couplings entering a beam simulation.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamEnsemble {
    pub states: Vec<BeamState>,
    /// Thermal population carried by `states`.
    pub population_fraction: f64,
}

impl BeamEnsemble {
    /// Couples every selected level to its dominant line within `window`
    /// and rejects levels that violate the nonresonance condition.
    pub fn prepare(
        spectrum: &Spectrum,
        ensemble: &ThermalEnsemble,
        laser: &LaserField,
        window: Wavenumber,
        threshold: f64,
        selection: StateSelection,
        emission_width: EmissionWidth,
    ) -> Result<Self> {
        let (levels, weights, fraction): (Vec<RovibronicLevel>, Vec<f64>, f64) = match selection {
            StateSelection::Single(level) => (
                vec![level],
                vec![1.0],
                ensemble.weight_of(&level).unwrap_or(0.0),
            ),
            _ => (
                ensemble.levels.iter().map(|l| l.level).collect(),
                ensemble.weights.clone(),
                1.0,
            ),
        };
        let lines = spectrum.build_line_list(&levels, laser, window)?;
        let mut by_level: BTreeMap<RovibronicLevel, Vec<&TransitionLine>> = BTreeMap::new();
        for line in &lines {
            by_level.entry(line.lower).or_default().push(line);
        }
        if emission_width == EmissionWidth::UpperLevelTotal {
            if let Some(top) = lines.iter().map(|l| l.upper.nu).max() {
                spectrum.prepare_decay_widths(top)?;
            }
        }
        let mut states = Vec::with_capacity(levels.len());
        for (level, weight) in levels.into_iter().zip(weights) {
            let coupling = match by_level.get(&level) {
                None => None,
                Some(cands) => {
                    let line = select_dominant_at(cands.iter().copied(), laser.frequency)
                        .expect("nonempty");
                    let gamma = match emission_width {
                        EmissionWidth::Line => line.gamma,
                        EmissionWidth::UpperLevelTotal => {
                            spectrum.upper_decay_width(line.upper.nu, line.upper.j)?
                        }
                    };
                    let c = StateCoupling::new(line, laser, gamma);
                    c.check_nonresonant(threshold)?;
                    Some(c)
                }
            };
            if selection == StateSelection::Participating && coupling.is_none() {
                continue;
            }
            states.push(BeamState {
                level,
                weight,
                coupling,
            });
        }
        if states.is_empty() {
            return Err(Error::invalid(
                "beam ensemble",
                "no level has a line in the window",
            ));
        }
        let mut population_fraction = fraction;
        if selection == StateSelection::Participating {
            let total: f64 = states.iter().map(|s| s.weight).sum();
            for s in &mut states {
                s.weight /= total;
            }
            population_fraction = total;
        }
        Ok(BeamEnsemble {
            states,
            population_fraction,
        })
    }

    pub fn single(level: RovibronicLevel, coupling: Option<StateCoupling>) -> Self {
        BeamEnsemble {
            states: vec![BeamState {
                level,
                weight: 1.0,
                coupling,
            }],
            population_fraction: 1.0,
        }
    }

    fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.states
            .iter()
            .map(|s| {
                acc += s.weight;
                acc
            })
            .collect()
    }
}

/// Binning of the detector along z (in deflection angle).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistogramSpec {
    pub bins: usize,
    /// Fixed angle range; `None` spans the observed angles. Angles outside a
    /// fixed range are counted in the outermost bins.
    pub range: Option<(f64, f64)>,
}

impl Default for HistogramSpec {
    fn default() -> Self {
        HistogramSpec {
            bins: 200,
            range: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectorHistogram {
    /// `bins + 1` ascending edges, radians.
    pub edges: Vec<f64>,
    pub total: Vec<u64>,
    pub per_state: BTreeMap<RovibronicLevel, Vec<u64>>,
}

impl DetectorHistogram {
    pub fn from_trajectories(
        trajectories: &[TrajectoryResult],
        spec: &HistogramSpec,
    ) -> Result<Self> {
        if spec.bins == 0 {
            return Err(Error::invalid("bins", "must be at least 1"));
        }
        let (lo, hi) = match spec.range {
            Some((lo, hi)) if hi > lo => (lo, hi),
            Some(_) => {
                return Err(Error::invalid(
                    "histogram range",
                    "upper edge must exceed lower edge",
                ))
            }
            None => {
                let lo = trajectories
                    .iter()
                    .map(|t| t.angle)
                    .fold(f64::INFINITY, f64::min);
                let hi = trajectories
                    .iter()
                    .map(|t| t.angle)
                    .fold(f64::NEG_INFINITY, f64::max);
                if !lo.is_finite() || !hi.is_finite() {
                    (-1e-6, 1e-6)
                } else {
                    let pad = ((hi - lo) * 0.01)
                        .max(1e-9 * lo.abs().max(hi.abs()))
                        .max(1e-12);
                    (lo - pad, hi + pad)
                }
            }
        };
        let width = (hi - lo) / spec.bins as f64;
        let edges: Vec<f64> = (0..=spec.bins).map(|i| lo + width * i as f64).collect();
        let mut total = vec![0u64; spec.bins];
        let mut per_state: BTreeMap<RovibronicLevel, Vec<u64>> = BTreeMap::new();
        for t in trajectories {
            let idx = (((t.angle - lo) / width).floor().max(0.0) as usize).min(spec.bins - 1);
            total[idx] += 1;
            per_state
                .entry(t.level)
                .or_insert_with(|| vec![0; spec.bins])[idx] += 1;
        }
        Ok(DetectorHistogram {
            edges,
            total,
            per_state,
        })
    }

    pub fn count(&self) -> u64 {
        self.total.iter().sum()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "bin_lo_rad,bin_hi_rad,count_total")?;
        for level in self.per_state.keys() {
            write!(out, ",count_state_{}_{}_{}", level.nu, level.j, level.m)?;
        }
        writeln!(out)?;
        for (i, count) in self.total.iter().enumerate() {
            write!(
                out,
                "{:.9e},{:.9e},{count}",
                self.edges[i],
                self.edges[i + 1]
            )?;
            for counts in self.per_state.values() {
                write!(out, ",{}", counts[i])?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct BeamRun {
    pub histogram: DetectorHistogram,
    /// Index-ordered per-molecule records.
    pub trajectories: Vec<TrajectoryResult>,
}

impl BeamRun {
    pub fn write_trajectories_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "index,nu,J,M,v_x_m_s,z_m,v_z_initial_m_s,v_z_m_s,angle_rad,n_emissions,interrupted,recoil_m_s,displacement_m,raman_nath_ok"
        )?;
        for (i, t) in self.trajectories.iter().enumerate() {
            let recoil: f64 = t.recoil_kicks.iter().sum();
            writeln!(
                out,
                "{i},{},{},{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{},{:.6e},{:.6e},{}",
                t.level.nu,
                t.level.j,
                t.level.m,
                t.sample.v_x,
                t.sample.z,
                t.sample.v_z,
                t.v_z,
                t.angle,
                t.n_emissions,
                u8::from(t.interrupted),
                recoil,
                t.displacement,
                u8::from(t.raman_nath_ok),
            )?;
        }
        Ok(())
    }
}

/// Random generator of molecule `index`: a dedicated ChaCha stream, so the
/// result does not depend on scheduling.
pub fn molecule_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Runs `params.n_molecules` trajectories in parallel and histograms the
/// final angles.
pub fn simulate_beam(
    ensemble: &BeamEnsemble,
    laser: &LaserField,
    params: &BeamParameters,
    mass: f64,
    histogram: &HistogramSpec,
) -> Result<BeamRun> {
    params.validate()?;
    if ensemble.states.is_empty() {
        return Err(Error::invalid("beam ensemble", "no states"));
    }
    let cumulative = ensemble.cumulative();
    let total_weight = *cumulative.last().expect("nonempty");
    let diffraction = if params.diffraction {
        diffraction_width(params.delta_z, mass)?
    } else {
        0.0
    };

    let trajectories: Vec<Result<TrajectoryResult>> = (0..params.n_molecules)
        .into_par_iter()
        .map(|index| {
            let mut rng = molecule_rng(params.rng_seed, index as u64);
            // fixed draw order: state, v_x, z, diffraction, then emission
            let u: f64 = rng.random::<f64>() * total_weight;
            let n_v: f64 = rng.sample(StandardNormal);
            let n_z: f64 = rng.sample(StandardNormal);
            let n_d: f64 = rng.sample(StandardNormal);
            let pick = cumulative
                .partition_point(|&c| c <= u)
                .min(cumulative.len() - 1);
            let state = &ensemble.states[pick];
            let sample = MoleculeSample {
                v_x: params.v0 * (1.0 + params.sigma_v_rel * n_v),
                z: params.z_center + params.delta_z * n_z,
                v_z: diffraction * n_d,
            };
            let rng = if params.spontaneous_emission {
                Some(&mut rng)
            } else {
                None
            };
            integrate_trajectory(
                state.level,
                state.coupling.as_ref(),
                laser,
                &sample,
                mass,
                params.time_steps,
                rng,
            )
        })
        .collect();
    let trajectories = trajectories.into_iter().collect::<Result<Vec<_>>>()?;
    let histogram = DetectorHistogram::from_trajectories(&trajectories, histogram)?;
    Ok(BeamRun {
        histogram,
        trajectories,
    })
}
